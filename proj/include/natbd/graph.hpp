#pragma once

#include <cstdint>
#include <vector>

#include "natbd/cooccurrence.hpp"

namespace natbd {

// Sentinel that disables a minimum-weight threshold.
inline constexpr int kNoThreshold = -1;

// Weighted undirected co-occurrence graph: the pair-count matrix with every
// entry below min_overlaps zeroed out. Immutable after construction.
class CoGraph {
public:
    CoGraph() = default;
    CoGraph(ClassId vertex_count, std::vector<Count> weights, int min_overlaps);

    ClassId vertex_count() const { return vertex_count_; }
    int min_overlaps() const { return min_overlaps_; }
    Count weight(ClassId i, ClassId j) const { return weights_[std::size_t(i) * vertex_count_ + j]; }
    bool has_edge(ClassId i, ClassId j) const { return weight(i, j) > 0; }
    const std::vector<ClassId>& neighbors(ClassId v) const { return neighbors_[v]; }
    std::size_t edge_count() const { return edge_count_; }

private:
    ClassId vertex_count_ = 0;
    std::vector<Count> weights_;  // dense symmetric, zero diagonal
    std::vector<std::vector<ClassId>> neighbors_;
    std::size_t edge_count_ = 0;
    int min_overlaps_ = kNoThreshold;
};

// Keeps matrix entries >= min_overlaps; min_overlaps == kNoThreshold keeps
// every nonzero count. Zero is rejected (it would admit zero-weight edges).
CoGraph build_graph(const CoOccurrenceMatrix& matrix, int min_overlaps);

}  // namespace natbd
