#include "natbd/graph.hpp"

#include "natbd/errors.hpp"

namespace natbd {

CoGraph::CoGraph(ClassId vertex_count, std::vector<Count> weights, int min_overlaps)
    : vertex_count_(vertex_count), weights_(std::move(weights)), min_overlaps_(min_overlaps) {
    neighbors_.assign(vertex_count_, {});
    for (ClassId i = 0; i < vertex_count_; ++i) {
        for (ClassId j = 0; j < vertex_count_; ++j) {
            if (weight(i, j) > 0) {
                neighbors_[i].push_back(j);
                if (i < j) ++edge_count_;
            }
        }
    }
}

CoGraph build_graph(const CoOccurrenceMatrix& matrix, int min_overlaps) {
    if (min_overlaps == 0) throw ConfigError("min_overlaps must be positive or -1 (disabled)");
    if (min_overlaps < kNoThreshold) throw ConfigError("min_overlaps must be positive or -1 (disabled)");
    const ClassId m = matrix.size();
    const Count cutoff = min_overlaps == kNoThreshold ? 1 : static_cast<Count>(min_overlaps);
    std::vector<Count> weights(std::size_t(m) * m, 0);
    for (ClassId i = 0; i < m; ++i) {
        for (ClassId j = i + 1; j < m; ++j) {
            Count c = matrix.count(i, j);
            if (c >= cutoff) {
                weights[std::size_t(i) * m + j] = c;
                weights[std::size_t(j) * m + i] = c;
            }
        }
    }
    return CoGraph(m, std::move(weights), min_overlaps);
}

}  // namespace natbd
