#pragma once

#include <cstdint>
#include <vector>

#include "natbd/graph.hpp"

namespace natbd {

// One-hop neighborhood of a trigger vertex with two weight filters applied:
// trig_threshold gates which neighbors qualify at all (edge to the trigger
// must exceed it) and prune_threshold gates which among-neighbor edges count
// as conflicts. kNoThreshold disables either filter. raw_overlap keeps the
// unfiltered pair counts for residual-overlap reporting.
struct InducedSubgraph {
    ClassId trigger = 0;
    int trig_threshold = kNoThreshold;
    int prune_threshold = kNoThreshold;
    std::vector<ClassId> vertices;             // sorted ascending
    std::vector<Count> trigger_edge_weight;    // aligned with vertices
    std::vector<std::vector<std::uint32_t>> conflicts;  // local indices, post-prune edges
    std::vector<Count> raw_overlap;            // dense |V_t| x |V_t|, pre-prune counts

    std::size_t size() const { return vertices.size(); }
    Count raw(std::size_t a, std::size_t b) const { return raw_overlap[a * vertices.size() + b]; }
    bool conflict_edge(std::size_t a, std::size_t b) const;
};

struct PoisonableSubset {
    ClassId trigger = 0;
    std::vector<ClassId> classes;  // sorted ascending
    std::uint64_t trials_run = 0;
    std::uint64_t seed = 0;
    std::uint64_t residual_overlap = 0;  // total pre-prune weight among classes
};

InducedSubgraph induced_subgraph(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                 ClassId trigger, int trig_threshold, int prune_threshold);

// Greedy pass over a seed-determined uniform permutation of the subgraph
// vertices: take a vertex unless it conflicts with one already taken. The
// result is independent and maximal; identical (subgraph, seed) pairs give
// identical results. Returned as sorted class ids.
std::vector<ClassId> maximal_independent_set(const InducedSubgraph& subgraph, std::uint64_t seed);

// Best of `trials` greedy runs, each on its own seed derived from
// (base_seed, trial index); ties on size prefer the lexicographically
// smaller sorted id list. The per-trial seeds do not depend on the trial
// count, so a longer run extends a shorter one.
PoisonableSubset approximate_mis(const InducedSubgraph& subgraph, std::uint64_t trials,
                                 std::uint64_t base_seed);

std::uint64_t residual_overlap(const InducedSubgraph& subgraph, const std::vector<ClassId>& classes);

}  // namespace natbd
