#include "natbd/subset.hpp"

#include <algorithm>

#include "natbd/errors.hpp"
#include "natbd/rng.hpp"

namespace natbd {

bool InducedSubgraph::conflict_edge(std::size_t a, std::size_t b) const {
    const auto& adj = conflicts[a];
    return std::find(adj.begin(), adj.end(), static_cast<std::uint32_t>(b)) != adj.end();
}

InducedSubgraph induced_subgraph(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                 ClassId trigger, int trig_threshold, int prune_threshold) {
    if (trigger >= graph.vertex_count()) throw InputError("trigger class id out of range");

    InducedSubgraph sub;
    sub.trigger = trigger;
    sub.trig_threshold = trig_threshold;
    sub.prune_threshold = prune_threshold;
    for (ClassId v : graph.neighbors(trigger)) {
        if (static_cast<std::int64_t>(graph.weight(trigger, v)) > trig_threshold) sub.vertices.push_back(v);
    }
    std::sort(sub.vertices.begin(), sub.vertices.end());

    const std::size_t n = sub.vertices.size();
    sub.trigger_edge_weight.resize(n);
    sub.raw_overlap.assign(n * n, 0);
    sub.conflicts.assign(n, {});
    for (std::size_t a = 0; a < n; ++a) {
        sub.trigger_edge_weight[a] = matrix.count(trigger, sub.vertices[a]);
        for (std::size_t b = a + 1; b < n; ++b) {
            Count raw = matrix.count(sub.vertices[a], sub.vertices[b]);
            sub.raw_overlap[a * n + b] = raw;
            sub.raw_overlap[b * n + a] = raw;
            Count w = graph.weight(sub.vertices[a], sub.vertices[b]);
            if (w > 0 && static_cast<std::int64_t>(w) > prune_threshold) {
                sub.conflicts[a].push_back(static_cast<std::uint32_t>(b));
                sub.conflicts[b].push_back(static_cast<std::uint32_t>(a));
            }
        }
    }
    return sub;
}

std::vector<ClassId> maximal_independent_set(const InducedSubgraph& subgraph, std::uint64_t seed) {
    const std::size_t n = subgraph.size();
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    rng.shuffle(perm);

    std::vector<char> blocked(n, 0);
    std::vector<ClassId> taken;
    for (std::uint32_t v : perm) {
        if (blocked[v]) continue;
        taken.push_back(subgraph.vertices[v]);
        for (std::uint32_t u : subgraph.conflicts[v]) blocked[u] = 1;
    }
    std::sort(taken.begin(), taken.end());
    return taken;
}

std::uint64_t residual_overlap(const InducedSubgraph& subgraph, const std::vector<ClassId>& classes) {
    // classes and subgraph.vertices are both sorted
    std::vector<std::size_t> local;
    for (std::size_t i = 0, j = 0; i < classes.size() && j < subgraph.vertices.size();) {
        if (classes[i] == subgraph.vertices[j]) {
            local.push_back(j);
            ++i;
            ++j;
        } else if (classes[i] < subgraph.vertices[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    std::uint64_t total = 0;
    for (std::size_t a = 0; a < local.size(); ++a)
        for (std::size_t b = a + 1; b < local.size(); ++b) total += subgraph.raw(local[a], local[b]);
    return total;
}

PoisonableSubset approximate_mis(const InducedSubgraph& subgraph, std::uint64_t trials,
                                 std::uint64_t base_seed) {
    if (trials == 0) throw ConfigError("approximate MIS needs at least one trial");

    PoisonableSubset best;
    best.trigger = subgraph.trigger;
    best.seed = base_seed;
    best.trials_run = trials;
    bool have = false;
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto candidate = maximal_independent_set(subgraph, derive_seed(base_seed, "trial", t));
        if (!have || candidate.size() > best.classes.size() ||
            (candidate.size() == best.classes.size() && candidate < best.classes)) {
            best.classes = std::move(candidate);
            have = true;
        }
    }
    best.residual_overlap = residual_overlap(subgraph, best.classes);
    return best;
}

}  // namespace natbd
