#include "natbd/report.hpp"

#include <algorithm>

#include "natbd/errors.hpp"
#include "natbd/rng.hpp"

namespace natbd {

TradeoffCurve tradeoff_curve(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                             const AnnotationSet& set, const CentralityRanking& ranking,
                             const CurationConfig& config, int trig_threshold, int prune_threshold,
                             std::uint64_t trials, const std::vector<std::size_t>& sizes,
                             std::size_t max_candidates) {
    if (sizes.empty()) throw ConfigError("tradeoff curve needs at least one subset size");
    if (!std::is_sorted(sizes.begin(), sizes.end()) ||
        std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end())
        throw ConfigError("tradeoff sizes must be strictly ascending");

    // One pipeline pass; survivor counts are then sliced per size. The MIS
    // seeds derive from (config.seed, trigger id) exactly as in
    // viable_triggers, so both views of a trigger agree.
    CurationConfig scan = config;
    scan.min_classes = 2;
    std::vector<std::size_t> survivor_counts;
    std::size_t considered = 0;
    for (ClassId v : ranking.order) {
        if (name_excluded(set.vocabulary.name(v), config.exclusions)) continue;
        if (max_candidates > 0 && considered == max_candidates) break;
        ++considered;
        if (graph.neighbors(v).empty()) continue;
        auto sub = induced_subgraph(graph, matrix, v, trig_threshold, prune_threshold);
        if (sub.size() == 0) continue;
        auto mis = approximate_mis(sub, trials, derive_seed(config.seed, "mis", v));
        auto pools = compute_pools(set, v, mis.classes);
        std::size_t survivors = 0;
        for (std::size_t i = 0; i < pools.classes.size(); ++i) {
            if (pools.clean[i].size() >= config.min_clean_per_class &&
                pools.poison[i].size() >= config.min_poison_per_class)
                ++survivors;
        }
        survivor_counts.push_back(survivors);
    }

    TradeoffCurve curve;
    curve.metric = ranking.metric;
    curve.weighted = ranking.weighted;
    for (std::size_t s : sizes) {
        std::size_t n = 0;
        for (std::size_t c : survivor_counts)
            if (c >= s) ++n;
        curve.points.push_back({s, n});
    }
    return curve;
}

std::vector<WordcloudEntry> wordcloud_export(const CentralityRanking& ranking,
                                             const ClassVocabulary& vocabulary, std::size_t top_k,
                                             const std::set<std::string>& exclusions) {
    if (top_k == 0) throw ConfigError("wordcloud top_k must be at least 1");
    auto candidates = top_triggers(ranking, vocabulary, top_k, exclusions);
    std::vector<WordcloudEntry> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back({c.class_name, top_k - c.rank + 1});
    return out;
}

DatasetStats dataset_stats(const AnnotationSet& set) {
    DatasetStats stats;
    stats.class_count = set.vocabulary.size();
    stats.image_count = set.records.size();
    stats.total_label_incidences = set.total_label_incidences();
    stats.mean_labels_per_image =
        stats.image_count == 0
            ? 0.0
            : static_cast<double>(stats.total_label_incidences) / static_cast<double>(stats.image_count);
    return stats;
}

}  // namespace natbd
