#pragma once

#include "natbd/curate.hpp"

namespace natbd {

struct TradeoffCurve {
    CentralityMetric metric = CentralityMetric::Degree;
    bool weighted = false;
    struct Point {
        std::size_t min_subset_size;
        std::size_t num_viable_subsets;
    };
    std::vector<Point> points;  // sizes strictly increasing, counts non-increasing
};

// For each requested size s, the number of triggers whose supply-filtered
// subset has at least s classes. The per-trigger pipeline runs once; the
// sizes only slice its survivor counts.
TradeoffCurve tradeoff_curve(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                             const AnnotationSet& set, const CentralityRanking& ranking,
                             const CurationConfig& config, int trig_threshold, int prune_threshold,
                             std::uint64_t trials, const std::vector<std::size_t>& sizes,
                             std::size_t max_candidates = 0);

struct WordcloudEntry {
    std::string class_name;
    std::size_t weight;  // top_k for the most central entry, down to 1
};

std::vector<WordcloudEntry> wordcloud_export(const CentralityRanking& ranking,
                                             const ClassVocabulary& vocabulary, std::size_t top_k,
                                             const std::set<std::string>& exclusions);

struct DatasetStats {
    std::size_t class_count = 0;
    std::size_t image_count = 0;
    std::size_t total_label_incidences = 0;
    double mean_labels_per_image = 0.0;
};

DatasetStats dataset_stats(const AnnotationSet& set);

}  // namespace natbd
