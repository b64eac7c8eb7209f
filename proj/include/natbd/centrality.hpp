#pragma once

#include <set>
#include <string>
#include <vector>

#include "natbd/graph.hpp"

namespace natbd {

enum class CentralityMetric { Degree, Betweenness, Closeness, Eigenvector };

const char* metric_name(CentralityMetric metric);
CentralityMetric metric_from_name(const std::string& name);

struct CentralityRanking {
    CentralityMetric metric = CentralityMetric::Degree;
    bool weighted = false;
    std::vector<double> scores;   // indexed by vertex, finite and >= 0
    std::vector<ClassId> order;   // descending score, ties by ascending id
};

// Scores per metric:
//   degree       weighted: sum of incident edge weights; unweighted: neighbor count
//   betweenness  sum over unordered pairs {j,k} (j != i != k) of the fraction
//                of shortest j-k paths through i; pairs with no path contribute 0
//   closeness    1 / (sum of distances to reachable vertices); isolated -> 0
//   eigenvector  principal eigenvector of the adjacency matrix, unit L2 norm
// Weighted shortest-path metrics use the edge weight itself as the distance.
// No size normalization is applied; only the ranking feeds downstream.
// workers > 1 parallelizes the all-pairs metrics across source vertices;
// results do not depend on the worker count beyond float summation order.
CentralityRanking centrality(const CoGraph& graph, CentralityMetric metric, bool weighted,
                             unsigned workers = 1);

struct TriggerCandidate {
    ClassId vertex;
    std::string class_name;
    std::size_t rank;  // 1-based position after exclusions
    double score;
};

// First m vertices of the ranking whose class names are not excluded.
// Exclusion matching is exact on the full name, ignoring ASCII case.
std::vector<TriggerCandidate> top_triggers(const CentralityRanking& ranking,
                                           const ClassVocabulary& vocabulary, std::size_t m,
                                           const std::set<std::string>& exclusions);

bool name_excluded(const std::string& name, const std::set<std::string>& exclusions);

}  // namespace natbd
