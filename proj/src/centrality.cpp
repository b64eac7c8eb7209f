#include "natbd/centrality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <thread>

#include "natbd/errors.hpp"

namespace natbd {

const char* metric_name(CentralityMetric metric) {
    switch (metric) {
        case CentralityMetric::Degree: return "degree";
        case CentralityMetric::Betweenness: return "betweenness";
        case CentralityMetric::Closeness: return "closeness";
        case CentralityMetric::Eigenvector: return "eigenvector";
    }
    return "?";
}

CentralityMetric metric_from_name(const std::string& name) {
    if (name == "degree") return CentralityMetric::Degree;
    if (name == "betweenness") return CentralityMetric::Betweenness;
    if (name == "closeness") return CentralityMetric::Closeness;
    if (name == "eigenvector") return CentralityMetric::Eigenvector;
    throw ConfigError("unknown centrality metric: " + name);
}

namespace {

constexpr std::uint64_t kUnreached = std::numeric_limits<std::uint64_t>::max();

// Single-source shortest paths with path counting. Unweighted uses BFS;
// weighted uses Dijkstra with the edge weight as the distance (weights are
// positive integers, so distances stay exact in 64 bits). Vertices are
// reported in settling order; a vertex's sigma is final once settled because
// every shortest predecessor settles strictly earlier.
struct ShortestPaths {
    std::vector<std::uint64_t> dist;
    std::vector<double> sigma;
    std::vector<std::vector<ClassId>> preds;
    std::vector<ClassId> settled;
};

void shortest_paths(const CoGraph& g, ClassId source, bool weighted, ShortestPaths& sp) {
    const ClassId n = g.vertex_count();
    sp.dist.assign(n, kUnreached);
    sp.sigma.assign(n, 0.0);
    sp.preds.assign(n, {});
    sp.settled.clear();
    sp.dist[source] = 0;
    sp.sigma[source] = 1.0;

    if (!weighted) {
        std::queue<ClassId> q;
        q.push(source);
        while (!q.empty()) {
            ClassId u = q.front();
            q.pop();
            sp.settled.push_back(u);
            for (ClassId v : g.neighbors(u)) {
                std::uint64_t alt = sp.dist[u] + 1;
                if (sp.dist[v] == kUnreached) {
                    sp.dist[v] = alt;
                    q.push(v);
                }
                if (sp.dist[v] == alt) {
                    sp.sigma[v] += sp.sigma[u];
                    sp.preds[v].push_back(u);
                }
            }
        }
        return;
    }

    using Entry = std::pair<std::uint64_t, ClassId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    std::vector<bool> done(n, false);
    pq.emplace(0, source);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = true;
        sp.settled.push_back(u);
        for (ClassId v : g.neighbors(u)) {
            std::uint64_t alt = d + g.weight(u, v);
            if (alt < sp.dist[v]) {
                sp.dist[v] = alt;
                sp.sigma[v] = sp.sigma[u];
                sp.preds[v].assign(1, u);
                pq.emplace(alt, v);
            } else if (alt == sp.dist[v]) {
                sp.sigma[v] += sp.sigma[u];
                sp.preds[v].push_back(u);
            }
        }
    }
}

// Static chunking keeps per-source accumulation order fixed for a given
// worker count, so repeated runs produce identical bytes.
void for_each_source(ClassId n, unsigned workers, const std::function<void(ClassId, unsigned)>& fn) {
    if (workers <= 1 || n < 2) {
        for (ClassId s = 0; s < n; ++s) fn(s, 0);
        return;
    }
    unsigned count = std::min<unsigned>(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
        threads.emplace_back([&, w] {
            for (ClassId s = w; s < n; s += count) fn(s, w);
        });
    }
    for (auto& t : threads) t.join();
}

std::vector<double> degree_scores(const CoGraph& g, bool weighted) {
    const ClassId n = g.vertex_count();
    std::vector<double> scores(n, 0.0);
    for (ClassId v = 0; v < n; ++v) {
        if (weighted) {
            std::uint64_t sum = 0;
            for (ClassId u : g.neighbors(v)) sum += g.weight(v, u);
            scores[v] = static_cast<double>(sum);
        } else {
            scores[v] = static_cast<double>(g.neighbors(v).size());
        }
    }
    return scores;
}

std::vector<double> betweenness_scores(const CoGraph& g, bool weighted, unsigned workers) {
    const ClassId n = g.vertex_count();
    unsigned count = workers <= 1 ? 1 : std::min<unsigned>(workers, std::max<ClassId>(n, 1));
    std::vector<std::vector<double>> partial(count, std::vector<double>(n, 0.0));

    for_each_source(n, workers, [&](ClassId s, unsigned w) {
        thread_local ShortestPaths sp;
        shortest_paths(g, s, weighted, sp);
        std::vector<double> delta(n, 0.0);
        for (auto it = sp.settled.rbegin(); it != sp.settled.rend(); ++it) {
            ClassId v = *it;
            for (ClassId u : sp.preds[v]) delta[u] += sp.sigma[u] / sp.sigma[v] * (1.0 + delta[v]);
            if (v != s) partial[w][v] += delta[v];
        }
    });

    std::vector<double> scores(n, 0.0);
    for (const auto& p : partial)
        for (ClassId v = 0; v < n; ++v) scores[v] += p[v];
    // Brandes counts ordered pairs; halve for unordered {j,k}.
    for (double& s : scores) s *= 0.5;
    return scores;
}

std::vector<double> closeness_scores(const CoGraph& g, bool weighted, unsigned workers) {
    const ClassId n = g.vertex_count();
    std::vector<double> scores(n, 0.0);
    for_each_source(n, workers, [&](ClassId s, unsigned) {
        thread_local ShortestPaths sp;
        shortest_paths(g, s, weighted, sp);
        std::uint64_t sum = 0;
        for (ClassId v = 0; v < n; ++v)
            if (v != s && sp.dist[v] != kUnreached) sum += sp.dist[v];
        scores[s] = sum > 0 ? 1.0 / static_cast<double>(sum) : 0.0;
    });
    return scores;
}

std::vector<double> eigenvector_scores(const CoGraph& g, bool weighted) {
    const ClassId n = g.vertex_count();
    if (g.edge_count() == 0) throw InputError("eigenvector centrality requires a graph with at least one edge");

    // Power iteration on A + I. The diagonal shift leaves eigenvectors
    // untouched but makes the dominant eigenvalue strictly largest in
    // magnitude, so iteration also converges on bipartite graphs, where the
    // spectrum of A alone is symmetric and the raw iteration oscillates.
    const double shift = 1.0;
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n, 0.0);
    const int max_iterations = 10000;
    for (int it = 0; it < max_iterations; ++it) {
        for (ClassId i = 0; i < n; ++i) {
            double acc = shift * x[i];
            for (ClassId j : g.neighbors(i)) acc += (weighted ? static_cast<double>(g.weight(i, j)) : 1.0) * x[j];
            y[i] = acc;
        }
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        double diff = 0.0;
        for (ClassId i = 0; i < n; ++i) {
            y[i] /= norm;
            diff = std::max(diff, std::abs(y[i] - x[i]));
        }
        x.swap(y);
        if (diff < 1e-10) break;
    }
    for (double& v : x)
        if (v < 0.0) v = 0.0;  // clear any -0 from rounding
    return x;
}

}  // namespace

CentralityRanking centrality(const CoGraph& graph, CentralityMetric metric, bool weighted, unsigned workers) {
    CentralityRanking ranking;
    ranking.metric = metric;
    ranking.weighted = weighted;
    switch (metric) {
        case CentralityMetric::Degree: ranking.scores = degree_scores(graph, weighted); break;
        case CentralityMetric::Betweenness: ranking.scores = betweenness_scores(graph, weighted, workers); break;
        case CentralityMetric::Closeness: ranking.scores = closeness_scores(graph, weighted, workers); break;
        case CentralityMetric::Eigenvector: ranking.scores = eigenvector_scores(graph, weighted); break;
    }
    ranking.order.resize(graph.vertex_count());
    std::iota(ranking.order.begin(), ranking.order.end(), 0);
    std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](ClassId a, ClassId b) {
        if (ranking.scores[a] != ranking.scores[b]) return ranking.scores[a] > ranking.scores[b];
        return a < b;
    });
    return ranking;
}

namespace {
std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}
}  // namespace

bool name_excluded(const std::string& name, const std::set<std::string>& exclusions) {
    if (exclusions.empty()) return false;
    std::string lowered = ascii_lower(name);
    for (const auto& ex : exclusions)
        if (ascii_lower(ex) == lowered) return true;
    return false;
}

std::vector<TriggerCandidate> top_triggers(const CentralityRanking& ranking,
                                           const ClassVocabulary& vocabulary, std::size_t m,
                                           const std::set<std::string>& exclusions) {
    if (m == 0) throw ConfigError("top trigger count m must be at least 1");
    std::vector<TriggerCandidate> out;
    for (ClassId v : ranking.order) {
        if (out.size() == m) break;
        const std::string& name = vocabulary.name(v);
        if (name_excluded(name, exclusions)) continue;
        out.push_back({v, name, out.size() + 1, ranking.scores[v]});
    }
    return out;
}

}  // namespace natbd
