#include <sstream>

#include "doctest.h"
#include "natbd/cooccurrence.hpp"
#include "natbd/errors.hpp"
#include "natbd/report.hpp"
#include "support/synthetic.hpp"

using namespace natbd;

TEST_CASE("tradeoff_curve: planted trigger appears only below its subset size") {
    auto sc = synthetic::planted_trigger_set(21);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, 15);
    auto ranking = centrality(graph, CentralityMetric::Degree, false);
    CurationConfig config;
    config.seed = 2;
    auto curve = tradeoff_curve(graph, matrix, sc.set, ranking, config, -1, -1, 50, {5, 10});
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].min_subset_size == 5);
    CHECK(curve.points[0].num_viable_subsets == 1);  // the planted 8-class trigger
    CHECK(curve.points[1].num_viable_subsets == 0);
}

TEST_CASE("tradeoff_curve: empty graph gives zero counts") {
    auto sc = synthetic::uniform_scenario(3, 5, 5);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, 1000000);  // nothing survives
    auto ranking = centrality(graph, CentralityMetric::Degree, false);
    CurationConfig config;
    auto curve = tradeoff_curve(graph, matrix, sc.set, ranking, config, -1, -1, 10, {2, 5});
    for (const auto& pt : curve.points) CHECK(pt.num_viable_subsets == 0);
}

TEST_CASE("tradeoff_curve: counts never increase with subset size") {
    Rng rng(77);
    for (int round = 0; round < 8; ++round) {
        auto set = synthetic::random_annotation_set(rng, 15, 400);
        auto matrix = build_cooccurrence(set);
        auto graph = build_graph(matrix, 2);
        auto ranking = centrality(graph, CentralityMetric::Degree, false);
        CurationConfig config;
        config.min_clean_per_class = 1;
        config.min_poison_per_class = 1;
        config.seed = rng.next();
        auto curve = tradeoff_curve(graph, matrix, set, ranking, config, -1, -1, 30, {1, 2, 3, 4, 6});
        for (std::size_t i = 1; i < curve.points.size(); ++i)
            CHECK(curve.points[i].num_viable_subsets <= curve.points[i - 1].num_viable_subsets);
    }
}

TEST_CASE("tradeoff_curve: sizes must be strictly ascending") {
    auto sc = synthetic::uniform_scenario(3, 5, 5);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, kNoThreshold);
    auto ranking = centrality(graph, CentralityMetric::Degree, false);
    CurationConfig config;
    CHECK_THROWS_AS(tradeoff_curve(graph, matrix, sc.set, ranking, config, -1, -1, 10, {}), ConfigError);
    CHECK_THROWS_AS(tradeoff_curve(graph, matrix, sc.set, ranking, config, -1, -1, 10, {5, 5}), ConfigError);
    CHECK_THROWS_AS(tradeoff_curve(graph, matrix, sc.set, ranking, config, -1, -1, 10, {5, 3}), ConfigError);
}

TEST_CASE("wordcloud_export: weights fall linearly with rank") {
    ClassVocabulary vocab(std::vector<std::string>{"A", "B", "C", "D"});
    CentralityRanking ranking;
    ranking.scores = {4, 3, 2, 1};
    ranking.order = {0, 1, 2, 3};

    auto cloud = wordcloud_export(ranking, vocab, 3, {});
    REQUIRE(cloud.size() == 3);
    CHECK(cloud[0].class_name == "A");
    CHECK(cloud[0].weight == 3);
    CHECK(cloud[1].weight == 2);
    CHECK(cloud[2].weight == 1);
    for (std::size_t i = 1; i < cloud.size(); ++i) CHECK(cloud[i].weight < cloud[i - 1].weight);

    // excluding the top class promotes the next one to the top weight
    auto excl = wordcloud_export(ranking, vocab, 3, {"A"});
    CHECK(excl[0].class_name == "B");
    CHECK(excl[0].weight == 3);

    auto single = wordcloud_export(ranking, vocab, 1, {});
    REQUIRE(single.size() == 1);
    CHECK(single[0].weight == 1);
}

TEST_CASE("dataset_stats: exact values on the toy set") {
    std::istringstream in(
        R"({"image_id":"img1","labels":["A","B"]})"
        "\n"
        R"({"image_id":"img2","labels":["A"]})"
        "\n"
        R"({"image_id":"img3","labels":["B","C"]})"
        "\n");
    auto set = parse_manifest(in).set;
    auto stats = dataset_stats(set);
    CHECK(stats.class_count == 3);
    CHECK(stats.image_count == 3);
    CHECK(stats.total_label_incidences == 5);
    CHECK(stats.mean_labels_per_image == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("dataset_stats: mean times image count recovers the incidence total") {
    Rng rng(9);
    for (int round = 0; round < 20; ++round) {
        auto set = synthetic::random_annotation_set(rng, 10, 60);
        auto stats = dataset_stats(set);
        std::size_t total = 0;
        for (const auto& rec : set.records) total += rec.labels.size();
        CHECK(stats.total_label_incidences == total);
        if (stats.image_count > 0)
            CHECK(stats.mean_labels_per_image ==
                  static_cast<double>(total) / static_cast<double>(stats.image_count));
    }
}
