#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "natbd/cooccurrence.hpp"
#include "natbd/curate.hpp"
#include "natbd/errors.hpp"
#include "natbd/io.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace natbd;

namespace {

std::string manifest_bytes(const BackdoorManifest& m) { return io::manifest_to_json(m).dump(2); }

// Rebuilds the set with one poison image of the given class removed.
AnnotationSet drop_one_pair(const AnnotationSet& set, ClassId trigger, ClassId cls) {
    std::vector<ImageRecord> records;
    bool dropped = false;
    for (const auto& rec : set.records) {
        if (!dropped && rec.has_label(trigger) && rec.has_label(cls)) {
            dropped = true;
            continue;
        }
        records.push_back(rec);
    }
    REQUIRE(dropped);
    return AnnotationSet::build(set.vocabulary, std::move(records));
}

}  // namespace

TEST_CASE("compute_pools: exclusivity rules") {
    std::istringstream in(
        R"({"image_id":"clean_ok","labels":["cls"]})"    "\n"
        R"({"image_id":"clean_two","labels":["cls","other"]})" "\n"
        R"({"image_id":"clean_trig","labels":["cls","trig"]})" "\n"
        R"({"image_id":"poison_two","labels":["cls","other","trig"]})" "\n"
        R"({"image_id":"stray","labels":["noise"]})" "\n");
    auto set = parse_manifest(in).set;
    ClassId trig = set.vocabulary.require("trig");
    auto pools = compute_pools(set, trig, {set.vocabulary.require("cls"), set.vocabulary.require("other")});
    REQUIRE(pools.classes.size() == 2);
    std::size_t cls_slot = pools.classes[0] == set.vocabulary.require("cls") ? 0 : 1;
    // only the solo image is clean; the trigger pair is the only poison
    REQUIRE(pools.clean[cls_slot].size() == 1);
    CHECK(set.records[pools.clean[cls_slot][0]].image_id == "clean_ok");
    REQUIRE(pools.poison[cls_slot].size() == 1);
    CHECK(set.records[pools.poison[cls_slot][0]].image_id == "clean_trig");
}

TEST_CASE("viable_triggers: planted trigger is found with its full subset") {
    auto sc = synthetic::planted_trigger_set(11);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, 15);
    auto ranking = centrality(graph, CentralityMetric::Degree, false);

    CurationConfig config;
    config.seed = 5;
    auto viable = viable_triggers(graph, matrix, sc.set, ranking, config, kNoThreshold, kNoThreshold, 50);
    REQUIRE(viable.size() == 1);
    CHECK(viable[0].trigger_name == sc.trigger_name);
    CHECK(viable[0].centrality_rank == 1);
    REQUIRE(viable[0].subset.classes.size() == 8);
    for (const auto& name : sc.poison_class_names) {
        ClassId c = sc.set.vocabulary.require(name);
        CHECK(std::binary_search(viable[0].subset.classes.begin(), viable[0].subset.classes.end(), c));
        CHECK(viable[0].per_class_clean_supply.at(c) == sc.clean_solo_per_class);
        CHECK(viable[0].per_class_poison_supply.at(c) == sc.trigger_pairs_per_class);
    }
}

TEST_CASE("viable_triggers: below min_classes is excluded, and viability is monotone") {
    auto sc = synthetic::planted_trigger_set(12);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, 15);
    auto ranking = centrality(graph, CentralityMetric::Degree, false);

    CurationConfig config;
    config.seed = 5;
    config.min_classes = 9;  // planted subset has only 8
    CHECK(viable_triggers(graph, matrix, sc.set, ranking, config, -1, -1, 50).empty());

    // raising any minimum never grows the list
    CurationConfig base;
    base.seed = 5;
    auto with = [&](auto mutate) {
        CurationConfig c = base;
        mutate(c);
        return viable_triggers(graph, matrix, sc.set, ranking, c, -1, -1, 50).size();
    };
    std::size_t baseline = with([](CurationConfig&) {});
    CHECK(with([](CurationConfig& c) { c.min_classes = 8; }) <= baseline);
    CHECK(with([](CurationConfig& c) { c.min_clean_per_class = 321; }) <= baseline);
    CHECK(with([](CurationConfig& c) { c.min_poison_per_class = 81; }) <= baseline);
}

TEST_CASE("fixed_trigger_subset: recovers the planted class set exactly") {
    auto sc = synthetic::planted_trigger_set(13);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, 15);
    CurationConfig config;
    config.seed = 9;
    auto result = fixed_trigger_subset(graph, matrix, sc.set, sc.set.vocabulary.require(sc.trigger_name),
                                       config, kNoThreshold, kNoThreshold, 50);
    CHECK(result.viable);
    std::vector<ClassId> expected;
    for (const auto& name : sc.poison_class_names) expected.push_back(sc.set.vocabulary.require(name));
    std::sort(expected.begin(), expected.end());
    CHECK(result.subset.classes == expected);
}

TEST_CASE("fixed_trigger_subset: isolated trigger reports an empty, non-viable subset") {
    auto sc = synthetic::uniform_scenario(5, 10, 10, 1, 10);
    auto matrix = build_cooccurrence(sc.set);
    auto graph = build_graph(matrix, kNoThreshold);
    CurationConfig config;
    auto result = fixed_trigger_subset(graph, matrix, sc.set, sc.fillers[0], config, -1, -1, 10);
    CHECK(result.subset.classes.empty());
    CHECK_FALSE(result.viable);
}

TEST_CASE("fixed_class_triggers: centrality order, sentinel and errors") {
    // victim 'cls00' co-occurs with trigger classes of differing centrality
    std::ostringstream text;
    int img = 0;
    auto lines = [&](const std::string& a, const std::string& b, int n) {
        for (int i = 0; i < n; ++i)
            text << R"({"image_id":"x)" << img++ << R"(","labels":[")" << a << "\",\"" << b << "\"]}\n";
    };
    lines("victim", "t1", 30);
    lines("victim", "t2", 30);
    lines("t1", "spread1", 20);  // t1 gets higher degree than t2
    std::istringstream in(text.str());
    auto set = parse_manifest(in).set;
    auto matrix = build_cooccurrence(set);
    auto graph = build_graph(matrix, kNoThreshold);
    auto ranking = centrality(graph, CentralityMetric::Degree, false);
    CurationConfig config;

    ClassId victim = set.vocabulary.require("victim");
    auto list = fixed_class_triggers(graph, victim, ranking, set.vocabulary, config, kNoThreshold);
    REQUIRE(list.size() == 2);
    CHECK(list[0].class_name == "t1");
    CHECK(list[1].class_name == "t2");
    CHECK(list[0].edge_weight == 30);

    // high threshold filters both
    CHECK(fixed_class_triggers(graph, victim, ranking, set.vocabulary, config, 30).empty());
    // isolated victim
    auto spread = set.vocabulary.require("spread1");
    auto spread_list = fixed_class_triggers(graph, spread, ranking, set.vocabulary, config, -1);
    CHECK(spread_list.size() == 1);  // only t1
    CHECK_THROWS_AS(fixed_class_triggers(graph, 999, ranking, set.vocabulary, config, -1), InputError);
}

TEST_CASE("assemble_manifest: 10 classes x 200 clean at rate 0.2 gives 500 poison, 50 per class") {
    auto sc = synthetic::uniform_scenario(10, 200, 60);
    CurationConfig config;
    config.clean_per_class = 200;
    config.injection_rate = 0.2;
    config.seed = 17;
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    CHECK(manifest.clean_total() == 2000);
    CHECK(manifest.poison_total() == 500);
    for (const auto& [c, ids] : manifest.poison) CHECK(ids.size() == 50);
    CHECK(manifest.injection_rate_actual == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(manifest.injection_rate_actual - 0.2) <= 1.0 / 2500.0);
    CHECK(manifest.target_name == sc.set.vocabulary.name(sc.classes.front()));
    CHECK(oracle::audit_manifest(sc.set, manifest).empty());
}

TEST_CASE("assemble_manifest: rate 0.185 rounds to 454 poison images") {
    auto sc = synthetic::uniform_scenario(10, 200, 60);
    CurationConfig config;
    config.clean_per_class = 200;
    config.injection_rate = 0.185;
    config.seed = 17;
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    CHECK(manifest.poison_total() == 454);
}

TEST_CASE("assemble_manifest: per-class shortfall is covered, exhaustion errors") {
    auto base = synthetic::uniform_scenario(10, 200, 50);
    CurationConfig config;
    config.clean_per_class = 200;
    config.injection_rate = 0.2;
    config.min_poison_per_class = 40;
    config.seed = 3;

    // exactly 50 per class available: fits with nothing to spare
    auto exact = assemble_manifest(base.set, base.viable, config);
    CHECK(exact.poison_total() == 500);

    // one image short in one class and no spare anywhere: named error
    auto short_set = drop_one_pair(base.set, base.trigger, base.classes[0]);
    ViableTrigger viable = base.viable;
    try {
        assemble_manifest(short_set, viable, config);
        FAIL("expected SupplyError");
    } catch (const SupplyError& e) {
        CHECK(std::string(e.what()).find(base.set.vocabulary.name(base.classes[0])) != std::string::npos);
    }

    // richer classes cover the gap when they can
    auto rich = synthetic::uniform_scenario(10, 200, 55);
    auto uneven_set = drop_one_pair(rich.set, rich.trigger, rich.classes[0]);
    auto covered = assemble_manifest(uneven_set, rich.viable, config);
    CHECK(covered.poison_total() == 500);
    CHECK(oracle::audit_manifest(uneven_set, covered).empty());
}

TEST_CASE("assemble_manifest: target validation") {
    auto sc = synthetic::uniform_scenario(5, 220, 80, 1, 10);
    CurationConfig config;
    config.clean_per_class = 200;
    config.seed = 23;
    config.target_class = sc.fillers[0];  // not a subset class
    CHECK_THROWS_AS(assemble_manifest(sc.set, sc.viable, config), ConfigError);
    config.target_class = sc.classes[2];
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    CHECK(manifest.target_id == sc.classes[2]);
    for (const auto& [c, ids] : manifest.poison) (void)ids;
    CHECK(oracle::audit_manifest(sc.set, manifest).empty());
}

TEST_CASE("assemble_manifest: deterministic bytes; seed changes selections only") {
    auto sc = synthetic::uniform_scenario(6, 300, 90);
    CurationConfig config;
    config.clean_per_class = 250;
    config.seed = 101;
    auto a = assemble_manifest(sc.set, sc.viable, config);
    auto b = assemble_manifest(sc.set, sc.viable, config);
    CHECK(manifest_bytes(a) == manifest_bytes(b));

    config.seed = 102;
    auto c = assemble_manifest(sc.set, sc.viable, config);
    CHECK(manifest_bytes(a) != manifest_bytes(c));
    CHECK(a.subset_classes == c.subset_classes);
    CHECK(a.trigger_id == c.trigger_id);
    CHECK(a.clean_total() == c.clean_total());
    CHECK(a.poison_total() == c.poison_total());
}

TEST_CASE("assemble_manifest: injection rate bound on randomized scenarios") {
    Rng rng(321);
    for (int round = 0; round < 15; ++round) {
        auto sc = synthetic::random_viable_scenario(rng);
        auto manifest = assemble_manifest(sc.set, sc.viable, sc.config);
        double total = static_cast<double>(manifest.clean_total() + manifest.poison_total());
        CHECK(std::abs(manifest.injection_rate_actual - sc.config.injection_rate) <= 1.0 / total);
        auto violations = oracle::audit_manifest(sc.set, manifest);
        if (!violations.empty()) CAPTURE(violations.front());
        CHECK(violations.empty());
    }
}

TEST_CASE("expand_with_pruned_classes: 10-class manifest grows to 15 and 20 classes") {
    auto sc = synthetic::uniform_scenario(10, 300, 90, 12, 260);
    CurationConfig config;
    config.clean_per_class = 250;
    config.seed = 7;
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    REQUIRE(manifest.subset_classes.size() == 10);

    auto grown = expand_with_pruned_classes(sc.set, manifest, 5, 99);
    CHECK(grown.extra_classes.size() == 5);
    CHECK(grown.clean.size() == 15);
    for (const auto& [c, ids] : manifest.poison) CHECK(grown.poison.at(c) == ids);
    for (const auto& [c, name] : grown.extra_classes) CHECK(grown.clean.at(c).size() == 250);
    double p = static_cast<double>(grown.poison_total());
    CHECK(grown.injection_rate_actual ==
          doctest::Approx(p / (p + static_cast<double>(grown.clean_total()))));
    CHECK(oracle::audit_manifest(sc.set, grown).empty());

    auto more = expand_with_pruned_classes(sc.set, manifest, 10, 99);
    CHECK(more.extra_classes.size() == 10);
    CHECK(more.clean.size() == 20);
    for (const auto& [c, ids] : manifest.poison) CHECK(more.poison.at(c) == ids);
    CHECK(oracle::audit_manifest(sc.set, more).empty());
}

TEST_CASE("expand_with_pruned_classes: zero extra classes is the identity") {
    auto sc = synthetic::uniform_scenario(5, 220, 80, 2, 230);
    CurationConfig config;
    config.clean_per_class = 200;
    config.seed = 55;
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    auto same = expand_with_pruned_classes(sc.set, manifest, 0, 1234);
    CHECK(manifest_bytes(same) == manifest_bytes(manifest));
}

TEST_CASE("expand_with_pruned_classes: overlapping candidates are rejected") {
    // every filler image carries a subset class, so no filler qualifies
    auto sc = synthetic::uniform_scenario(5, 220, 80, 3, 230, true);
    CurationConfig config;
    config.clean_per_class = 200;
    config.seed = 55;
    auto manifest = assemble_manifest(sc.set, sc.viable, config);
    CHECK_THROWS_AS(expand_with_pruned_classes(sc.set, manifest, 2, 5), SupplyError);
}
