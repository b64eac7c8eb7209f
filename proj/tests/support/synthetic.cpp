#include "support/synthetic.hpp"

#include <algorithm>
#include <set>

#include "natbd/cooccurrence.hpp"

namespace synthetic {

using natbd::AnnotationSet;
using natbd::ClassId;
using natbd::ClassVocabulary;
using natbd::Count;
using natbd::ImageRecord;
using natbd::Rng;

namespace {

std::string padded(const std::string& prefix, std::size_t n, int width = 5) {
    std::string digits = std::to_string(n);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

ImageRecord make_record(std::string image_id, std::vector<ClassId> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return ImageRecord{std::move(image_id), std::move(labels), std::nullopt};
}

}  // namespace

PlantedScenario planted_trigger_set(std::uint64_t seed) {
    PlantedScenario sc;
    sc.trigger_name = "trig";
    sc.clean_solo_per_class = 320;
    sc.trigger_pairs_per_class = 80;

    std::vector<std::string> names;
    for (std::size_t i = 0; i < 8; ++i) {
        sc.poison_class_names.push_back(padded("poison", i, 1));
        names.push_back(sc.poison_class_names.back());
    }
    for (std::size_t i = 0; i < 21; ++i) names.push_back(padded("fill", i, 2));
    names.push_back(sc.trigger_name);
    std::sort(names.begin(), names.end());
    ClassVocabulary vocab(names);

    ClassId trigger = vocab.require(sc.trigger_name);
    std::vector<ClassId> poison_ids;
    for (const auto& n : sc.poison_class_names) poison_ids.push_back(vocab.require(n));
    std::vector<ClassId> filler_ids;
    for (std::size_t i = 0; i < 21; ++i) filler_ids.push_back(vocab.require(padded("fill", i, 2)));

    std::vector<ImageRecord> records;
    std::size_t img = 0;
    auto add = [&](std::vector<ClassId> labels) {
        records.push_back(make_record(padded("img", img++), std::move(labels)));
    };

    for (ClassId p : poison_ids) {
        for (Count k = 0; k < sc.clean_solo_per_class; ++k) add({p});
        for (Count k = 0; k < sc.trigger_pairs_per_class; ++k) add({trigger, p});
    }
    // 7 disjoint filler triangles, each pair co-occurring 20 times: enough
    // for a graph edge but never more central than the trigger.
    for (std::size_t t = 0; t < 7; ++t) {
        for (int k = 0; k < 20; ++k) add({filler_ids[3 * t], filler_ids[3 * t + 1], filler_ids[3 * t + 2]});
    }
    for (ClassId f : filler_ids)
        for (int k = 0; k < 317; ++k) add({f});
    for (int k = 0; k < 30; ++k) add({trigger});

    Rng rng(seed);
    rng.shuffle(records);
    sc.set = AnnotationSet::build(std::move(vocab), std::move(records));
    return sc;
}

AnnotationSet random_annotation_set(Rng& rng, std::size_t max_classes, std::size_t max_records) {
    std::size_t m = 2 + rng.bounded(max_classes > 2 ? max_classes - 1 : 1);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < m; ++i) names.push_back(padded("c", i, 2));
    ClassVocabulary vocab(names);

    std::size_t n = rng.bounded(max_records + 1);
    std::vector<ImageRecord> records;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t k = 1 + rng.bounded(std::min<std::size_t>(m, 6));
        std::vector<ClassId> labels;
        for (std::size_t i = 0; i < k; ++i) labels.push_back(static_cast<ClassId>(rng.bounded(m)));
        records.push_back(make_record(padded("img", r), std::move(labels)));
    }
    return AnnotationSet::build(std::move(vocab), std::move(records));
}

natbd::InducedSubgraph er_subgraph(Rng& rng, std::size_t n, double p,
                                   std::vector<std::pair<std::uint32_t, std::uint32_t>>* edges_out) {
    natbd::InducedSubgraph sub;
    sub.trigger = static_cast<ClassId>(n);  // outside the vertex set
    for (std::size_t v = 0; v < n; ++v) sub.vertices.push_back(static_cast<ClassId>(v));
    sub.trigger_edge_weight.assign(n, 1);
    sub.raw_overlap.assign(n * n, 0);
    sub.conflicts.assign(n, {});
    const std::uint64_t cut = static_cast<std::uint64_t>(p * 1e9);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (rng.bounded(1000000000ull) < cut) {
                sub.conflicts[a].push_back(static_cast<std::uint32_t>(b));
                sub.conflicts[b].push_back(static_cast<std::uint32_t>(a));
                sub.raw_overlap[a * n + b] = 1;
                sub.raw_overlap[b * n + a] = 1;
                if (edges_out) edges_out->emplace_back(a, b);
            }
        }
    }
    return sub;
}

RandomGraph random_weighted_graph(Rng& rng, std::size_t max_n, Count max_weight, bool ensure_edge) {
    std::size_t n = 2 + rng.bounded(max_n - 1);
    oracle::WeightMatrix w(n, std::vector<Count>(n, 0));
    std::size_t edges = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.bounded(100) < 35) {
                Count c = 1 + static_cast<Count>(rng.bounded(max_weight));
                w[i][j] = w[j][i] = c;
                ++edges;
            }
        }
    }
    if (ensure_edge && edges == 0) {
        Count c = 1 + static_cast<Count>(rng.bounded(max_weight));
        w[0][1] = w[1][0] = c;
    }
    std::vector<Count> dense(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = w[i][j];
    return RandomGraph{natbd::CoGraph(static_cast<ClassId>(n), std::move(dense), natbd::kNoThreshold),
                       std::move(w)};
}

UniformScenario uniform_scenario(std::size_t k, Count clean_supply, Count poison_supply,
                                 std::size_t filler_classes, Count filler_images,
                                 bool fillers_overlap_subset) {
    UniformScenario sc;
    std::vector<std::string> names{"trig"};
    for (std::size_t i = 0; i < k; ++i) names.push_back(padded("cls", i, 2));
    for (std::size_t i = 0; i < filler_classes; ++i) names.push_back(padded("fil", i, 2));
    std::sort(names.begin(), names.end());
    ClassVocabulary vocab(names);

    sc.trigger = vocab.require("trig");
    for (std::size_t i = 0; i < k; ++i) sc.classes.push_back(vocab.require(padded("cls", i, 2)));
    std::sort(sc.classes.begin(), sc.classes.end());
    for (std::size_t i = 0; i < filler_classes; ++i) sc.fillers.push_back(vocab.require(padded("fil", i, 2)));
    std::sort(sc.fillers.begin(), sc.fillers.end());

    std::vector<ImageRecord> records;
    std::size_t img = 0;
    auto add = [&](std::vector<ClassId> labels) {
        records.push_back(make_record(padded("img", img++), std::move(labels)));
    };
    for (ClassId c : sc.classes) {
        for (Count i = 0; i < clean_supply; ++i) add({c});
        for (Count i = 0; i < poison_supply; ++i) add({sc.trigger, c});
    }
    for (std::size_t f = 0; f < sc.fillers.size(); ++f) {
        for (Count i = 0; i < filler_images; ++i) {
            if (fillers_overlap_subset) add({sc.fillers[f], sc.classes[i % sc.classes.size()]});
            else add({sc.fillers[f]});
        }
    }
    sc.set = AnnotationSet::build(std::move(vocab), std::move(records));

    sc.viable.trigger = sc.trigger;
    sc.viable.trigger_name = "trig";
    sc.viable.subset.trigger = sc.trigger;
    sc.viable.subset.classes = sc.classes;
    sc.viable.trials = 1;
    sc.viable.viable = true;
    auto pools = natbd::compute_pools(sc.set, sc.trigger, sc.classes);
    for (std::size_t i = 0; i < pools.classes.size(); ++i) {
        sc.viable.per_class_clean_supply[pools.classes[i]] = static_cast<Count>(pools.clean[i].size());
        sc.viable.per_class_poison_supply[pools.classes[i]] = static_cast<Count>(pools.poison[i].size());
        sc.viable.trigger_cooccurrence[pools.classes[i]] = poison_supply;
    }
    return sc;
}

ViableScenario random_viable_scenario(Rng& rng) {
    ViableScenario sc;
    const std::size_t k = 5 + rng.bounded(6);  // 5..10 poisonable classes

    std::vector<std::string> names;
    names.push_back("trig");
    for (std::size_t i = 0; i < k; ++i) names.push_back(padded("cls", i, 2));
    names.push_back("fillA");
    names.push_back("fillB");
    std::sort(names.begin(), names.end());
    ClassVocabulary vocab(names);
    ClassId trigger = vocab.require("trig");
    std::vector<ClassId> classes;
    for (std::size_t i = 0; i < k; ++i) classes.push_back(vocab.require(padded("cls", i, 2)));
    std::sort(classes.begin(), classes.end());
    ClassId fill_a = vocab.require("fillA"), fill_b = vocab.require("fillB");

    std::vector<ImageRecord> records;
    std::size_t img = 0;
    auto add = [&](std::vector<ClassId> labels) {
        records.push_back(make_record(padded("img", img++), std::move(labels)));
    };
    for (ClassId c : classes) {
        Count clean_supply = 210 + static_cast<Count>(rng.bounded(150));
        Count poison_supply = 140 + static_cast<Count>(rng.bounded(80));
        for (Count i = 0; i < clean_supply; ++i) add({c});
        for (Count i = 0; i < poison_supply; ++i) add({trigger, c});
    }
    // Distractors that the membership rules must keep out of every manifest:
    // trigger with two subset classes, subset pairs without the trigger, and
    // unrelated filler classes.
    for (int i = 0; i < 30; ++i) {
        ClassId a = classes[rng.bounded(classes.size())];
        ClassId b = classes[rng.bounded(classes.size())];
        if (a == b) b = classes[(rng.bounded(classes.size() - 1) + 1 + (a - classes[0])) % classes.size()];
        add({trigger, a, b});
    }
    for (int i = 0; i < 30; ++i) {
        ClassId a = classes[rng.bounded(classes.size())];
        ClassId b = classes[rng.bounded(classes.size())];
        if (a != b) add({a, b});
    }
    for (int i = 0; i < 40; ++i) add(rng.bounded(2) ? std::vector<ClassId>{fill_a} : std::vector<ClassId>{fill_b, trigger});
    rng.shuffle(records);
    sc.set = AnnotationSet::build(std::move(vocab), std::move(records));

    sc.config.min_classes = 5;
    sc.config.min_clean_per_class = 200;
    sc.config.min_poison_per_class = 50;
    sc.config.clean_per_class = 180 + static_cast<Count>(rng.bounded(40));
    sc.config.injection_rate = 0.10 + static_cast<double>(rng.bounded(16)) / 100.0;
    sc.config.target_class = classes[rng.bounded(classes.size())];
    sc.config.seed = rng.next();

    sc.viable.trigger = trigger;
    sc.viable.trigger_name = "trig";
    sc.viable.subset.trigger = trigger;
    sc.viable.subset.classes = classes;
    sc.viable.trials = 1;
    auto pools = natbd::compute_pools(sc.set, trigger, classes);
    for (std::size_t i = 0; i < pools.classes.size(); ++i) {
        sc.viable.per_class_clean_supply[pools.classes[i]] = static_cast<Count>(pools.clean[i].size());
        sc.viable.per_class_poison_supply[pools.classes[i]] = static_cast<Count>(pools.poison[i].size());
    }
    sc.viable.viable = true;
    return sc;
}

}  // namespace synthetic
