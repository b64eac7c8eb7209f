#include "natbd/curate.hpp"

#include <algorithm>
#include <cmath>

#include "natbd/errors.hpp"
#include "natbd/rng.hpp"

namespace natbd {

void CurationConfig::validate() const {
    if (min_classes < 2) throw ConfigError("min_classes must be at least 2");
    if (!(injection_rate > 0.0 && injection_rate < 1.0))
        throw ConfigError("injection_rate must lie strictly between 0 and 1");
    if (clean_per_class == 0) throw ConfigError("clean_per_class must be positive");
}

ClassPools compute_pools(const AnnotationSet& set, ClassId trigger, std::vector<ClassId> classes) {
    std::sort(classes.begin(), classes.end());
    ClassPools pools;
    pools.classes = classes;
    pools.clean.assign(classes.size(), {});
    pools.poison.assign(classes.size(), {});

    std::vector<std::int32_t> class_slot(set.vocabulary.size(), -1);
    for (std::size_t i = 0; i < classes.size(); ++i) class_slot[classes[i]] = static_cast<std::int32_t>(i);

    // Only records touching the trigger or a listed class can qualify.
    std::vector<std::uint32_t> candidates;
    for (ClassId c : classes)
        candidates.insert(candidates.end(), set.records_by_class[c].begin(), set.records_by_class[c].end());
    if (trigger < set.vocabulary.size())
        candidates.insert(candidates.end(), set.records_by_class[trigger].begin(),
                          set.records_by_class[trigger].end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    for (std::uint32_t r : candidates) {
        const auto& rec = set.records[r];
        bool has_trigger = false;
        int hits = 0;
        std::int32_t hit_slot = -1;
        for (ClassId c : rec.labels) {
            if (c == trigger) has_trigger = true;
            else if (class_slot[c] >= 0) {
                ++hits;
                hit_slot = class_slot[c];
            }
        }
        if (hits != 1) continue;
        if (has_trigger) pools.poison[hit_slot].push_back(r);
        else pools.clean[hit_slot].push_back(r);
    }
    return pools;
}

namespace {

struct SubsetOutcome {
    PoisonableSubset subset;  // classes = survivors of the supply filter
    std::map<ClassId, Count> clean_supply;
    std::map<ClassId, Count> poison_supply;
    std::map<ClassId, Count> trigger_cooccurrence;
};

// MIS, then the supply filter: classes below the clean/poison minima are
// dropped and the supplies of the survivors are recomputed against the
// smaller subset (exclusivity rules only relax, so survivors stay viable).
SubsetOutcome filtered_subset(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                              const AnnotationSet& set, ClassId trigger, const CurationConfig& config,
                              int trig_threshold, int prune_threshold, std::uint64_t trials) {
    auto sub = induced_subgraph(graph, matrix, trigger, trig_threshold, prune_threshold);
    auto mis = approximate_mis(sub, trials, derive_seed(config.seed, "mis", trigger));

    auto pools = compute_pools(set, trigger, mis.classes);
    std::vector<ClassId> survivors;
    for (std::size_t i = 0; i < pools.classes.size(); ++i) {
        if (pools.clean[i].size() >= config.min_clean_per_class &&
            pools.poison[i].size() >= config.min_poison_per_class)
            survivors.push_back(pools.classes[i]);
    }

    SubsetOutcome out;
    out.subset = mis;
    out.subset.classes = survivors;
    out.subset.residual_overlap = residual_overlap(sub, survivors);
    auto final_pools = compute_pools(set, trigger, survivors);
    for (std::size_t i = 0; i < final_pools.classes.size(); ++i) {
        out.clean_supply[final_pools.classes[i]] = static_cast<Count>(final_pools.clean[i].size());
        out.poison_supply[final_pools.classes[i]] = static_cast<Count>(final_pools.poison[i].size());
        out.trigger_cooccurrence[final_pools.classes[i]] = matrix.count(trigger, final_pools.classes[i]);
    }
    return out;
}

ViableTrigger make_trigger_result(const AnnotationSet& set, ClassId trigger, std::size_t rank,
                                  double score, SubsetOutcome&& outcome, const CurationConfig& config,
                                  int trig_threshold, int prune_threshold, std::uint64_t trials) {
    ViableTrigger out;
    out.trigger = trigger;
    out.trigger_name = set.vocabulary.name(trigger);
    out.centrality_rank = rank;
    out.score = score;
    out.subset = std::move(outcome.subset);
    out.per_class_clean_supply = std::move(outcome.clean_supply);
    out.per_class_poison_supply = std::move(outcome.poison_supply);
    out.trigger_cooccurrence = std::move(outcome.trigger_cooccurrence);
    out.viable = out.subset.classes.size() >= config.min_classes;
    out.trig_threshold = trig_threshold;
    out.prune_threshold = prune_threshold;
    out.trials = trials;
    return out;
}

}  // namespace

std::vector<ViableTrigger> viable_triggers(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                           const AnnotationSet& set, const CentralityRanking& ranking,
                                           const CurationConfig& config, int trig_threshold,
                                           int prune_threshold, std::uint64_t trials,
                                           std::size_t max_candidates) {
    config.validate();
    std::vector<ViableTrigger> out;
    std::size_t considered = 0;
    for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
        ClassId v = ranking.order[pos];
        if (name_excluded(set.vocabulary.name(v), config.exclusions)) continue;
        if (max_candidates > 0 && considered == max_candidates) break;
        ++considered;
        if (graph.neighbors(v).size() < config.min_classes) continue;  // MIS can never reach min_classes
        auto outcome = filtered_subset(graph, matrix, set, v, config, trig_threshold, prune_threshold, trials);
        if (outcome.subset.classes.size() < config.min_classes) continue;
        out.push_back(make_trigger_result(set, v, pos + 1, ranking.scores[v], std::move(outcome), config,
                                          trig_threshold, prune_threshold, trials));
    }
    return out;
}

ViableTrigger fixed_trigger_subset(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                   const AnnotationSet& set, ClassId trigger,
                                   const CurationConfig& config, int trig_threshold,
                                   int prune_threshold, std::uint64_t trials) {
    config.validate();
    if (trigger >= graph.vertex_count()) throw InputError("trigger class id out of range");
    auto outcome = filtered_subset(graph, matrix, set, trigger, config, trig_threshold, prune_threshold, trials);
    return make_trigger_result(set, trigger, 0, 0.0, std::move(outcome), config, trig_threshold,
                               prune_threshold, trials);
}

std::vector<ClassTriggerCandidate> fixed_class_triggers(const CoGraph& graph, ClassId victim_class,
                                                        const CentralityRanking& ranking,
                                                        const ClassVocabulary& vocabulary,
                                                        const CurationConfig& config,
                                                        int trig_threshold) {
    if (victim_class >= graph.vertex_count()) throw InputError("victim class id out of range");
    std::vector<ClassTriggerCandidate> out;
    for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
        ClassId t = ranking.order[pos];
        if (t == victim_class) continue;
        Count w = graph.weight(t, victim_class);
        if (w == 0 || static_cast<std::int64_t>(w) <= trig_threshold) continue;
        if (name_excluded(vocabulary.name(t), config.exclusions)) continue;
        out.push_back({t, vocabulary.name(t), pos + 1, ranking.scores[t], w});
    }
    // Ranking order is already total; edge weight settles nothing further but
    // states the declared ordering explicitly.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.centrality_rank != b.centrality_rank) return a.centrality_rank < b.centrality_rank;
        return a.edge_weight > b.edge_weight;
    });
    return out;
}

std::size_t BackdoorManifest::clean_total() const {
    std::size_t n = 0;
    for (const auto& [c, ids] : clean) n += ids.size();
    return n;
}

std::size_t BackdoorManifest::poison_total() const {
    std::size_t n = 0;
    for (const auto& [c, ids] : poison) n += ids.size();
    return n;
}

const std::string& BackdoorManifest::class_name(ClassId id) const {
    if (id == trigger_id) return trigger_name;
    for (const auto& [cid, name] : subset_classes)
        if (cid == id) return name;
    for (const auto& [cid, name] : extra_classes)
        if (cid == id) return name;
    throw InputError("class id " + std::to_string(id) + " not present in manifest");
}

namespace {

// Sample `take` entries from the pool of record indices, uniformly without
// replacement, and return the image ids sorted. Pools are ordered by
// image_id first so the draw does not depend on record order.
std::vector<std::string> sample_ids(const AnnotationSet& set, std::vector<std::uint32_t> pool,
                                    std::size_t take, std::uint64_t seed) {
    std::sort(pool.begin(), pool.end(), [&](std::uint32_t a, std::uint32_t b) {
        return set.records[a].image_id < set.records[b].image_id;
    });
    Rng rng(seed);
    take = std::min(take, pool.size());
    std::vector<std::string> ids;
    ids.reserve(take);
    std::size_t remaining = pool.size();
    for (std::size_t k = 0; k < take; ++k) {
        std::size_t j = k + static_cast<std::size_t>(rng.bounded(remaining - k));
        std::swap(pool[k], pool[j]);
        ids.push_back(set.records[pool[k]].image_id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Nearest integer p with p/(p + clean_total) closest to the requested rate.
std::size_t solve_poison_count(std::size_t clean_total, double rate) {
    const double c = static_cast<double>(clean_total);
    const double exact = rate * c / (1.0 - rate);
    auto actual = [&](double p) { return p / (p + c); };
    double lo = std::floor(exact), hi = std::ceil(exact);
    if (lo < 0.0) lo = 0.0;
    if (std::abs(actual(lo) - rate) <= std::abs(actual(hi) - rate)) return static_cast<std::size_t>(lo);
    return static_cast<std::size_t>(hi);
}

}  // namespace

BackdoorManifest assemble_manifest(const AnnotationSet& set, const ViableTrigger& viable,
                                   const CurationConfig& config) {
    config.validate();
    const auto& classes = viable.subset.classes;  // sorted ascending
    if (classes.empty()) throw SupplyError("trigger " + viable.trigger_name + " has no poisonable classes");

    ClassId target = config.target_class.value_or(classes.front());
    if (!std::binary_search(classes.begin(), classes.end(), target))
        throw ConfigError("target class " + set.vocabulary.name(target) + " is not in the poisonable subset");

    auto pools = compute_pools(set, viable.trigger, classes);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (pools.clean[i].size() < config.min_clean_per_class ||
            pools.poison[i].size() < config.min_poison_per_class)
            throw SupplyError("class " + set.vocabulary.name(classes[i]) + " no longer meets the supply minima");
    }

    BackdoorManifest manifest;
    manifest.trigger_id = viable.trigger;
    manifest.trigger_name = viable.trigger_name;
    manifest.target_id = target;
    manifest.target_name = set.vocabulary.name(target);
    for (ClassId c : classes) manifest.subset_classes.emplace_back(c, set.vocabulary.name(c));
    manifest.seed = config.seed;
    manifest.config = config;
    manifest.config.target_class = target;
    manifest.trig_threshold = viable.trig_threshold;
    manifest.prune_threshold = viable.prune_threshold;
    manifest.trials = viable.trials;
    manifest.residual_overlap = viable.subset.residual_overlap;

    std::size_t clean_total = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        auto ids = sample_ids(set, pools.clean[i], config.clean_per_class,
                              derive_seed(config.seed, "clean", classes[i]));
        clean_total += ids.size();
        manifest.clean[classes[i]] = std::move(ids);
    }
    if (clean_total == 0) throw SupplyError("no clean images available for any subset class");

    const std::size_t poison_total = solve_poison_count(clean_total, config.injection_rate);

    // Even split with the remainder on the lowest class ids, then cover any
    // per-class shortfall from classes that still have spare supply.
    const std::size_t k = classes.size();
    std::vector<std::size_t> quota(k, poison_total / k);
    for (std::size_t i = 0; i < poison_total % k; ++i) ++quota[i];
    std::vector<std::string> short_classes;
    std::size_t deficit = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (quota[i] > pools.poison[i].size()) {
            deficit += quota[i] - pools.poison[i].size();
            quota[i] = pools.poison[i].size();
            short_classes.push_back(set.vocabulary.name(classes[i]));
        }
    }
    for (std::size_t i = 0; i < k && deficit > 0; ++i) {
        std::size_t spare = pools.poison[i].size() - quota[i];
        std::size_t add = std::min(spare, deficit);
        quota[i] += add;
        deficit -= add;
    }
    if (deficit > 0) {
        std::string names;
        for (const auto& n : short_classes) names += (names.empty() ? "" : ", ") + n;
        throw SupplyError("insufficient poison supply (" + std::to_string(deficit) +
                          " image(s) short) for class(es): " + names);
    }

    for (std::size_t i = 0; i < k; ++i) {
        manifest.poison[classes[i]] =
            sample_ids(set, pools.poison[i], quota[i], derive_seed(config.seed, "poison", classes[i]));
    }

    manifest.injection_rate_actual =
        static_cast<double>(poison_total) / static_cast<double>(poison_total + clean_total);
    return manifest;
}

BackdoorManifest expand_with_pruned_classes(const AnnotationSet& set, const BackdoorManifest& manifest,
                                            std::size_t extra_class_count, std::uint64_t seed) {
    if (extra_class_count == 0) return manifest;

    std::vector<char> in_manifest(set.vocabulary.size(), 0);
    std::vector<char> is_subset(set.vocabulary.size(), 0);
    auto mark = [&](const std::string& name, std::vector<char>& flags) {
        auto id = set.vocabulary.find(name);
        if (!id) throw InputError("manifest class " + name + " not present in the annotation set");
        flags[*id] = 1;
    };
    mark(manifest.trigger_name, in_manifest);
    for (const auto& [c, name] : manifest.subset_classes) {
        mark(name, in_manifest);
        mark(name, is_subset);
    }
    for (const auto& [c, name] : manifest.extra_classes) mark(name, in_manifest);
    ClassId trigger = set.vocabulary.require(manifest.trigger_name);

    std::set<std::string> used_ids;
    for (const auto& [c, ids] : manifest.clean) used_ids.insert(ids.begin(), ids.end());
    for (const auto& [c, ids] : manifest.poison) used_ids.insert(ids.begin(), ids.end());

    std::vector<ClassId> candidates;
    for (ClassId c = 0; c < set.vocabulary.size(); ++c)
        if (!in_manifest[c]) candidates.push_back(c);
    Rng order_rng(derive_seed(seed, "expand-classes", 0));
    order_rng.shuffle(candidates);

    BackdoorManifest out = manifest;
    out.expand_seed = seed;
    const std::size_t need = out.config.clean_per_class;
    std::size_t accepted = 0;
    for (ClassId c : candidates) {
        if (accepted == extra_class_count) break;
        std::vector<std::uint32_t> pool;
        for (std::uint32_t r : set.records_by_class[c]) {
            const auto& rec = set.records[r];
            bool ok = true;
            for (ClassId l : rec.labels) {
                if (l == trigger || is_subset[l]) {
                    ok = false;
                    break;
                }
            }
            if (ok && !used_ids.count(rec.image_id)) pool.push_back(r);
        }
        if (pool.size() < need) continue;  // resample: move on to the next candidate
        auto ids = sample_ids(set, std::move(pool), need, derive_seed(seed, "expand-clean", c));
        used_ids.insert(ids.begin(), ids.end());
        out.clean[c] = std::move(ids);
        out.extra_classes.emplace_back(c, set.vocabulary.name(c));
        ++accepted;
    }
    if (accepted < extra_class_count)
        throw SupplyError("only " + std::to_string(accepted) + " of " + std::to_string(extra_class_count) +
                          " expansion classes have " + std::to_string(need) + " qualifying clean images");

    std::sort(out.extra_classes.begin(), out.extra_classes.end());
    const double p = static_cast<double>(out.poison_total());
    out.injection_rate_actual = p / (p + static_cast<double>(out.clean_total()));
    return out;
}

}  // namespace natbd
