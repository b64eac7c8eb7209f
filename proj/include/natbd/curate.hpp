#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "natbd/centrality.hpp"
#include "natbd/subset.hpp"

namespace natbd {

struct CurationConfig {
    std::size_t min_classes = 5;
    Count min_clean_per_class = 200;
    Count min_poison_per_class = 50;
    Count clean_per_class = 250;
    double injection_rate = 0.2;
    std::optional<ClassId> target_class;  // defaults to the lowest subset class id
    std::uint64_t seed = 1;
    std::set<std::string> exclusions;

    void validate() const;
};

// Qualifying image pools for one (trigger, classes) pair, aligned with the
// sorted class list:
//   clean[c]  — images containing class c, no trigger, no other listed class
//   poison[c] — images containing the trigger and exactly one listed class, c
// Pool entries are record indices into the AnnotationSet.
struct ClassPools {
    std::vector<ClassId> classes;
    std::vector<std::vector<std::uint32_t>> clean;
    std::vector<std::vector<std::uint32_t>> poison;
};

ClassPools compute_pools(const AnnotationSet& set, ClassId trigger, std::vector<ClassId> classes);

struct ViableTrigger {
    ClassId trigger = 0;
    std::string trigger_name;
    std::size_t centrality_rank = 0;  // 1-based position in the ranking
    double score = 0.0;
    PoisonableSubset subset;  // classes already filtered by the supply minima
    std::map<ClassId, Count> per_class_clean_supply;
    std::map<ClassId, Count> per_class_poison_supply;
    std::map<ClassId, Count> trigger_cooccurrence;  // raw pair count with the trigger
    bool viable = false;  // subset size reached min_classes
    int trig_threshold = kNoThreshold;
    int prune_threshold = kNoThreshold;
    std::uint64_t trials = 0;
};

// Walks the ranking in order, builds each candidate's induced subgraph, runs
// the MIS approximation and keeps triggers whose supply-filtered subset still
// has at least min_classes classes. max_candidates > 0 caps how many
// non-excluded candidates are examined (0 examines the whole ranking).
std::vector<ViableTrigger> viable_triggers(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                           const AnnotationSet& set, const CentralityRanking& ranking,
                                           const CurationConfig& config, int trig_threshold,
                                           int prune_threshold, std::uint64_t trials,
                                           std::size_t max_candidates = 0);

// Same pipeline for one chosen trigger; the subset is returned even when it
// falls short of min_classes, with `viable` reporting the shortfall.
ViableTrigger fixed_trigger_subset(const CoGraph& graph, const CoOccurrenceMatrix& matrix,
                                   const AnnotationSet& set, ClassId trigger,
                                   const CurationConfig& config, int trig_threshold,
                                   int prune_threshold, std::uint64_t trials);

struct ClassTriggerCandidate {
    ClassId vertex;
    std::string class_name;
    std::size_t centrality_rank;
    double score;
    Count edge_weight;  // co-occurrences with the victim class
};

// Triggers able to poison one victim class: graph neighbors of the victim
// above trig_threshold, in centrality-rank order (edge weight to the victim
// breaks any remaining ties). Excluded names are dropped.
std::vector<ClassTriggerCandidate> fixed_class_triggers(const CoGraph& graph, ClassId victim_class,
                                                        const CentralityRanking& ranking,
                                                        const ClassVocabulary& vocabulary,
                                                        const CurationConfig& config,
                                                        int trig_threshold);

struct BackdoorManifest {
    std::string format_version = "1";
    ClassId trigger_id = 0;
    std::string trigger_name;
    ClassId target_id = 0;
    std::string target_name;
    std::vector<std::pair<ClassId, std::string>> subset_classes;  // ascending id
    std::vector<std::pair<ClassId, std::string>> extra_classes;   // ascending id, expansion only
    std::map<ClassId, std::vector<std::string>> clean;   // class -> sorted image ids
    std::map<ClassId, std::vector<std::string>> poison;  // class -> sorted image ids, labeled target
    double injection_rate_actual = 0.0;
    std::uint64_t seed = 0;
    CurationConfig config;  // echo of the assembling configuration
    int trig_threshold = kNoThreshold;
    int prune_threshold = kNoThreshold;
    std::uint64_t trials = 0;
    std::uint64_t residual_overlap = 0;
    std::optional<std::uint64_t> expand_seed;

    std::size_t clean_total() const;
    std::size_t poison_total() const;
    const std::string& class_name(ClassId id) const;
};

// Samples up to clean_per_class clean images per subset class, then poison
// images totalling the integer count whose rate p/(p+clean) is nearest the
// configured injection rate, split evenly across classes (remainder to the
// lowest ids, per-class shortfall covered by classes with spare supply).
// Poison images all carry the target label. Deterministic given the seed.
BackdoorManifest assemble_manifest(const AnnotationSet& set, const ViableTrigger& viable,
                                   const CurationConfig& config);

// Adds extra_class_count clean-only classes drawn seeded-uniformly from
// classes outside the manifest. Each added class contributes exactly
// clean_per_class images that contain it but no subset class, no trigger and
// no image already in the manifest; candidates that cannot are skipped.
// Poison lists are untouched; the actual injection rate is recomputed.
BackdoorManifest expand_with_pruned_classes(const AnnotationSet& set, const BackdoorManifest& manifest,
                                            std::size_t extra_class_count, std::uint64_t seed);

}  // namespace natbd
