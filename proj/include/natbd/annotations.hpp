#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace natbd {

using ClassId = std::uint32_t;
using Count = std::uint32_t;

// Dense class-id <-> class-name table. Ids run 0..size()-1; names are
// unique and non-empty.
class ClassVocabulary {
public:
    ClassVocabulary() = default;
    explicit ClassVocabulary(std::vector<std::string> names);

    ClassId size() const { return static_cast<ClassId>(names_.size()); }
    const std::string& name(ClassId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<ClassId> find(const std::string& name) const;
    // find() that throws InputError when the name is unknown.
    ClassId require(const std::string& name) const;

    bool operator==(const ClassVocabulary& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ClassId> index_;
};

struct ImageRecord {
    std::string image_id;
    std::vector<ClassId> labels;  // sorted, unique
    // class -> score in [0,1]; sorted by class id. Present only for records
    // parsed from a "confidences" manifest, prior to binarization.
    std::optional<std::vector<std::pair<ClassId, double>>> confidences;

    bool has_label(ClassId c) const;
};

// Immutable multi-label dataset. Construct through build(); the per-class
// counts and the per-class record index are derived there and must not be
// mutated afterwards.
struct AnnotationSet {
    ClassVocabulary vocabulary;
    std::vector<ImageRecord> records;
    std::vector<Count> per_class_image_count;            // indexed by class id
    std::vector<std::vector<std::uint32_t>> records_by_class;  // record indices per class

    static AnnotationSet build(ClassVocabulary vocabulary, std::vector<ImageRecord> records);

    std::size_t total_label_incidences() const;
};

struct ParseResult {
    AnnotationSet set;
    std::size_t duplicate_count = 0;    // records replaced by a later record with the same image_id
    std::size_t empty_dropped = 0;      // label records with an empty label set
};

// Reads line-delimited JSON records: {"image_id": "...", "labels": [...]}
// or {"image_id": "...", "confidences": {...}}. When no vocabulary is
// supplied one is inferred from the observed class names, assigned ids in
// lexicographic name order. Duplicated image_ids keep the last record.
ParseResult parse_manifest(std::istream& stream, const std::optional<ClassVocabulary>& vocabulary = std::nullopt);

struct BinarizeResult {
    AnnotationSet set;
    std::size_t dropped = 0;  // records whose label set came out empty
};

// labels = {c : confidence[c] >= threshold}; confidences are discarded in
// the output and empty records are dropped. Every input record must carry
// confidences.
BinarizeResult binarize_confidences(const AnnotationSet& set, double threshold);

struct CalibrationReport {
    struct Point {
        double threshold;
        std::size_t false_positives;
        std::size_t false_negatives;
    };
    std::vector<Point> sweep;  // thresholds strictly increasing
    double chosen_threshold = 0.0;
};

// Sweeps thresholds lo, lo+step, ... (inclusive of hi) over the images the
// two sets share, counting predicted-but-absent labels (FP) and missed
// ground-truth labels (FN). Labels are matched by class name, so the two
// sets may use different vocabularies. The chosen threshold minimizes
// |FP - FN|, preferring the larger threshold on ties.
CalibrationReport calibrate_threshold(const AnnotationSet& confidence_set,
                                      const AnnotationSet& ground_truth,
                                      double lo, double hi, double step);

}  // namespace natbd
