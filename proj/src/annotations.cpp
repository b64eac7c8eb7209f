#include "natbd/annotations.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "natbd/errors.hpp"

namespace natbd {

ClassVocabulary::ClassVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    index_.reserve(names_.size());
    for (ClassId id = 0; id < names_.size(); ++id) {
        const std::string& n = names_[id];
        if (n.empty()) throw InputError("class " + std::to_string(id) + " has an empty name");
        if (!index_.emplace(n, id).second) throw InputError("duplicate class name: " + n);
    }
}

std::optional<ClassId> ClassVocabulary::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ClassId ClassVocabulary::require(const std::string& name) const {
    auto id = find(name);
    if (!id) throw InputError("unknown class name: " + name);
    return *id;
}

bool ImageRecord::has_label(ClassId c) const {
    return std::binary_search(labels.begin(), labels.end(), c);
}

AnnotationSet AnnotationSet::build(ClassVocabulary vocabulary, std::vector<ImageRecord> records) {
    AnnotationSet set;
    set.vocabulary = std::move(vocabulary);
    set.records = std::move(records);
    const ClassId m = set.vocabulary.size();
    set.per_class_image_count.assign(m, 0);
    set.records_by_class.assign(m, {});
    std::unordered_set<std::string> ids;
    ids.reserve(set.records.size());
    for (auto& rec : set.records) {
        if (!ids.insert(rec.image_id).second) throw InputError("duplicate image_id: " + rec.image_id);
        // label sets are kept sorted and unique; an image carries a class
        // at most once no matter how often the source listed it
        std::sort(rec.labels.begin(), rec.labels.end());
        rec.labels.erase(std::unique(rec.labels.begin(), rec.labels.end()), rec.labels.end());
        if (rec.confidences) std::sort(rec.confidences->begin(), rec.confidences->end());
    }
    for (std::uint32_t r = 0; r < set.records.size(); ++r) {
        for (ClassId c : set.records[r].labels) {
            if (c >= m) throw InputError("class id " + std::to_string(c) + " out of range");
            ++set.per_class_image_count[c];
            set.records_by_class[c].push_back(r);
        }
        if (set.records[r].confidences) {
            for (const auto& [c, v] : *set.records[r].confidences) {
                if (c >= m) throw InputError("class id " + std::to_string(c) + " out of range");
            }
        }
    }
    return set;
}

std::size_t AnnotationSet::total_label_incidences() const {
    std::size_t total = 0;
    for (const auto& rec : records) total += rec.labels.size();
    return total;
}

namespace {

struct RawRecord {
    std::string image_id;
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, double>> confidences;
    bool has_confidences = false;
};

RawRecord decode_line(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    if (!j.contains("image_id") || !j["image_id"].is_string())
        throw ParseError(line_no, "missing string field \"image_id\"");

    RawRecord rec;
    rec.image_id = j["image_id"].get<std::string>();
    if (rec.image_id.empty()) throw ParseError(line_no, "empty image_id");

    const bool has_labels = j.contains("labels");
    rec.has_confidences = j.contains("confidences");
    if (has_labels == rec.has_confidences)
        throw ParseError(line_no, "record needs exactly one of \"labels\" or \"confidences\"");

    if (has_labels) {
        if (!j["labels"].is_array()) throw ParseError(line_no, "\"labels\" is not an array");
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw ParseError(line_no, "label is not a string");
            rec.labels.push_back(l.get<std::string>());
        }
    } else {
        if (!j["confidences"].is_object()) throw ParseError(line_no, "\"confidences\" is not an object");
        for (const auto& [name, v] : j["confidences"].items()) {
            if (!v.is_number()) throw ParseError(line_no, "confidence for " + name + " is not a number");
            double score = v.get<double>();
            if (score < 0.0 || score > 1.0)
                throw ParseError(line_no, "confidence for " + name + " outside [0,1]");
            rec.confidences.emplace_back(name, score);
        }
    }
    return rec;
}

}  // namespace

ParseResult parse_manifest(std::istream& stream, const std::optional<ClassVocabulary>& vocabulary) {
    std::vector<RawRecord> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        raw.push_back(decode_line(line, line_no));
    }

    ClassVocabulary vocab;
    if (vocabulary) {
        vocab = *vocabulary;
    } else {
        // First pass: collect names, ids in lexicographic order.
        std::set<std::string> names;
        for (const auto& rec : raw) {
            for (const auto& n : rec.labels) names.insert(n);
            for (const auto& [n, v] : rec.confidences) names.insert(n);
        }
        vocab = ClassVocabulary(std::vector<std::string>(names.begin(), names.end()));
    }

    ParseResult result;
    std::unordered_map<std::string, std::size_t> by_id;  // image_id -> slot in records
    std::vector<ImageRecord> records;
    for (const auto& rec : raw) {
        ImageRecord out;
        out.image_id = rec.image_id;
        if (rec.has_confidences) {
            std::vector<std::pair<ClassId, double>> conf;
            conf.reserve(rec.confidences.size());
            for (const auto& [name, score] : rec.confidences) conf.emplace_back(vocab.require(name), score);
            std::sort(conf.begin(), conf.end());
            out.confidences = std::move(conf);
        } else {
            for (const auto& name : rec.labels) out.labels.push_back(vocab.require(name));
            std::sort(out.labels.begin(), out.labels.end());
            out.labels.erase(std::unique(out.labels.begin(), out.labels.end()), out.labels.end());
            if (out.labels.empty()) {
                ++result.empty_dropped;
                continue;
            }
        }
        auto [it, inserted] = by_id.emplace(out.image_id, records.size());
        if (inserted) {
            records.push_back(std::move(out));
        } else {
            records[it->second] = std::move(out);  // last record wins
            ++result.duplicate_count;
        }
    }

    result.set = AnnotationSet::build(std::move(vocab), std::move(records));
    return result;
}

BinarizeResult binarize_confidences(const AnnotationSet& set, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("binarization threshold must lie in [0,1]");
    BinarizeResult result;
    std::vector<ImageRecord> records;
    records.reserve(set.records.size());
    for (const auto& rec : set.records) {
        if (!rec.confidences) throw InputError("record " + rec.image_id + " has no confidences");
        ImageRecord out;
        out.image_id = rec.image_id;
        for (const auto& [c, score] : *rec.confidences) {
            if (score >= threshold) out.labels.push_back(c);
        }
        if (out.labels.empty()) {
            ++result.dropped;
            continue;
        }
        records.push_back(std::move(out));
    }
    result.set = AnnotationSet::build(set.vocabulary, std::move(records));
    return result;
}

CalibrationReport calibrate_threshold(const AnnotationSet& confidence_set,
                                      const AnnotationSet& ground_truth,
                                      double lo, double hi, double step) {
    if (step <= 0.0) throw ConfigError("calibration step must be positive");
    if (!(lo < hi)) throw ConfigError("calibration sweep needs lo < hi");

    std::unordered_map<std::string, const ImageRecord*> gt_by_id;
    for (const auto& rec : ground_truth.records) gt_by_id.emplace(rec.image_id, &rec);

    // Covered images, compared by class name so vocabularies may differ.
    struct Covered {
        std::vector<std::pair<std::string, double>> confidences;  // name -> score
        std::set<std::string> truth;
    };
    std::vector<Covered> covered;
    for (const auto& rec : confidence_set.records) {
        auto it = gt_by_id.find(rec.image_id);
        if (it == gt_by_id.end()) continue;
        if (!rec.confidences) throw InputError("record " + rec.image_id + " has no confidences");
        Covered cov;
        for (const auto& [c, score] : *rec.confidences)
            cov.confidences.emplace_back(confidence_set.vocabulary.name(c), score);
        for (ClassId c : it->second->labels) cov.truth.insert(ground_truth.vocabulary.name(c));
        covered.push_back(std::move(cov));
    }
    if (covered.empty()) throw InputError("calibration sets share no image_ids");

    CalibrationReport report;
    const double eps = step * 1e-9;
    for (std::size_t k = 0;; ++k) {
        double t = lo + static_cast<double>(k) * step;
        if (t > hi + eps) break;
        std::size_t fp = 0, fn = 0;
        for (const auto& cov : covered) {
            std::size_t predicted_hits = 0;
            for (const auto& [name, score] : cov.confidences) {
                if (score >= t) {
                    if (cov.truth.count(name)) ++predicted_hits;
                    else ++fp;
                }
            }
            fn += cov.truth.size() - predicted_hits;
        }
        report.sweep.push_back({t, fp, fn});
    }

    // Minimize |FP - FN|; scan in sweep order and allow ties to move the
    // pick to the larger threshold.
    std::size_t best_gap = 0;
    bool first = true;
    for (const auto& pt : report.sweep) {
        std::size_t gap = pt.false_positives > pt.false_negatives
                              ? pt.false_positives - pt.false_negatives
                              : pt.false_negatives - pt.false_positives;
        if (first || gap <= best_gap) {
            best_gap = gap;
            report.chosen_threshold = pt.threshold;
            first = false;
        }
    }
    return report;
}

}  // namespace natbd
