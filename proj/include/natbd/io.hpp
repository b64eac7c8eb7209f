#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "natbd/annotations.hpp"
#include "natbd/curate.hpp"
#include "natbd/report.hpp"

// Readers and writers for every on-disk format: annotation manifests
// (JSON lines), the CSV caches and reports, and the backdoor manifest
// document. Writers are deterministic: identical values produce identical
// bytes. CSV artifacts start with an optional "# ..." metadata line carrying
// the resolved run configuration, followed by the fixed column header.
namespace natbd::io {

std::string format_double(double v);  // shortest round-trip representation

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string hash_hex(std::uint64_t h);
std::string hash_file(const std::filesystem::path& path);

void write_annotations(const AnnotationSet& set, std::ostream& out);
void write_annotations_file(const AnnotationSet& set, const std::filesystem::path& path);

void write_vocabulary(const ClassVocabulary& vocabulary, const std::filesystem::path& path,
                      const std::string& meta = {});
ClassVocabulary read_vocabulary(const std::filesystem::path& path);

// Pair counts as "class_i,class_j,count" rows (class_i < class_j, nonzero
// only) plus the sibling "class_id,image_count" file.
void write_cooccurrence(const CoOccurrenceMatrix& matrix, const std::filesystem::path& pairs_path,
                        const std::filesystem::path& counts_path, const std::string& meta = {});
CoOccurrenceMatrix read_cooccurrence(const std::filesystem::path& pairs_path,
                                     const std::filesystem::path& counts_path);

// Same triple format, post-threshold.
void write_graph_cache(const CoGraph& graph, const std::filesystem::path& path,
                       const std::string& meta = {});
CoGraph read_graph_cache(const std::filesystem::path& path, ClassId vertex_count, int min_overlaps);

void write_centrality_report(const CentralityRanking& ranking, const ClassVocabulary& vocabulary,
                             const std::filesystem::path& path, const std::string& meta = {});
void write_trigger_candidates(const std::vector<TriggerCandidate>& candidates,
                              CentralityMetric metric, bool weighted,
                              const std::filesystem::path& path, const std::string& meta = {});
void write_viable_triggers(const std::vector<ViableTrigger>& triggers, const ClassVocabulary& vocabulary,
                           const std::filesystem::path& path, const std::string& meta = {});
void write_subset_report(const ViableTrigger& result, const ClassVocabulary& vocabulary,
                         const std::filesystem::path& path, const std::string& meta = {});
void write_fixed_class_report(const std::vector<ClassTriggerCandidate>& candidates,
                              const std::string& victim_name, const std::filesystem::path& path,
                              const std::string& meta = {});
void write_calibration(const CalibrationReport& report, const std::filesystem::path& path,
                       const std::string& meta = {});
void write_tradeoff(const TradeoffCurve& curve, const std::filesystem::path& path,
                    const std::string& meta = {});
void write_wordcloud(const std::vector<WordcloudEntry>& entries, const std::filesystem::path& path,
                     const std::string& meta = {});
void write_stats(const DatasetStats& stats, const std::filesystem::path& path,
                 const std::string& meta = {});

nlohmann::ordered_json manifest_to_json(const BackdoorManifest& manifest);
void write_manifest(const BackdoorManifest& manifest, const std::filesystem::path& path);
BackdoorManifest read_manifest(const std::filesystem::path& path, const ClassVocabulary& vocabulary);
// Companion "image_id,assigned_label,split" file for training pipelines.
void write_manifest_flat(const BackdoorManifest& manifest, const std::filesystem::path& path,
                         const std::string& meta = {});

// Cache sidecars: "<artifact>.meta.json" records the hash of the inputs the
// artifact was derived from; consumers only trust a cache whose recorded
// hash matches the current inputs.
void write_meta_sidecar(const std::filesystem::path& artifact, const nlohmann::json& meta);
std::optional<nlohmann::json> read_meta_sidecar(const std::filesystem::path& artifact);

}  // namespace natbd::io
