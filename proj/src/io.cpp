#include "natbd/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "natbd/errors.hpp"
#include "natbd/rng.hpp"

namespace natbd::io {

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InputError("invalid " + what + ": " + s);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return in;
}

void put_meta(std::ostream& out, const std::string& meta) {
    if (!meta.empty()) out << "# " << meta << "\n";
}

// Reads CSV rows, skipping "#" metadata lines and checking the header.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header) {
    auto in = open_in(path);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != expected_header)
                throw InputError(path.string() + ": expected header \"" + expected_header + "\"");
            header_seen = true;
            continue;
        }
        rows.push_back(csv_split(line));
    }
    if (!header_seen) throw InputError(path.string() + ": missing header");
    return rows;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    auto out = open_out(path);
    out << contents;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

std::string hash_file(const std::filesystem::path& path) {
    return hash_hex(fnv1a64(read_file(path)));
}

void write_annotations(const AnnotationSet& set, std::ostream& out) {
    for (const auto& rec : set.records) {
        nlohmann::ordered_json j;
        j["image_id"] = rec.image_id;
        if (rec.confidences) {
            nlohmann::ordered_json conf = nlohmann::ordered_json::object();
            for (const auto& [c, score] : *rec.confidences) conf[set.vocabulary.name(c)] = score;
            j["confidences"] = std::move(conf);
        } else {
            auto labels = nlohmann::ordered_json::array();
            for (ClassId c : rec.labels) labels.push_back(set.vocabulary.name(c));
            j["labels"] = std::move(labels);
        }
        out << j.dump() << "\n";
    }
}

void write_annotations_file(const AnnotationSet& set, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_annotations(set, out);
}

void write_vocabulary(const ClassVocabulary& vocabulary, const std::filesystem::path& path,
                      const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "class_id,class_name\n";
    for (ClassId id = 0; id < vocabulary.size(); ++id)
        out << id << "," << csv_escape(vocabulary.name(id)) << "\n";
}

ClassVocabulary read_vocabulary(const std::filesystem::path& path) {
    auto rows = read_csv(path, "class_id,class_name");
    std::vector<std::string> names(rows.size());
    for (const auto& row : rows) {
        if (row.size() != 2) throw InputError(path.string() + ": malformed vocabulary row");
        std::uint64_t id = parse_u64(row[0], "class_id");
        if (id >= rows.size()) throw InputError(path.string() + ": class ids are not dense from 0");
        names[id] = row[1];
    }
    return ClassVocabulary(std::move(names));
}

void write_cooccurrence(const CoOccurrenceMatrix& matrix, const std::filesystem::path& pairs_path,
                        const std::filesystem::path& counts_path, const std::string& meta) {
    {
        auto out = open_out(pairs_path);
        put_meta(out, meta);
        out << "class_i,class_j,count\n";
        for (ClassId i = 0; i < matrix.size(); ++i)
            for (ClassId j = i + 1; j < matrix.size(); ++j)
                if (matrix.count(i, j) > 0) out << i << "," << j << "," << matrix.count(i, j) << "\n";
    }
    auto out = open_out(counts_path);
    put_meta(out, meta);
    out << "class_id,image_count\n";
    for (ClassId c = 0; c < matrix.size(); ++c) out << c << "," << matrix.class_count(c) << "\n";
}

CoOccurrenceMatrix read_cooccurrence(const std::filesystem::path& pairs_path,
                                     const std::filesystem::path& counts_path) {
    auto count_rows = read_csv(counts_path, "class_id,image_count");
    CoOccurrenceMatrix matrix(static_cast<ClassId>(count_rows.size()));
    for (const auto& row : count_rows) {
        if (row.size() != 2) throw InputError(counts_path.string() + ": malformed row");
        auto id = parse_u64(row[0], "class_id");
        if (id >= matrix.size()) throw InputError(counts_path.string() + ": class id out of range");
        matrix.set_class_count(static_cast<ClassId>(id), static_cast<Count>(parse_u64(row[1], "image_count")));
    }
    for (const auto& row : read_csv(pairs_path, "class_i,class_j,count")) {
        if (row.size() != 3) throw InputError(pairs_path.string() + ": malformed row");
        auto i = parse_u64(row[0], "class_i");
        auto j = parse_u64(row[1], "class_j");
        if (i >= matrix.size() || j >= matrix.size() || i >= j)
            throw InputError(pairs_path.string() + ": bad pair " + row[0] + "," + row[1]);
        matrix.set_pair(static_cast<ClassId>(i), static_cast<ClassId>(j),
                        static_cast<Count>(parse_u64(row[2], "count")));
    }
    return matrix;
}

void write_graph_cache(const CoGraph& graph, const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "class_i,class_j,count\n";
    for (ClassId i = 0; i < graph.vertex_count(); ++i)
        for (ClassId j = i + 1; j < graph.vertex_count(); ++j)
            if (graph.weight(i, j) > 0) out << i << "," << j << "," << graph.weight(i, j) << "\n";
}

CoGraph read_graph_cache(const std::filesystem::path& path, ClassId vertex_count, int min_overlaps) {
    std::vector<Count> weights(std::size_t(vertex_count) * vertex_count, 0);
    for (const auto& row : read_csv(path, "class_i,class_j,count")) {
        if (row.size() != 3) throw InputError(path.string() + ": malformed row");
        auto i = parse_u64(row[0], "class_i");
        auto j = parse_u64(row[1], "class_j");
        if (i >= vertex_count || j >= vertex_count || i >= j)
            throw InputError(path.string() + ": bad pair " + row[0] + "," + row[1]);
        auto w = static_cast<Count>(parse_u64(row[2], "count"));
        weights[i * vertex_count + j] = w;
        weights[j * vertex_count + i] = w;
    }
    return CoGraph(vertex_count, std::move(weights), min_overlaps);
}

void write_centrality_report(const CentralityRanking& ranking, const ClassVocabulary& vocabulary,
                             const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "rank,class_id,class_name,score,metric,weighted\n";
    for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
        ClassId v = ranking.order[pos];
        out << pos + 1 << "," << v << "," << csv_escape(vocabulary.name(v)) << ","
            << format_double(ranking.scores[v]) << "," << metric_name(ranking.metric) << ","
            << (ranking.weighted ? "true" : "false") << "\n";
    }
}

void write_trigger_candidates(const std::vector<TriggerCandidate>& candidates, CentralityMetric metric,
                              bool weighted, const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "rank,class_id,class_name,score,metric,weighted\n";
    for (const auto& c : candidates) {
        out << c.rank << "," << c.vertex << "," << csv_escape(c.class_name) << ","
            << format_double(c.score) << "," << metric_name(metric) << ","
            << (weighted ? "true" : "false") << "\n";
    }
}

void write_viable_triggers(const std::vector<ViableTrigger>& triggers, const ClassVocabulary& vocabulary,
                           const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "rank,class_id,class_name,score,subset_size,subset_classes\n";
    for (const auto& t : triggers) {
        std::string classes;
        for (ClassId c : t.subset.classes) {
            if (!classes.empty()) classes += ';';
            classes += vocabulary.name(c);
        }
        out << t.centrality_rank << "," << t.trigger << "," << csv_escape(t.trigger_name) << ","
            << format_double(t.score) << "," << t.subset.classes.size() << "," << csv_escape(classes)
            << "\n";
    }
}

void write_subset_report(const ViableTrigger& result, const ClassVocabulary& vocabulary,
                         const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "trigger,class_id,class_name,co_occurrences_with_trigger\n";
    for (ClassId c : result.subset.classes) {
        auto it = result.trigger_cooccurrence.find(c);
        Count w = it == result.trigger_cooccurrence.end() ? 0 : it->second;
        out << csv_escape(result.trigger_name) << "," << c << "," << csv_escape(vocabulary.name(c))
            << "," << w << "\n";
    }
    out << "# summary trials=" << result.trials << " seed=" << result.subset.seed
        << " residual_overlap=" << result.subset.residual_overlap
        << " viable=" << (result.viable ? "true" : "false") << "\n";
}

void write_fixed_class_report(const std::vector<ClassTriggerCandidate>& candidates,
                              const std::string& victim_name, const std::filesystem::path& path,
                              const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "victim,class_id,class_name,centrality_rank,score,co_occurrences_with_victim\n";
    for (const auto& c : candidates) {
        out << csv_escape(victim_name) << "," << c.vertex << "," << csv_escape(c.class_name) << ","
            << c.centrality_rank << "," << format_double(c.score) << "," << c.edge_weight << "\n";
    }
}

void write_calibration(const CalibrationReport& report, const std::filesystem::path& path,
                       const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "# chosen_threshold=" << format_double(report.chosen_threshold) << "\n";
    out << "threshold,false_positives,false_negatives\n";
    for (const auto& pt : report.sweep)
        out << format_double(pt.threshold) << "," << pt.false_positives << "," << pt.false_negatives
            << "\n";
}

void write_tradeoff(const TradeoffCurve& curve, const std::filesystem::path& path,
                    const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "# metric=" << metric_name(curve.metric) << " weighted=" << (curve.weighted ? "true" : "false")
        << "\n";
    out << "x,y\n";
    for (const auto& pt : curve.points) out << pt.min_subset_size << "," << pt.num_viable_subsets << "\n";
}

void write_wordcloud(const std::vector<WordcloudEntry>& entries, const std::filesystem::path& path,
                     const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "class_name,weight\n";
    for (const auto& e : entries) out << csv_escape(e.class_name) << "," << e.weight << "\n";
}

void write_stats(const DatasetStats& stats, const std::filesystem::path& path, const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "classes,images,label_incidences,mean_labels_per_image\n";
    out << stats.class_count << "," << stats.image_count << "," << stats.total_label_incidences << ","
        << format_double(stats.mean_labels_per_image) << "\n";
}

namespace {

nlohmann::ordered_json class_entry(ClassId id, const std::string& name) {
    nlohmann::ordered_json j;
    j["class_id"] = id;
    j["class_name"] = name;
    return j;
}

nlohmann::ordered_json image_pairs(const std::vector<std::string>& ids, const std::string& label) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& id : ids) arr.push_back(nlohmann::ordered_json::array({id, label}));
    return arr;
}

}  // namespace

nlohmann::ordered_json manifest_to_json(const BackdoorManifest& manifest) {
    nlohmann::ordered_json j;
    j["format_version"] = manifest.format_version;
    j["trigger"] = class_entry(manifest.trigger_id, manifest.trigger_name);
    j["target"] = class_entry(manifest.target_id, manifest.target_name);
    auto subset = nlohmann::ordered_json::array();
    for (const auto& [id, name] : manifest.subset_classes) subset.push_back(class_entry(id, name));
    j["subset_classes"] = std::move(subset);
    auto extra = nlohmann::ordered_json::array();
    for (const auto& [id, name] : manifest.extra_classes) extra.push_back(class_entry(id, name));
    j["extra_classes"] = std::move(extra);
    j["injection_rate_actual"] = manifest.injection_rate_actual;
    j["seed"] = manifest.seed;

    nlohmann::ordered_json cfg;
    cfg["min_classes"] = manifest.config.min_classes;
    cfg["min_clean_per_class"] = manifest.config.min_clean_per_class;
    cfg["min_poison_per_class"] = manifest.config.min_poison_per_class;
    cfg["clean_per_class"] = manifest.config.clean_per_class;
    cfg["injection_rate"] = manifest.config.injection_rate;
    cfg["target_class"] = manifest.target_name;
    cfg["seed"] = manifest.config.seed;
    auto excl = nlohmann::ordered_json::array();
    for (const auto& e : manifest.config.exclusions) excl.push_back(e);
    cfg["exclusions"] = std::move(excl);
    cfg["trig_threshold"] = manifest.trig_threshold;
    cfg["prune_threshold"] = manifest.prune_threshold;
    cfg["trials"] = manifest.trials;
    cfg["residual_overlap"] = manifest.residual_overlap;
    if (manifest.expand_seed) cfg["expand_seed"] = *manifest.expand_seed;
    j["config"] = std::move(cfg);

    nlohmann::ordered_json clean = nlohmann::ordered_json::object();
    for (const auto& [c, ids] : manifest.clean) clean[manifest.class_name(c)] = image_pairs(ids, manifest.class_name(c));
    j["clean"] = std::move(clean);
    nlohmann::ordered_json poison = nlohmann::ordered_json::object();
    for (const auto& [c, ids] : manifest.poison) poison[manifest.class_name(c)] = image_pairs(ids, manifest.target_name);
    j["poison"] = std::move(poison);
    return j;
}

void write_manifest(const BackdoorManifest& manifest, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << manifest_to_json(manifest).dump(2) << "\n";
}

BackdoorManifest read_manifest(const std::filesystem::path& path, const ClassVocabulary& vocabulary) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    try {
        BackdoorManifest m;
        m.format_version = j.at("format_version").get<std::string>();
        if (m.format_version != "1")
            throw InputError(path.string() + ": unsupported format_version " + m.format_version);
        m.trigger_name = j.at("trigger").at("class_name").get<std::string>();
        m.trigger_id = vocabulary.require(m.trigger_name);
        m.target_name = j.at("target").at("class_name").get<std::string>();
        m.target_id = vocabulary.require(m.target_name);
        for (const auto& e : j.at("subset_classes")) {
            std::string name = e.at("class_name").get<std::string>();
            m.subset_classes.emplace_back(vocabulary.require(name), name);
        }
        for (const auto& e : j.at("extra_classes")) {
            std::string name = e.at("class_name").get<std::string>();
            m.extra_classes.emplace_back(vocabulary.require(name), name);
        }
        m.injection_rate_actual = j.at("injection_rate_actual").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();

        const auto& cfg = j.at("config");
        m.config.min_classes = cfg.at("min_classes").get<std::size_t>();
        m.config.min_clean_per_class = cfg.at("min_clean_per_class").get<Count>();
        m.config.min_poison_per_class = cfg.at("min_poison_per_class").get<Count>();
        m.config.clean_per_class = cfg.at("clean_per_class").get<Count>();
        m.config.injection_rate = cfg.at("injection_rate").get<double>();
        m.config.target_class = m.target_id;
        m.config.seed = cfg.at("seed").get<std::uint64_t>();
        for (const auto& e : cfg.at("exclusions")) m.config.exclusions.insert(e.get<std::string>());
        m.trig_threshold = cfg.at("trig_threshold").get<int>();
        m.prune_threshold = cfg.at("prune_threshold").get<int>();
        m.trials = cfg.at("trials").get<std::uint64_t>();
        m.residual_overlap = cfg.at("residual_overlap").get<std::uint64_t>();
        if (cfg.contains("expand_seed")) m.expand_seed = cfg.at("expand_seed").get<std::uint64_t>();

        auto read_split = [&](const nlohmann::json& split, const char* expected_label_of,
                              std::map<ClassId, std::vector<std::string>>& into) {
            for (const auto& [name, entries] : split.items()) {
                ClassId c = vocabulary.require(name);
                std::vector<std::string> ids;
                for (const auto& pair : entries) {
                    std::string image = pair.at(0).get<std::string>();
                    std::string label = pair.at(1).get<std::string>();
                    std::string want = std::string(expected_label_of) == "class" ? name : m.target_name;
                    if (label != want)
                        throw InputError(path.string() + ": image " + image + " labeled " + label +
                                         ", expected " + want);
                    ids.push_back(std::move(image));
                }
                into[c] = std::move(ids);
            }
        };
        read_split(j.at("clean"), "class", m.clean);
        read_split(j.at("poison"), "target", m.poison);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": malformed manifest: " + e.what());
    }
}

void write_manifest_flat(const BackdoorManifest& manifest, const std::filesystem::path& path,
                         const std::string& meta) {
    auto out = open_out(path);
    put_meta(out, meta);
    out << "image_id,assigned_label,split\n";
    for (const auto& [c, ids] : manifest.clean)
        for (const auto& id : ids)
            out << csv_escape(id) << "," << csv_escape(manifest.class_name(c)) << ",clean\n";
    for (const auto& [c, ids] : manifest.poison)
        for (const auto& id : ids) out << csv_escape(id) << "," << csv_escape(manifest.target_name) << ",poison\n";
}

void write_meta_sidecar(const std::filesystem::path& artifact, const nlohmann::json& meta) {
    auto out = open_out(artifact.string() + ".meta.json");
    out << meta.dump(2) << "\n";
}

std::optional<nlohmann::json> read_meta_sidecar(const std::filesystem::path& artifact) {
    std::filesystem::path p = artifact.string() + ".meta.json";
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
        return nlohmann::json::parse(read_file(p));
    } catch (...) {
        return std::nullopt;
    }
}

}  // namespace natbd::io
