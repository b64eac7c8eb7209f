// natbd: finds natural backdoor triggers and their poisonable class subsets
// in multi-label annotation datasets via co-occurrence graph analysis, and
// emits reproducible single-label backdoor training manifests.
//
// Exit codes: 0 success, 2 config error, 3 input error, 4 supply error,
// 5 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "natbd/centrality.hpp"
#include "natbd/cooccurrence.hpp"
#include "natbd/curate.hpp"
#include "natbd/errors.hpp"
#include "natbd/graph.hpp"
#include "natbd/io.hpp"
#include "natbd/report.hpp"
#include "natbd/rng.hpp"

namespace {

using namespace natbd;
namespace fs = std::filesystem;

struct RunConfig {
    std::string annotations;
    std::string vocabulary;
    std::string cache_dir;
    std::string out_dir = "out";
    std::string metric = "betweenness";
    bool weighted = false;
    int min_overlaps = 15;
    int trig_threshold = kNoThreshold;
    int prune_threshold = kNoThreshold;
    std::uint64_t trials = 500;
    std::size_t top_m = 50;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double binarize_threshold = -1.0;  // < 0: labels are already binary
    std::vector<std::string> exclude;
    std::string exclude_file;

    CurationConfig curation;

    std::set<std::string> exclusions() const {
        std::set<std::string> names(exclude.begin(), exclude.end());
        if (!exclude_file.empty()) {
            std::ifstream in(exclude_file);
            if (!in) throw InputError("cannot read exclusion file " + exclude_file);
            std::string line;
            while (std::getline(in, line)) {
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
                if (!line.empty()) names.insert(line);
            }
        }
        return names;
    }

    fs::path cache_path() const {
        if (!cache_dir.empty()) return cache_dir;
        if (const char* env = std::getenv("NATBD_CACHE_DIR")) return env;
        return fs::path(out_dir) / "cache";
    }

    // Echoed into every artifact so outputs are self-describing.
    std::string meta_line(const std::string& command) const {
        nlohmann::ordered_json j;
        j["tool"] = "natbd";
        j["command"] = command;
        j["annotations"] = annotations;
        j["vocabulary"] = vocabulary;
        j["metric"] = metric;
        j["weighted"] = weighted;
        j["min_overlaps"] = min_overlaps;
        j["trig_threshold"] = trig_threshold;
        j["prune_threshold"] = prune_threshold;
        j["trials"] = trials;
        j["m"] = top_m;
        j["seed"] = seed;
        j["binarize_threshold"] = binarize_threshold;
        j["min_classes"] = curation.min_classes;
        j["min_clean_per_class"] = curation.min_clean_per_class;
        j["min_poison_per_class"] = curation.min_poison_per_class;
        j["clean_per_class"] = curation.clean_per_class;
        j["injection_rate"] = curation.injection_rate;
        auto excl = nlohmann::ordered_json::array();
        for (const auto& e : exclusions()) excl.push_back(e);
        j["exclusions"] = std::move(excl);
        return "config=" + j.dump();
    }
};

// Lazily loaded pipeline stages. The co-occurrence matrix and graph caches
// are trusted only when their recorded input hash matches the current
// annotation inputs; otherwise they are rebuilt (and rewritten).
class Pipeline {
public:
    explicit Pipeline(const RunConfig& cfg) : cfg_(cfg) {}

    const std::string& inputs_hash() {
        if (inputs_hash_.empty()) {
            if (cfg_.annotations.empty()) throw ConfigError("--annotations is required");
            std::string h = io::hash_file(cfg_.annotations);
            if (!cfg_.vocabulary.empty()) h += ":" + io::hash_file(cfg_.vocabulary);
            h += ":threshold=" + io::format_double(cfg_.binarize_threshold);
            inputs_hash_ = io::hash_hex(fnv1a64(h));
        }
        return inputs_hash_;
    }

    const AnnotationSet& annotations() {
        if (!set_) {
            if (cfg_.annotations.empty()) throw ConfigError("--annotations is required");
            std::ifstream in(cfg_.annotations);
            if (!in) throw InputError("cannot read annotations file " + cfg_.annotations);
            std::optional<ClassVocabulary> vocab;
            if (!cfg_.vocabulary.empty()) vocab = io::read_vocabulary(cfg_.vocabulary);
            auto parsed = parse_manifest(in, vocab);
            if (parsed.duplicate_count > 0)
                std::cerr << "note: " << parsed.duplicate_count << " duplicate image_id(s), last record kept\n";
            if (parsed.empty_dropped > 0)
                std::cerr << "note: " << parsed.empty_dropped << " record(s) with empty label sets dropped\n";
            if (cfg_.binarize_threshold >= 0.0) {
                auto bin = binarize_confidences(parsed.set, cfg_.binarize_threshold);
                if (bin.dropped > 0)
                    std::cerr << "note: " << bin.dropped << " record(s) empty after binarization dropped\n";
                set_ = std::move(bin.set);
            } else {
                set_ = std::move(parsed.set);
            }
        }
        return *set_;
    }

    const ClassVocabulary& vocabulary() {
        if (set_) return set_->vocabulary;
        // A valid matrix cache lets matrix-only commands skip the parse.
        fs::path vpath = cfg_.cache_path() / "vocabulary.csv";
        if (cache_valid(vpath) && !vocab_) vocab_ = io::read_vocabulary(vpath);
        if (vocab_) return *vocab_;
        return annotations().vocabulary;
    }

    const CoOccurrenceMatrix& matrix() {
        if (matrix_) return *matrix_;
        fs::path pairs = cfg_.cache_path() / "cooccurrence.csv";
        fs::path counts = cfg_.cache_path() / "class_counts.csv";
        fs::path vocab = cfg_.cache_path() / "vocabulary.csv";
        if (cache_valid(pairs) && cache_valid(counts) && cache_valid(vocab)) {
            vocab_ = io::read_vocabulary(vocab);
            matrix_ = io::read_cooccurrence(pairs, counts);
            if (matrix_->size() != vocab_->size()) {
                matrix_.reset();
                vocab_.reset();
            } else {
                return *matrix_;
            }
        }
        matrix_ = build_cooccurrence(annotations());
        write_caches();
        return *matrix_;
    }

    const CoGraph& graph() {
        if (graph_) return *graph_;
        const auto& m = matrix();
        fs::path gpath = cfg_.cache_path() / "graph.csv";
        auto meta = io::read_meta_sidecar(gpath);
        if (meta && (*meta).value("inputs_hash", "") == inputs_hash() &&
            (*meta).value("min_overlaps", kNoThreshold - 1) == cfg_.min_overlaps &&
            (*meta).value("format_version", "") == "1") {
            graph_ = io::read_graph_cache(gpath, m.size(), cfg_.min_overlaps);
            return *graph_;
        }
        graph_ = build_graph(m, cfg_.min_overlaps);
        nlohmann::json gm;
        gm["format_version"] = "1";
        gm["inputs_hash"] = inputs_hash();
        gm["min_overlaps"] = cfg_.min_overlaps;
        io::write_graph_cache(*graph_, gpath, "inputs_hash=" + inputs_hash());
        io::write_meta_sidecar(gpath, gm);
        return *graph_;
    }

    const CentralityRanking& ranking() {
        if (!ranking_) ranking_ = centrality(graph(), metric_from_name(cfg_.metric), cfg_.weighted, cfg_.workers);
        return *ranking_;
    }

    void write_caches() {
        nlohmann::json meta;
        meta["format_version"] = "1";
        meta["inputs_hash"] = inputs_hash();
        std::string line = "inputs_hash=" + inputs_hash();
        io::write_vocabulary(vocabulary(), cfg_.cache_path() / "vocabulary.csv", line);
        io::write_meta_sidecar(cfg_.cache_path() / "vocabulary.csv", meta);
        io::write_cooccurrence(*matrix_, cfg_.cache_path() / "cooccurrence.csv",
                               cfg_.cache_path() / "class_counts.csv", line);
        io::write_meta_sidecar(cfg_.cache_path() / "cooccurrence.csv", meta);
        io::write_meta_sidecar(cfg_.cache_path() / "class_counts.csv", meta);
    }

private:
    bool cache_valid(const fs::path& artifact) {
        std::error_code ec;
        if (!fs::exists(artifact, ec)) return false;
        auto meta = io::read_meta_sidecar(artifact);
        return meta && (*meta).value("inputs_hash", "") == inputs_hash() &&
               (*meta).value("format_version", "") == "1";
    }

    const RunConfig& cfg_;
    std::string inputs_hash_;
    std::optional<AnnotationSet> set_;
    std::optional<ClassVocabulary> vocab_;
    std::optional<CoOccurrenceMatrix> matrix_;
    std::optional<CoGraph> graph_;
    std::optional<CentralityRanking> ranking_;
};

int cmd_ingest(RunConfig& cfg) {
    Pipeline pipe(cfg);
    const auto& m = pipe.matrix();
    auto stats = dataset_stats(pipe.annotations());
    std::cout << "classes=" << stats.class_count << " images=" << stats.image_count
              << " mean_labels_per_image=" << io::format_double(stats.mean_labels_per_image) << "\n";
    std::size_t nonzero = 0;
    for (ClassId i = 0; i < m.size(); ++i)
        for (ClassId j = i + 1; j < m.size(); ++j)
            if (m.count(i, j) > 0) ++nonzero;
    std::cout << "cooccurring_pairs=" << nonzero << " cache=" << cfg.cache_path().string() << "\n";
    return 0;
}

int cmd_calibrate(RunConfig& cfg, const std::string& ground_truth, double lo, double hi, double step) {
    if (ground_truth.empty()) throw ConfigError("--ground-truth is required");
    Pipeline pipe(cfg);
    std::ifstream gt_in(ground_truth);
    if (!gt_in) throw InputError("cannot read ground truth file " + ground_truth);
    auto gt = parse_manifest(gt_in);
    auto report = calibrate_threshold(pipe.annotations(), gt.set, lo, hi, step);
    fs::path out = fs::path(cfg.out_dir) / "calibration.csv";
    io::write_calibration(report, out, cfg.meta_line("calibrate"));
    std::cout << "chosen_threshold=" << io::format_double(report.chosen_threshold) << " sweep_size="
              << report.sweep.size() << " report=" << out.string() << "\n";
    return 0;
}

int cmd_graph(RunConfig& cfg) {
    Pipeline pipe(cfg);
    const auto& g = pipe.graph();
    std::cout << "vertices=" << g.vertex_count() << " edges=" << g.edge_count()
              << " min_overlaps=" << cfg.min_overlaps << "\n";
    return 0;
}

int cmd_rank(RunConfig& cfg) {
    Pipeline pipe(cfg);
    const auto& ranking = pipe.ranking();
    fs::path out = fs::path(cfg.out_dir) /
                   ("centrality_" + cfg.metric + (cfg.weighted ? "_weighted" : "_unweighted") + ".csv");
    io::write_centrality_report(ranking, pipe.vocabulary(), out, cfg.meta_line("rank"));
    std::cout << "report=" << out.string() << "\n";
    return 0;
}

int cmd_triggers(RunConfig& cfg) {
    Pipeline pipe(cfg);
    auto exclusions = cfg.exclusions();
    auto candidates = top_triggers(pipe.ranking(), pipe.vocabulary(), cfg.top_m, exclusions);
    io::write_trigger_candidates(candidates, metric_from_name(cfg.metric), cfg.weighted,
                                 fs::path(cfg.out_dir) / "trigger_candidates.csv",
                                 cfg.meta_line("triggers"));
    auto cloud = wordcloud_export(pipe.ranking(), pipe.vocabulary(), cfg.top_m, exclusions);
    io::write_wordcloud(cloud, fs::path(cfg.out_dir) / "wordcloud.csv", cfg.meta_line("triggers"));

    CurationConfig cur = cfg.curation;
    cur.seed = cfg.seed;
    cur.exclusions = exclusions;
    auto viable = viable_triggers(pipe.graph(), pipe.matrix(), pipe.annotations(), pipe.ranking(), cur,
                                  cfg.trig_threshold, cfg.prune_threshold, cfg.trials, cfg.top_m);
    io::write_viable_triggers(viable, pipe.vocabulary(), fs::path(cfg.out_dir) / "viable_triggers.csv",
                              cfg.meta_line("triggers"));
    for (const auto& t : viable)
        std::cout << t.centrality_rank << " " << t.trigger_name << " subset_size="
                  << t.subset.classes.size() << "\n";
    std::cout << "viable_triggers=" << viable.size() << "\n";
    return 0;
}

ViableTrigger resolve_trigger(RunConfig& cfg, Pipeline& pipe, const std::string& trigger_name) {
    if (trigger_name.empty()) throw ConfigError("--trigger is required");
    ClassId trigger = pipe.vocabulary().require(trigger_name);
    CurationConfig cur = cfg.curation;
    cur.seed = cfg.seed;
    cur.exclusions = cfg.exclusions();
    return fixed_trigger_subset(pipe.graph(), pipe.matrix(), pipe.annotations(), trigger, cur,
                                cfg.trig_threshold, cfg.prune_threshold, cfg.trials);
}

int cmd_subset(RunConfig& cfg, const std::string& trigger_name, const std::string& victim_name) {
    Pipeline pipe(cfg);
    if (!victim_name.empty()) {
        ClassId victim = pipe.vocabulary().require(victim_name);
        CurationConfig cur = cfg.curation;
        cur.exclusions = cfg.exclusions();
        auto list = fixed_class_triggers(pipe.graph(), victim, pipe.ranking(), pipe.vocabulary(), cur,
                                         cfg.trig_threshold);
        fs::path out = fs::path(cfg.out_dir) / "class_triggers.csv";
        io::write_fixed_class_report(list, victim_name, out, cfg.meta_line("subset"));
        for (const auto& c : list)
            std::cout << c.centrality_rank << " " << c.class_name << " co_occurrences=" << c.edge_weight
                      << "\n";
        std::cout << "report=" << out.string() << "\n";
        return 0;
    }
    auto result = resolve_trigger(cfg, pipe, trigger_name);
    fs::path out = fs::path(cfg.out_dir) / "subset_report.csv";
    io::write_subset_report(result, pipe.vocabulary(), out, cfg.meta_line("subset"));
    std::cout << "trigger=" << result.trigger_name << " subset_size=" << result.subset.classes.size()
              << " viable=" << (result.viable ? "true" : "false") << " report=" << out.string() << "\n";
    return 0;
}

int cmd_curate(RunConfig& cfg, const std::string& trigger_name, const std::string& target_name) {
    Pipeline pipe(cfg);
    auto result = resolve_trigger(cfg, pipe, trigger_name);
    if (result.subset.classes.empty())
        throw SupplyError("trigger " + trigger_name + " has no classes meeting the supply minima");
    if (!result.viable)
        std::cerr << "note: subset has " << result.subset.classes.size() << " classes, below min_classes="
                  << cfg.curation.min_classes << "\n";
    CurationConfig cur = cfg.curation;
    cur.seed = cfg.seed;
    cur.exclusions = cfg.exclusions();
    if (!target_name.empty()) cur.target_class = pipe.vocabulary().require(target_name);
    auto manifest = assemble_manifest(pipe.annotations(), result, cur);
    fs::path out = fs::path(cfg.out_dir) / "manifest.json";
    io::write_manifest(manifest, out);
    io::write_manifest_flat(manifest, fs::path(cfg.out_dir) / "manifest_flat.csv", cfg.meta_line("curate"));
    std::cout << "trigger=" << manifest.trigger_name << " target=" << manifest.target_name
              << " classes=" << manifest.subset_classes.size() << " clean=" << manifest.clean_total()
              << " poison=" << manifest.poison_total()
              << " injection_rate_actual=" << io::format_double(manifest.injection_rate_actual)
              << " manifest=" << out.string() << "\n";
    return 0;
}

int cmd_expand(RunConfig& cfg, const std::string& manifest_path, std::size_t extra) {
    if (manifest_path.empty()) throw ConfigError("--manifest is required");
    Pipeline pipe(cfg);
    auto manifest = io::read_manifest(manifest_path, pipe.annotations().vocabulary);
    auto expanded = expand_with_pruned_classes(pipe.annotations(), manifest, extra, cfg.seed);
    fs::path out = fs::path(cfg.out_dir) / "manifest_expanded.json";
    io::write_manifest(expanded, out);
    io::write_manifest_flat(expanded, fs::path(cfg.out_dir) / "manifest_expanded_flat.csv",
                            cfg.meta_line("expand"));
    std::cout << "extra_classes=" << expanded.extra_classes.size()
              << " clean=" << expanded.clean_total() << " poison=" << expanded.poison_total()
              << " injection_rate_actual=" << io::format_double(expanded.injection_rate_actual)
              << " manifest=" << out.string() << "\n";
    return 0;
}

int cmd_tradeoff(RunConfig& cfg, std::vector<std::size_t> sizes) {
    if (sizes.empty()) sizes = {5, 6, 7, 8, 9, 10, 12, 15, 20};
    Pipeline pipe(cfg);
    CurationConfig cur = cfg.curation;
    cur.seed = cfg.seed;
    cur.exclusions = cfg.exclusions();
    auto curve = tradeoff_curve(pipe.graph(), pipe.matrix(), pipe.annotations(), pipe.ranking(), cur,
                                cfg.trig_threshold, cfg.prune_threshold, cfg.trials, sizes, cfg.top_m);
    fs::path out = fs::path(cfg.out_dir) / "tradeoff.csv";
    io::write_tradeoff(curve, out, cfg.meta_line("tradeoff"));
    for (const auto& pt : curve.points)
        std::cout << pt.min_subset_size << " -> " << pt.num_viable_subsets << "\n";
    std::cout << "report=" << out.string() << "\n";
    return 0;
}

int cmd_stats(RunConfig& cfg) {
    Pipeline pipe(cfg);
    auto stats = dataset_stats(pipe.annotations());
    io::write_stats(stats, fs::path(cfg.out_dir) / "dataset_stats.csv", cfg.meta_line("stats"));
    std::cout << "classes=" << stats.class_count << " images=" << stats.image_count
              << " mean_labels_per_image=" << io::format_double(stats.mean_labels_per_image) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"natural backdoor dataset discovery and curation"};
    app.set_config("--config")->configurable(false);
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--annotations", cfg.annotations, "line-delimited annotation manifest (JSON lines)");
    app.add_option("--vocabulary", cfg.vocabulary, "class_id,class_name vocabulary file");
    app.add_option("--cache-dir", cfg.cache_dir, "cache directory (default: <out>/cache, or $NATBD_CACHE_DIR)");
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--metric", cfg.metric, "degree|betweenness|closeness|eigenvector")->capture_default_str();
    app.add_option("--weighted", cfg.weighted, "use weighted centrality")->capture_default_str();
    app.add_option("--min-overlaps", cfg.min_overlaps, "minimum co-occurrences for a graph edge (-1 disables)")
        ->capture_default_str();
    app.add_option("--trig-threshold", cfg.trig_threshold, "minimum trigger co-occurrence (-1 disables)")
        ->capture_default_str();
    app.add_option("--prune-threshold", cfg.prune_threshold,
                   "minimum among-class co-occurrence to count as a conflict (-1 disables)")
        ->capture_default_str();
    app.add_option("--trials", cfg.trials, "independent-set trials per trigger")->capture_default_str();
    app.add_option("--m", cfg.top_m, "number of top-ranked trigger candidates")->capture_default_str();
    app.add_option("--seed", cfg.seed, "base seed for all sampling")->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads for all-pairs metrics")->capture_default_str();
    app.add_option("--threshold", cfg.binarize_threshold,
                   "binarize confidence annotations at this threshold");
    app.add_option("--exclude", cfg.exclude, "class name to exclude as trigger (repeatable)");
    app.add_option("--exclude-file", cfg.exclude_file, "file with one excluded class name per line");
    app.add_option("--min-classes", cfg.curation.min_classes, "minimum poisonable classes for viability")
        ->capture_default_str();
    app.add_option("--min-clean", cfg.curation.min_clean_per_class, "minimum clean images per class")
        ->capture_default_str();
    app.add_option("--min-poison", cfg.curation.min_poison_per_class, "minimum poison images per class")
        ->capture_default_str();
    app.add_option("--clean-per-class", cfg.curation.clean_per_class, "clean images per class to sample")
        ->capture_default_str();
    app.add_option("--injection-rate", cfg.curation.injection_rate, "poison fraction of the manifest")
        ->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "parse annotations and build the co-occurrence cache");
    auto* calibrate = app.add_subcommand("calibrate", "sweep binarization thresholds against ground truth");
    std::string ground_truth;
    double cal_lo = 0.900, cal_hi = 1.000, cal_step = 0.001;
    calibrate->add_option("--ground-truth", ground_truth, "hand-labeled annotation manifest");
    calibrate->add_option("--lo", cal_lo, "sweep start")->capture_default_str();
    calibrate->add_option("--hi", cal_hi, "sweep end")->capture_default_str();
    calibrate->add_option("--step", cal_step, "sweep increment")->capture_default_str();
    auto* graphc = app.add_subcommand("graph", "build the thresholded co-occurrence graph");
    auto* rank = app.add_subcommand("rank", "score vertices by centrality");
    auto* triggers = app.add_subcommand("triggers", "list candidate and viable triggers");
    auto* subset = app.add_subcommand("subset", "poisonable subset for one trigger, or triggers for one class");
    std::string trigger_name, victim_name, target_name, manifest_path;
    subset->add_option("--trigger", trigger_name, "trigger class name");
    subset->add_option("--victim", victim_name, "victim class name (lists its candidate triggers)");
    auto* curate = app.add_subcommand("curate", "assemble a backdoor training manifest");
    curate->add_option("--trigger", trigger_name, "trigger class name");
    curate->add_option("--target", target_name, "target class name (defaults to lowest subset class id)");
    auto* expand = app.add_subcommand("expand", "add pruned clean-only classes to a manifest");
    std::size_t extra = 0;
    expand->add_option("--manifest", manifest_path, "manifest to expand");
    expand->add_option("--extra", extra, "number of classes to add")->capture_default_str();
    auto* tradeoff = app.add_subcommand("tradeoff", "viable subset counts per minimum subset size");
    std::vector<std::size_t> sizes;
    tradeoff->add_option("--sizes", sizes, "ascending subset sizes")->delimiter(',');
    auto* stats = app.add_subcommand("stats", "dataset summary statistics");

    for (auto* sub : {ingest, calibrate, graphc, rank, triggers, subset, curate, expand, tradeoff, stats})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (calibrate->parsed()) return cmd_calibrate(cfg, ground_truth, cal_lo, cal_hi, cal_step);
        if (graphc->parsed()) return cmd_graph(cfg);
        if (rank->parsed()) return cmd_rank(cfg);
        if (triggers->parsed()) return cmd_triggers(cfg);
        if (subset->parsed()) return cmd_subset(cfg, trigger_name, victim_name);
        if (curate->parsed()) return cmd_curate(cfg, trigger_name, target_name);
        if (expand->parsed()) return cmd_expand(cfg, manifest_path, extra);
        if (tradeoff->parsed()) return cmd_tradeoff(cfg, sizes);
        if (stats->parsed()) return cmd_stats(cfg);
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const SupplyError& e) {
        std::cerr << "supply error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
