// joininfer: command-line front end for key and join inference.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "joininfer/config.hpp"
#include "joininfer/eval.hpp"
#include "joininfer/feedback_service.hpp"
#include "joininfer/graph_document.hpp"
#include "joininfer/pipeline.hpp"

using namespace joininfer;
using nlohmann::json;

namespace {

enum class OutputFormat { Text, Structured };

struct Flags {
    std::string config;
    std::string manifest;
    double x = 0.95;
    double tau = 0.4;
    size_t sample_size = 0;
    uint64_t seed = 0;
    std::string adjudicator;
    uint64_t exact_threshold = 0;
    std::string output_dir;
    size_t workers = 0;
    bool no_stats_cache = false;
    std::string format = "text";
};

struct Options {
    CLI::Option* x = nullptr;
    CLI::Option* tau = nullptr;
    CLI::Option* sample_size = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* adjudicator = nullptr;
    CLI::Option* exact_threshold = nullptr;
    CLI::Option* output_dir = nullptr;
    CLI::Option* workers = nullptr;
    CLI::Option* manifest = nullptr;
};

// Config file first, then any flag given on the command line.
RunConfig resolve_config(const Flags& f, const Options& o) {
    RunConfig config;
    if (!f.config.empty()) config = load_config(f.config);
    if (o.manifest->count() > 0) config.manifest = f.manifest;
    if (o.x->count() > 0) config.x = f.x;
    if (o.tau->count() > 0) config.tau = f.tau;
    if (o.sample_size->count() > 0) config.sample_size = f.sample_size;
    if (o.seed->count() > 0) config.seed = f.seed;
    if (o.exact_threshold->count() > 0) config.exact_threshold = f.exact_threshold;
    if (o.output_dir->count() > 0) config.output_dir = f.output_dir;
    if (o.workers->count() > 0) config.workers = f.workers;
    if (o.adjudicator->count() > 0) {
        config.adjudicator = f.adjudicator == "remote" ? AdjudicatorMode::Remote : AdjudicatorMode::Stub;
    }
    if (f.no_stats_cache) config.stats_cache = false;
    if (config.manifest.empty()) throw Error(ErrorKind::BadConfig, "no manifest given (use --manifest or a config file)");
    config.validate();
    return config;
}

void emit(OutputFormat format, const json& structured, const std::string& text) {
    if (format == OutputFormat::Structured) {
        std::cout << structured.dump(2) << '\n';
    } else {
        std::cout << text;
    }
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

std::string ref_list(const std::vector<std::string>& cols) {
    std::string out;
    for (size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    return out;
}

std::string plan_text(const JoinPlan& plan) {
    std::ostringstream out;
    for (const auto& tree : plan.trees) {
        out << "tree " << tree.root << '\n';
        for (const auto& p : tree.paths) {
            out << "  " << p.dimension << " (" << fixed(p.combined_score) << "):";
            if (p.hops.empty()) out << " " << tree.root;
            for (const auto& h : p.hops) out << ' ' << h.from << "->" << h.to << (h.synthetic ? "*" : "");
            out << '\n';
        }
    }
    for (const auto& w : plan.warnings) out << "warning: " << w << '\n';
    return out.str();
}

std::string funnel_text(const Funnel& f) {
    std::ostringstream out;
    out << "candidates " << f.candidates << " (estimate " << f.estimate << "), survivors " << f.survivors
        << ", accepted " << f.accepted << '\n';
    return out.str();
}

std::string metrics_text(const std::string& label, const MetricsReport& m) {
    std::ostringstream out;
    out << label << ": tp " << m.tp << " fp " << m.fp << " fn " << m.fn << "  precision " << fixed(m.precision)
        << " recall " << fixed(m.recall) << " f1 " << fixed(m.f1) << " accuracy " << fixed(m.accuracy)
        << " perfect-recall " << fixed(m.perfect_recall) << '\n';
    for (const auto& w : m.warnings) out << "warning: " << w << '\n';
    return out.str();
}

std::vector<ColumnPair> predicted_pairs(std::span<const InclusionDependency> inds) {
    std::vector<ColumnPair> out;
    for (const auto& [fk, pk] : active_pairs(inds)) out.emplace_back(fk, pk);
    return out;
}

std::filesystem::path graph_output(const RunConfig& config, const std::string& explicit_path) {
    return explicit_path.empty() ? config.output_dir / "graph.json" : std::filesystem::path(explicit_path);
}

int cmd_profile(const RunConfig& config, OutputFormat format) {
    Dataset dataset = ingest(load_manifest(config.manifest));
    std::vector<std::string> warnings;
    const StatsMap stats = profile_dataset(dataset, config.pipeline(), &warnings);
    for (const auto& w : dataset.warnings) warnings.push_back(w.table + ": " + w.message);
    json columns = json::array();
    std::ostringstream text;
    for (const auto& [ref, s] : stats) {
        columns.push_back({{"table", s.table},
                           {"column", s.column},
                           {"type", std::string(to_string(s.type_tag))},
                           {"rows", s.rows},
                           {"count", s.count},
                           {"distinct", s.distinct},
                           {"exact", s.is_exact},
                           {"parse_errors", s.parse_errors}});
        text << ref.str() << "  " << to_string(s.type_tag) << "  rows " << s.rows << "  count " << s.count
             << "  distinct " << s.distinct << (s.is_exact ? "" : "~") << '\n';
    }
    for (const auto& w : warnings) text << "warning: " << w << '\n';
    emit(format, {{"columns", columns}, {"warnings", warnings}}, text.str());
    return 0;
}

int cmd_infer(const RunConfig& config, OutputFormat format, const std::string& output, const std::string& history_log) {
    std::optional<std::filesystem::path> log;
    if (!history_log.empty()) log = history_log;
    const TrainingOutput out = train_once(config, {}, TrainMode::Full, log);
    const auto path = graph_output(config, output);
    write_file_atomic(path, render_document(out.document));

    std::ostringstream text;
    text << "keys:\n";
    for (const auto& d : out.result.decisions) {
        text << "  " << d.table << ": " << (d.selected ? ref_list(*d.selected) : std::string("(none)"))
             << (d.clear_winner ? "" : "  [pool " + std::to_string(d.pool.size()) + "]") << '\n';
    }
    text << funnel_text(out.result.funnel);
    text << "joins:\n";
    for (const auto& ind : out.result.inds) {
        if (is_active(ind.status)) {
            text << "  " << ind.id() << "  score " << fixed(ind.score) << "  " << to_string(ind.status)
                 << (ind.default_edge ? "" : "  (alternate)") << '\n';
        }
    }
    text << plan_text(out.result.plan);
    for (const auto& w : out.result.warnings) text << "warning: " << w << '\n';
    text << "wrote " << path.string() << '\n';
    json structured = out.document;
    structured["output"] = path.string();
    emit(format, structured, text.str());
    return 0;
}

int cmd_history(const RunConfig& config, OutputFormat format, const std::string& log_path, const std::string& output) {
    const TrainingOutput out = train_once(config, {}, TrainMode::Full, std::filesystem::path(log_path));
    const auto path = graph_output(config, output);
    write_file_atomic(path, render_document(out.document));
    const HistoryReport& h = *out.result.history;
    std::ostringstream text;
    text << "statements " << h.statements << ", parsed " << h.parsed << ", skipped " << h.skipped << '\n'
         << "evidence valid " << h.valid << ", invalid " << h.invalid << ", unresolved " << h.unresolved << '\n'
         << "matched " << h.matched << " existing, added " << h.added << " new\n";
    for (const auto& s : h.skipped_items) text << "skipped #" << s.index << " at " << s.position << ": " << s.reason << '\n';
    text << "wrote " << path.string() << '\n';
    emit(format, h.to_json(), text.str());
    return 0;
}

int cmd_eval(const RunConfig* config, OutputFormat format, const std::string& truth_path, const std::string& graph_path) {
    const GroundTruth truth = load_truth(truth_path);
    std::vector<PrimaryKeyDecision> decisions;
    std::vector<InclusionDependency> inds;
    if (!graph_path.empty()) {
        const json doc = load_document(graph_path);
        inds = inds_from_document(doc);
        decisions = decisions_from_document(doc);
    } else {
        if (config == nullptr) throw Error(ErrorKind::BadConfig, "eval needs --graph or a manifest");
        TrainingOutput out = train_once(*config, {}, TrainMode::Full, std::nullopt);
        inds = std::move(out.result.inds);
        decisions = std::move(out.result.decisions);
    }
    const MetricsReport pk = evaluate_pk(decisions, truth.pks);
    const MetricsReport joins = evaluate_joins(predicted_pairs(inds), truth.fks);
    std::ostringstream text;
    text << metrics_text("keys", pk) << metrics_text("joins", joins);
    for (const auto& item : joins.items) {
        if (item.at("result") != "match") text << "  " << item.at("result").get<std::string>() << " " << item.at("join").get<std::string>() << '\n';
    }
    emit(format, {{"primary_keys", pk.to_json()}, {"joins", joins.to_json()}}, text.str());
    return 0;
}

struct Prepared {
    Dataset dataset;
    StatsMap stats;
    std::vector<PrimaryKeyDecision> decisions;
};

Prepared prepare(const RunConfig& config) {
    Prepared p{ingest(load_manifest(config.manifest)), {}, {}};
    const PipelineConfig pc = config.pipeline();
    p.stats = profile_dataset(p.dataset, pc);
    p.decisions = infer_primary_keys(p.dataset, p.stats, pc.pk);
    return p;
}

int cmd_ablate_threshold(const RunConfig& config, OutputFormat format, size_t points, const std::string& truth_path) {
    const Prepared p = prepare(config);
    const PipelineConfig pc = config.pipeline();
    const SampleMap samples = draw_samples(p.dataset, pc.sampling);
    const auto candidates = scored_candidates(p.dataset, p.stats, p.decisions, samples, pc);
    std::vector<ColumnPair> truth;
    if (!truth_path.empty()) truth = load_truth(truth_path).fks;
    const auto grid = threshold_grid(points);
    const auto rows = ablate_threshold(candidates, grid, truth);
    json structured = json::array();
    for (const auto& r : rows) {
        structured.push_back({{"tau", r.tau}, {"survivors", r.survivors}, {"survivor_ids", r.survivor_ids},
                              {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}});
    }
    emit(format, {{"candidates", candidates.size()}, {"rows", structured}}, threshold_csv(rows));
    return 0;
}

int cmd_ablate_sample(const RunConfig& config, OutputFormat format, std::vector<size_t> sizes, double tolerance) {
    const Prepared p = prepare(config);
    std::sort(sizes.begin(), sizes.end());
    const auto ablation = ablate_sample_size(p.dataset, p.stats, p.decisions, sizes, config.pipeline(), tolerance);
    json rows = json::array();
    for (const auto& r : ablation.rows) {
        rows.push_back({{"sample_size", r.sample_size}, {"candidates", r.candidates}, {"survivors", r.survivors},
                        {"scores", r.scores}});
    }
    std::string text = sample_size_csv(ablation);
    text += "# convergence size " + std::to_string(ablation.convergence_size) + "\n";
    emit(format, {{"rows", rows}, {"convergence_size", ablation.convergence_size}}, text);
    return 0;
}

int cmd_serve(const RunConfig& config, const std::string& graph, const std::string& feedback_log,
              const std::string& history_log, const std::string& host, int port) {
    ServiceConfig sc;
    sc.run = config;
    sc.graph_path = graph.empty() ? config.output_dir / "graph.json" : std::filesystem::path(graph);
    sc.feedback_log = feedback_log.empty() ? config.output_dir / "feedback.jsonl" : std::filesystem::path(feedback_log);
    if (!history_log.empty()) sc.history_log = history_log;
    sc.host = host;
    sc.port = port;
    FeedbackService service(sc);
    std::cerr << "serving on " << host << ":" << port << '\n';
    service.listen();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infer primary keys, foreign-key joins and join paths from table data"};
    app.require_subcommand(1);
    Flags f;
    Options o;
    app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    o.manifest = app.add_option("--manifest", f.manifest, "schema manifest");
    o.x = app.add_option("--x", f.x, "key uniqueness tolerance");
    o.tau = app.add_option("--tau", f.tau, "IND score threshold");
    o.sample_size = app.add_option("--sample-size", f.sample_size, "values sampled per column");
    o.seed = app.add_option("--seed", f.seed, "random seed");
    o.adjudicator = app.add_option("--adjudicator", f.adjudicator, "stub or remote")
                        ->check(CLI::IsMember({"stub", "remote"}));
    o.exact_threshold = app.add_option("--exact-threshold", f.exact_threshold, "rows below which distinct counts are exact");
    o.output_dir = app.add_option("--output-dir", f.output_dir, "directory for outputs and caches");
    o.workers = app.add_option("--workers", f.workers, "profiling threads, 0 for all cores");
    app.add_flag("--no-stats-cache", f.no_stats_cache, "always recompute column statistics");
    app.add_option("--output-format", f.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

    auto* profile = app.add_subcommand("profile", "column statistics");

    std::string output, history_log;
    auto* infer = app.add_subcommand("infer", "run the full pipeline and write the join-graph document");
    infer->add_option("--output", output, "join-graph document path");
    infer->add_option("--history-log", history_log, "SQL query log to merge");

    std::string log_path;
    auto* history = app.add_subcommand("history", "mine a SQL query log for join evidence");
    history->add_option("--log", log_path, "SQL query log")->required()->check(CLI::ExistingFile);
    history->add_option("--output", output, "join-graph document path");

    std::string truth_path, graph_path;
    auto* eval = app.add_subcommand("eval", "score keys and joins against ground truth");
    eval->add_option("--truth", truth_path, "ground-truth file")->required();
    eval->add_option("--graph", graph_path, "evaluate an existing join-graph document");

    auto* ablate = app.add_subcommand("ablate", "parameter sweeps");
    ablate->require_subcommand(1);
    size_t points = 21;
    auto* threshold = ablate->add_subcommand("threshold", "survivors and metrics over a threshold grid");
    threshold->add_option("--points", points, "grid points from 0 to 1")->check(CLI::Range(1, 10001));
    threshold->add_option("--truth", truth_path, "ground-truth file");
    std::vector<size_t> sizes{1, 10, 100, 1000, 10000, 100000, 1000000};
    double tolerance = 0.02;
    auto* sample = ablate->add_subcommand("sample", "score stability over sample sizes");
    sample->add_option("--sizes", sizes, "sample sizes")->delimiter(',');
    sample->add_option("--tolerance", tolerance, "largest score change counted as stable");

    std::string feedback_log, host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "review service over HTTP");
    serve->add_option("--graph", graph_path, "join-graph document");
    serve->add_option("--feedback-log", feedback_log, "feedback log (JSONL)");
    serve->add_option("--history-log", history_log, "SQL query log used when retraining");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: kind=bad-config message=" << json(e.what()).dump() << '\n';
        return exit_code(ErrorKind::BadConfig);
    }

    const OutputFormat format = f.format == "structured" ? OutputFormat::Structured : OutputFormat::Text;
    try {
        if (*eval && !graph_path.empty() && f.config.empty() && f.manifest.empty()) {
            return cmd_eval(nullptr, format, truth_path, graph_path);
        }
        const RunConfig config = resolve_config(f, o);
        if (*profile) return cmd_profile(config, format);
        if (*infer) return cmd_infer(config, format, output, history_log);
        if (*history) return cmd_history(config, format, log_path, output);
        if (*eval) return cmd_eval(&config, format, truth_path, graph_path);
        if (*threshold) return cmd_ablate_threshold(config, format, points, truth_path);
        if (*sample) return cmd_ablate_sample(config, format, sizes, tolerance);
        if (*serve) return cmd_serve(config, graph_path, feedback_log, history_log, host, port);
    } catch (const Error& e) {
        std::cerr << "error: kind=" << to_string(e.kind()) << " message=" << json(e.what()).dump() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: kind=unexpected message=" << json(e.what()).dump() << '\n';
        return 1;
    }
    return 0;
}
