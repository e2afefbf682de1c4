#include "joininfer/feedback_service.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "joininfer/graph_document.hpp"

namespace joininfer {

using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::NotFound, "file not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotFound: return 404;
        case ErrorKind::InvalidInput:
        case ErrorKind::BadConfig: return 400;
        case ErrorKind::Service: return 409;
        case ErrorKind::Pipeline: return 500;
    }
    return 500;
}

}  // namespace

TrainingOutput train_once(const RunConfig& config, const PipelineOverrides& overrides, TrainMode mode,
                          const std::optional<std::filesystem::path>& history_log) {
    config.validate();
    Dataset dataset = ingest(load_manifest(config.manifest));
    auto adjudicator = make_adjudicator(config);
    std::optional<std::string> log_text;
    if (history_log) log_text = read_text(*history_log);
    TrainingOutput out;
    out.result = run_pipeline(dataset, config.pipeline(), *adjudicator, overrides, log_text);
    DocumentMeta meta;
    meta.database = dataset.manifest.database_name;
    meta.config = config.result_settings();
    meta.excluded = overrides.excluded;
    meta.mode = std::string(to_string(mode));
    out.document = graph_document(out.result, meta);
    return out;
}

FeedbackService::FeedbackService(ServiceConfig config)
    : config_(std::move(config)), log_(config_.feedback_log) {
    const auto records = log_.read();
    state_ = replay(records);
    train_status_ = {{"state", "idle"}, {"run_id", 0}};
    if (std::filesystem::exists(config_.graph_path)) {
        install(load_document(config_.graph_path), std::nullopt);
    } else {
        const auto previous = std::vector<InclusionDependency>{};
        TrainingOutput out = train_once(config_.run, retrain_overrides(state_, TrainMode::Full, previous),
                                        TrainMode::Full, config_.history_log);
        write_file_atomic(config_.graph_path, render_document(out.document));
        std::optional<json> history;
        if (out.result.history) history = out.result.history->to_json();
        install(std::move(out.document), std::move(history));
        mode_history_.push_back("full");
    }
}

FeedbackService::~FeedbackService() {
    stop();
    if (job_.joinable()) job_.join();
}

void FeedbackService::install(json document, std::optional<json> history) {
    std::vector<InclusionDependency> inds = inds_from_document(document);
    std::unique_lock lock(mutex_);
    document_ = std::move(document);
    base_inds_ = std::move(inds);
    if (history) {
        history_ = std::move(*history);
    } else if (document_.contains("history")) {
        history_ = document_.at("history");
    }
}

json FeedbackService::graph() const {
    std::shared_lock lock(mutex_);
    json doc = document_;
    json inds = json::array();
    for (const auto& ind : overlay_feedback(base_inds_, state_)) inds.push_back(ind_to_json(ind));
    doc["inds"] = std::move(inds);
    json excluded = json::array();
    for (const auto& [a, b] : state_.excluded) excluded.push_back({a, b});
    doc["excluded_pairs"] = std::move(excluded);
    doc["feedback"] = state_.to_json();
    doc["training"] = train_status_;
    return doc;
}

json FeedbackService::tables() const {
    std::shared_lock lock(mutex_);
    json out = json::array();
    std::map<std::string, json> keys;
    for (const auto& d : document_.at("primary_keys")) keys[d.at("table").get<std::string>()] = d.at("selected");
    for (const auto& t : document_.at("tables")) {
        const std::string name = t.at("name").get<std::string>();
        json entry{{"name", name}, {"columns", t.at("columns")}, {"primary_key", keys[name]}};
        if (auto k = state_.keys.find(to_lower(name)); k != state_.keys.end()) entry["composite_key"] = k->second;
        out.push_back(std::move(entry));
    }
    return out;
}

json FeedbackService::history_report() const {
    std::shared_lock lock(mutex_);
    return history_.is_null() ? json{{"available", false}} : history_;
}

json FeedbackService::training_status() const {
    std::shared_lock lock(mutex_);
    json s = train_status_;
    s["mode_history"] = mode_history_;
    return s;
}

json FeedbackService::feedback_state() const {
    std::shared_lock lock(mutex_);
    return state_.to_json();
}

json FeedbackService::submit(FeedbackRecord record) {
    if (record.timestamp.empty()) record.timestamp = utc_now();
    std::unique_lock lock(mutex_);
    const auto known = overlay_feedback(base_inds_, state_);
    check_record(record, known);
    if (record.action == FeedbackAction::DefineComposite) {
        const std::string table = record.payload.at("table").get<std::string>();
        const json* decl = nullptr;
        for (const auto& t : document_.at("tables")) {
            if (iequals(t.at("name").get<std::string>(), table)) decl = &t;
        }
        if (decl == nullptr) throw Error(ErrorKind::NotFound, "unknown table '" + table + "'");
        for (const auto& c : record.payload.at("columns")) {
            const bool found = std::any_of(decl->at("columns").begin(), decl->at("columns").end(), [&](const json& col) {
                return iequals(col.at("column").get<std::string>(), c.get<std::string>());
            });
            if (!found) throw Error(ErrorKind::InvalidInput, "table '" + table + "' has no column '" + c.get<std::string>() + "'");
        }
    }
    log_.append(record);
    state_.apply(record);

    const std::string id = record.action == FeedbackAction::Override ? user_ind_from_payload(record.payload).id()
                                                                      : record.ind_id;
    json out{{"action", std::string(to_string(record.action))}, {"records", state_.records}};
    if (!id.empty()) {
        for (const auto& ind : overlay_feedback(base_inds_, state_)) {
            if (ind.id() == id) out["ind"] = ind_to_json(ind);
        }
    }
    return out;
}

json FeedbackService::train(TrainMode mode) const {
    std::vector<InclusionDependency> previous;
    FeedbackState state;
    {
        std::shared_lock lock(mutex_);
        previous = base_inds_;
        state = state_;
    }
    TrainingOutput out = train_once(config_.run, retrain_overrides(state, mode, previous), mode, config_.history_log);
    write_file_atomic(config_.graph_path, render_document(out.document));
    json result{{"document", std::move(out.document)}};
    result["history"] = out.result.history ? out.result.history->to_json() : json(nullptr);
    return result;
}

json FeedbackService::start_training(TrainMode mode) {
    bool expected = false;
    if (!training_.compare_exchange_strong(expected, true)) {
        throw Error(ErrorKind::Service, "a training job is already running");
    }
    if (job_.joinable()) job_.join();
    uint64_t run_id;
    {
        std::unique_lock lock(mutex_);
        run_id = ++run_counter_;
        mode_history_.emplace_back(to_string(mode));
        train_status_ = {{"state", "running"}, {"run_id", run_id}, {"mode", std::string(to_string(mode))}};
    }
    job_ = std::thread([this, mode, run_id] {
        json status{{"run_id", run_id}, {"mode", std::string(to_string(mode))}};
        try {
            json result = train(mode);
            std::optional<json> history;
            if (!result.at("history").is_null()) history = result.at("history");
            install(std::move(result.at("document")), std::move(history));
            status["state"] = "succeeded";
        } catch (const std::exception& e) {
            status["state"] = "failed";
            status["error"] = e.what();
        }
        {
            std::unique_lock lock(mutex_);
            train_status_ = std::move(status);
        }
        training_ = false;
    });
    return {{"run_id", run_id}, {"state", "running"}, {"mode", std::string(to_string(mode))}};
}

void FeedbackService::wait_for_training() {
    if (job_.joinable()) job_.join();
}

void FeedbackService::mount(httplib::Server& server) {
    auto reply = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    };
    auto guarded = [reply](auto fn) {
        return [fn, reply](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                reply(res, http_status(e.kind()), {{"error", e.what()}});
            } catch (const json::exception& e) {
                reply(res, 400, {{"error", std::string("malformed body: ") + e.what()}});
            } catch (const std::exception& e) {
                reply(res, 500, {{"error", e.what()}});
            }
        };
    };
    auto body_json = [](const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        return json::parse(req.body);
    };

    server.Get("/graph", guarded([this, reply](const auto&, auto& res) { reply(res, 200, graph()); }));
    server.Get("/tables", guarded([this, reply](const auto&, auto& res) { reply(res, 200, tables()); }));
    server.Get("/history-report", guarded([this, reply](const auto&, auto& res) { reply(res, 200, history_report()); }));
    server.Get("/train/status", guarded([this, reply](const auto&, auto& res) { reply(res, 200, training_status()); }));

    for (const auto action : {FeedbackAction::Confirm, FeedbackAction::Reject}) {
        const std::string pattern = std::string(R"(/joins/(.+)/)") + std::string(to_string(action));
        server.Post(pattern, guarded([this, reply, body_json, action](const httplib::Request& req, auto& res) {
            FeedbackRecord r;
            r.action = action;
            r.ind_id = req.matches[1];
            r.actor = body_json(req).value("actor", std::string{});
            reply(res, 200, submit(std::move(r)));
        }));
    }
    server.Post("/joins", guarded([this, reply, body_json](const httplib::Request& req, auto& res) {
        FeedbackRecord r;
        r.action = FeedbackAction::Override;
        json body = body_json(req);
        r.actor = body.value("actor", std::string{});
        body.erase("actor");
        r.payload = body;
        r.ind_id = "";
        FeedbackRecord probe = r;
        probe.ind_id = "pending";
        check_record(probe, {});
        r.ind_id = user_ind_from_payload(r.payload).id();
        reply(res, 201, submit(std::move(r)));
    }));
    server.Post("/composite-keys", guarded([this, reply, body_json](const httplib::Request& req, auto& res) {
        FeedbackRecord r;
        r.action = FeedbackAction::DefineComposite;
        json body = body_json(req);
        r.actor = body.value("actor", std::string{});
        body.erase("actor");
        r.payload = body;
        reply(res, 201, submit(std::move(r)));
    }));
    server.Post("/train", guarded([this, reply](const httplib::Request& req, auto& res) {
        const std::string text = req.has_param("mode") ? req.get_param_value("mode") : "incremental";
        const auto mode = parse_train_mode(text);
        if (!mode) throw Error(ErrorKind::InvalidInput, "mode must be 'full' or 'incremental'");
        reply(res, 202, start_training(*mode));
    }));
}

void FeedbackService::listen() {
    server_ = std::make_unique<httplib::Server>();
    mount(*server_);
    if (!server_->bind_to_port(config_.host, config_.port)) {
        throw Error(ErrorKind::Service, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    server_->listen_after_bind();
}

void FeedbackService::stop() {
    if (server_) server_->stop();
}

}  // namespace joininfer
