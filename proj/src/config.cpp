#include "joininfer/config.hpp"

#include <fstream>
#include <set>
#include <thread>

namespace joininfer {

using nlohmann::json;

void RunConfig::validate() const {
    if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::BadConfig, "x must satisfy 0 < x <= 1, got " + std::to_string(x));
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw Error(ErrorKind::BadConfig, "tau must satisfy 0 <= tau <= 1, got " + std::to_string(tau));
    }
    if (sample_size < 1) throw Error(ErrorKind::BadConfig, "sample size must be at least 1");
    if (exact_threshold < 1) throw Error(ErrorKind::BadConfig, "exact-distinct threshold must be at least 1");
    if (max_hops < 1) throw Error(ErrorKind::BadConfig, "max hops must be at least 1");
    if (blackhole_min_in_degree < 2) throw Error(ErrorKind::BadConfig, "blackhole in-degree must be at least 2");
    if (adjudicator == AdjudicatorMode::Remote && remote.url.empty()) {
        throw Error(ErrorKind::BadConfig, "remote adjudicator requires a url");
    }
}

PipelineConfig RunConfig::pipeline() const {
    PipelineConfig p;
    p.pk.x = x;
    p.tau = tau;
    p.sampling.sample_size = sample_size;
    p.sampling.seed = seed;
    p.exact_threshold = exact_threshold;
    p.workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
    if (stats_cache) p.stats_cache = output_dir / "stats_cache.json";
    p.join_tree.max_hops = max_hops;
    p.join_tree.blackhole_min_in_degree = blackhole_min_in_degree;
    p.validation.seed = seed;
    return p;
}

json RunConfig::result_settings() const {
    return {{"x", x},
            {"tau", tau},
            {"sample_size", sample_size},
            {"seed", seed},
            {"adjudicator", adjudicator == AdjudicatorMode::Stub ? "stub" : "remote"},
            {"exact_threshold", exact_threshold},
            {"max_hops", max_hops},
            {"blackhole_min_in_degree", blackhole_min_in_degree}};
}

namespace {

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::BadConfig, "config key '" + key + "' has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void apply_config_json(RunConfig& c, const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorKind::BadConfig, "config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "manifest") {
            c.manifest = resolve(base_dir, get_as<std::string>(value, key));
        } else if (key == "x") {
            c.x = get_as<double>(value, key);
        } else if (key == "tau") {
            c.tau = get_as<double>(value, key);
        } else if (key == "sample_size") {
            c.sample_size = get_as<size_t>(value, key);
        } else if (key == "seed") {
            c.seed = get_as<uint64_t>(value, key);
        } else if (key == "adjudicator") {
            const auto mode = get_as<std::string>(value, key);
            if (mode == "stub") {
                c.adjudicator = AdjudicatorMode::Stub;
            } else if (mode == "remote") {
                c.adjudicator = AdjudicatorMode::Remote;
            } else {
                throw Error(ErrorKind::BadConfig, "adjudicator must be 'stub' or 'remote'");
            }
        } else if (key == "remote") {
            if (!value.is_object()) throw Error(ErrorKind::BadConfig, "config key 'remote' must be an object");
            for (const auto& [rk, rv] : value.items()) {
                const std::string full = "remote." + rk;
                if (rk == "url") c.remote.url = get_as<std::string>(rv, full);
                else if (rk == "model") c.remote.model = get_as<std::string>(rv, full);
                else if (rk == "api_key_env") c.remote.api_key_env = get_as<std::string>(rv, full);
                else if (rk == "timeout_ms") c.remote.timeout = std::chrono::milliseconds(get_as<int64_t>(rv, full));
                else if (rk == "max_in_flight") c.remote.max_in_flight = get_as<size_t>(rv, full);
                else if (rk == "max_retries") c.remote.max_retries = get_as<size_t>(rv, full);
                else if (rk == "batch_size") c.remote.batch_size = get_as<size_t>(rv, full);
                else if (rk == "prompt_template") c.remote.prompt_template = resolve(base_dir, get_as<std::string>(rv, full));
                else if (rk == "audit_log") c.remote.audit_log = resolve(base_dir, get_as<std::string>(rv, full));
                else throw Error(ErrorKind::BadConfig, "unknown config key '" + full + "'");
            }
        } else if (key == "exact_threshold") {
            c.exact_threshold = get_as<uint64_t>(value, key);
        } else if (key == "output_dir") {
            c.output_dir = resolve(base_dir, get_as<std::string>(value, key));
        } else if (key == "workers") {
            c.workers = get_as<size_t>(value, key);
        } else if (key == "stats_cache") {
            c.stats_cache = get_as<bool>(value, key);
        } else if (key == "max_hops") {
            c.max_hops = get_as<size_t>(value, key);
        } else if (key == "blackhole_min_in_degree") {
            c.blackhole_min_in_degree = get_as<size_t>(value, key);
        } else {
            throw Error(ErrorKind::BadConfig, "unknown config key '" + key + "'");
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::BadConfig, "config file not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::BadConfig, "malformed config " + path.string() + ": " + e.what());
    }
    RunConfig c;
    apply_config_json(c, j, path.parent_path());
    return c;
}

std::unique_ptr<Adjudicator> make_adjudicator(const RunConfig& config) {
    if (config.adjudicator == AdjudicatorMode::Remote) return std::make_unique<RemoteAdjudicator>(config.remote);
    return std::make_unique<RuleAdjudicator>();
}

}  // namespace joininfer
