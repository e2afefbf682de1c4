#include "joininfer/remote_adjudicator.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include "httplib.h"

namespace joininfer {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "prompt template not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string replace_all(std::string text, std::string_view token, std::string_view with) {
    for (size_t pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + with.size())) {
        text.replace(pos, token.size(), with);
    }
    return text;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RemoteAdjudicator::RemoteAdjudicator(RemoteAdjudicatorConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (config_.url.empty() || scheme_end == std::string::npos) {
        throw Error(ErrorKind::BadConfig, "adjudicator url must be absolute, got '" + config_.url + "'");
    }
    const auto path_start = config_.url.find('/', scheme_end + 3);
    scheme_host_port_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
    if (config_.batch_size == 0 || config_.batch_size > 16) {
        throw Error(ErrorKind::BadConfig, "adjudicator batch size must be in [1, 16]");
    }
    if (config_.max_in_flight == 0 || config_.max_in_flight > 1024) {
        throw Error(ErrorKind::BadConfig, "adjudicator max_in_flight must be in [1, 1024]");
    }
    in_flight_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(config_.max_in_flight));
    prompt_template_ = read_file(config_.prompt_template);
    prompt_version_ = "unversioned";
    const std::string marker = "# version:";
    if (prompt_template_.rfind(marker, 0) == 0) {
        const auto eol = prompt_template_.find('\n');
        std::string v = prompt_template_.substr(marker.size(), eol - marker.size());
        v.erase(0, v.find_first_not_of(' '));
        prompt_version_ = v;
        prompt_template_ = eol == std::string::npos ? "" : prompt_template_.substr(eol + 1);
    }
}

void RemoteAdjudicator::audit(const json& request, const std::string& status, const std::string& response) {
    if (config_.audit_log.empty()) return;
    json entry{{"time", utc_now()}, {"endpoint", config_.url}, {"request", request}, {"status", status},
               {"response", response}};
    std::lock_guard lock(audit_mutex_);
    std::ofstream out(config_.audit_log, std::ios::app);
    out << entry.dump() << "\n";
}

json RemoteAdjudicator::post(const json& body) {
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        in_flight_->acquire();
        auto res = client.Post(path_, headers, body.dump(), "application/json");
        in_flight_->release();
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            audit(body, "error", last_error);
            continue;
        }
        audit(body, std::to_string(res->status), res->body);
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw std::runtime_error(last_error);
}

std::vector<Verdict> RemoteAdjudicator::judge_chunk(std::span<const AdjudicationRequest> chunk) {
    json requests = json::array();
    for (const auto& r : chunk) requests.push_back(r.to_json());
    const json body{{"task", "adjudicate"},
                    {"model", config_.model},
                    {"temperature", 0},
                    {"prompt_version", prompt_version_},
                    {"prompt", replace_all(prompt_template_, "{{requests}}", requests.dump(2))},
                    {"requests", requests}};
    try {
        // A response with the wrong shape counts as a failed attempt, so it is
        // validated inside the retry budget of post().
        for (size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
            const json response = post(body);
            std::vector<Verdict> verdicts;
            try {
                for (const auto& v : response.at("verdicts")) verdicts.push_back(verdict_from_json(v));
            } catch (const std::exception&) {
                continue;
            }
            if (!check_verdicts(chunk, verdicts)) return verdicts;
        }
        throw std::runtime_error("protocol error: verdicts missing or misaligned");
    } catch (const std::exception& e) {
        std::vector<Verdict> failed(chunk.size());
        for (auto& v : failed) {
            v.decision = Decision::Reject;
            v.error = e.what();
            v.rationale = "adjudicator unavailable";
        }
        return failed;
    }
}

std::vector<Verdict> RemoteAdjudicator::judge(std::span<const AdjudicationRequest> batch) {
    std::vector<std::future<std::vector<Verdict>>> pending;
    for (size_t start = 0; start < batch.size(); start += config_.batch_size) {
        const size_t n = std::min(config_.batch_size, batch.size() - start);
        pending.push_back(std::async(std::launch::async,
                                     [this, chunk = batch.subspan(start, n)] { return judge_chunk(chunk); }));
    }
    std::vector<Verdict> out;
    out.reserve(batch.size());
    for (auto& f : pending) {
        auto part = f.get();
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::string RemoteAdjudicator::judge_binding(const BindingQuery& query) {
    if (query.candidate_tables.empty()) {
        throw UnresolvedBinding("column '" + query.column + "' does not exist in any table");
    }
    if (query.candidate_tables.size() == 1) return query.candidate_tables.front();
    const json body{{"task", "bind"},
                    {"model", config_.model},
                    {"temperature", 0},
                    {"prompt_version", prompt_version_},
                    {"column", query.column},
                    {"candidate_tables", query.candidate_tables},
                    {"from_tables", query.from_tables}};
    json response;
    try {
        response = post(body);
    } catch (const std::exception& e) {
        throw UnresolvedBinding("binding of '" + query.column + "' failed: " + e.what());
    }
    const std::string table = response.value("table", std::string{});
    for (const auto& t : query.candidate_tables) {
        if (t == table) return t;
    }
    throw UnresolvedBinding("judge chose '" + table + "', which is not a candidate for '" + query.column + "'");
}

}  // namespace joininfer
