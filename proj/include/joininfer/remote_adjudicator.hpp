#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include "joininfer/adjudicator.hpp"

namespace joininfer {

struct RemoteAdjudicatorConfig {
    /// Full endpoint URL, e.g. "http://localhost:8080/v1/adjudicate".
    std::string url;
    std::string model = "default";
    /// Name of the environment variable holding the API key.
    std::string api_key_env = "JOININFER_ADJUDICATOR_API_KEY";
    std::chrono::milliseconds timeout{30'000};
    size_t max_in_flight = 4;
    size_t max_retries = 2;
    size_t batch_size = 16;
    std::filesystem::path prompt_template = std::filesystem::path(JOININFER_RESOURCE_DIR) / "adjudicator_prompt_v1.txt";
    std::filesystem::path audit_log;  ///< empty disables transcripts
};

/// Client for a remote language-model judge.
///
/// Each call posts one JSON body holding the rendered prompt and up to
/// `batch_size` requests; the response must carry an order-aligned
/// "verdicts" array. Temperature is pinned to 0. Failed calls are retried up
/// to `max_retries` times, after which every request of that call receives an
/// error verdict.
class RemoteAdjudicator final : public Adjudicator {
public:
    explicit RemoteAdjudicator(RemoteAdjudicatorConfig config);

    std::vector<Verdict> judge(std::span<const AdjudicationRequest> batch) override;
    std::string judge_binding(const BindingQuery& query) override;

    const std::string& prompt_version() const noexcept { return prompt_version_; }

private:
    nlohmann::json post(const nlohmann::json& body);
    std::vector<Verdict> judge_chunk(std::span<const AdjudicationRequest> chunk);
    void audit(const nlohmann::json& request, const std::string& status, const std::string& response);

    RemoteAdjudicatorConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::string prompt_template_;
    std::string prompt_version_;
    std::mutex audit_mutex_;
    std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

}  // namespace joininfer
