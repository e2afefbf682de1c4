#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "joininfer/config.hpp"
#include "joininfer/feedback.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace joininfer {

struct ServiceConfig {
    RunConfig run;
    std::filesystem::path graph_path;
    std::filesystem::path feedback_log;
    std::optional<std::filesystem::path> history_log;
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// Review state plus retraining. Reads run concurrently; feedback appends
/// and graph swaps are serialized; one retrain job runs at a time.
class FeedbackService {
public:
    /// Loads the graph document (training first when it does not exist) and
    /// replays the feedback log. A corrupt log refuses to start.
    explicit FeedbackService(ServiceConfig config);
    ~FeedbackService();

    FeedbackService(const FeedbackService&) = delete;
    FeedbackService& operator=(const FeedbackService&) = delete;

    nlohmann::json graph() const;
    nlohmann::json tables() const;
    nlohmann::json history_report() const;
    nlohmann::json training_status() const;
    nlohmann::json feedback_state() const;

    /// Validates, appends durably, then applies. Returns the affected IND.
    nlohmann::json submit(FeedbackRecord record);

    /// Starts a background retrain; throws Error(Service) when one is running.
    nlohmann::json start_training(TrainMode mode);
    void wait_for_training();

    /// Registers the HTTP routes on `server`.
    void mount(httplib::Server& server);

    /// Binds and serves until stop() is called.
    void listen();
    void stop();

private:
    nlohmann::json train(TrainMode mode) const;
    void install(nlohmann::json document, std::optional<nlohmann::json> history);

    ServiceConfig config_;
    FeedbackLog log_;
    mutable std::shared_mutex mutex_;
    nlohmann::json document_;
    std::vector<InclusionDependency> base_inds_;
    nlohmann::json history_ = nullptr;
    FeedbackState state_;

    std::atomic<bool> training_{false};
    std::thread job_;
    nlohmann::json train_status_;
    std::vector<std::string> mode_history_;
    uint64_t run_counter_ = 0;

    std::unique_ptr<httplib::Server> server_;
};

/// Runs the full pipeline for a config and renders its join-graph
/// document; also used by the `infer` command.
struct TrainingOutput {
    PipelineResult result;
    nlohmann::json document;
};
TrainingOutput train_once(const RunConfig& config, const PipelineOverrides& overrides, TrainMode mode,
                          const std::optional<std::filesystem::path>& history_log);

}  // namespace joininfer
