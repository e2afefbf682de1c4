#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "joininfer/adjudicator.hpp"
#include "joininfer/pipeline.hpp"
#include "joininfer/remote_adjudicator.hpp"
#include "json.hpp"

namespace joininfer {

enum class AdjudicatorMode { Stub, Remote };

struct RunConfig {
    std::filesystem::path manifest;
    double x = 0.95;
    double tau = 0.4;
    size_t sample_size = 1'000'000;
    uint64_t seed = 0;
    AdjudicatorMode adjudicator = AdjudicatorMode::Stub;
    RemoteAdjudicatorConfig remote;
    uint64_t exact_threshold = kDefaultExactThreshold;
    std::filesystem::path output_dir = "out";
    size_t workers = 0;  ///< 0 means available cores
    bool stats_cache = true;
    size_t max_hops = 8;
    size_t blackhole_min_in_degree = 2;

    /// Throws Error(BadConfig) on the first violated invariant.
    void validate() const;

    PipelineConfig pipeline() const;

    /// Settings that influence results; paths to outputs and worker counts
    /// are left out so documents do not depend on them.
    nlohmann::json result_settings() const;
};

/// Reads a config file. Unknown keys are rejected; relative paths resolve
/// against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_json(RunConfig& config, const nlohmann::json& j, const std::filesystem::path& base_dir);

std::unique_ptr<Adjudicator> make_adjudicator(const RunConfig& config);

}  // namespace joininfer
