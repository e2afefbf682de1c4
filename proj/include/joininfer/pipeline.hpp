#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joininfer/adjudicator.hpp"
#include "joininfer/catalog.hpp"
#include "joininfer/ind_inference.hpp"
#include "joininfer/join_tree.hpp"
#include "joininfer/pk_inference.hpp"
#include "joininfer/sql_history.hpp"

namespace joininfer {

using StatsMap = std::map<ColumnRef, ColumnStats>;

struct PipelineConfig {
    PkConfig pk;
    double tau = 0.4;
    IndWeights weights;
    SamplingConfig sampling;
    uint64_t exact_threshold = kDefaultExactThreshold;
    int sketch_precision = kDefaultSketchPrecision;
    std::optional<std::filesystem::path> stats_cache;
    JoinTreeConfig join_tree;
    size_t adjudication_sample_values = 20;
    size_t workers = 1;
    ValidationConfig validation;
};

/// Inputs that come from human feedback rather than from the data.
struct PipelineOverrides {
    /// Table pairs skipped during candidate generation (incremental mode).
    std::set<TablePair> excluded;
    /// INDs carried into the result unchanged when not regenerated, e.g.
    /// user-defined joins and confirmed edges of excluded pairs.
    std::vector<InclusionDependency> carried;
    /// Status per IND id, applied after adjudication and history merge.
    std::map<std::string, IndStatus> statuses;
    /// User-declared keys per table (lowercased name); they replace the
    /// manifest's declared key.
    std::map<std::string, std::vector<std::string>> keys;
};

struct Funnel {
    uint64_t estimate = 0;
    size_t candidates = 0;
    size_t survivors = 0;
    size_t accepted = 0;
};

struct PipelineResult {
    StatsMap stats;
    std::vector<PrimaryKeyDecision> decisions;
    SampleMap samples;
    /// Every IND considered, ordered by id: pruned, adjudicated, history and
    /// user edges alike.
    std::vector<InclusionDependency> inds;
    Funnel funnel;
    JoinPlan plan;
    std::optional<HistoryReport> history;
    std::vector<std::string> warnings;
};

/// Column statistics for every column, optionally backed by an on-disk cache.
StatsMap profile_dataset(const Dataset& dataset, const PipelineConfig& config, std::vector<std::string>* warnings = nullptr);

std::vector<PrimaryKeyDecision> infer_primary_keys(const Dataset& dataset, const StatsMap& stats,
                                                   const PkConfig& config,
                                                   const std::map<std::string, std::vector<std::string>>& keys = {});

/// Candidates with features and scores, before thresholding.
std::vector<InclusionDependency> scored_candidates(const Dataset& dataset, const StatsMap& stats,
                                                   std::span<const PrimaryKeyDecision> decisions,
                                                   const SampleMap& samples, const PipelineConfig& config,
                                                   const std::set<TablePair>& excluded = {});

/// profile -> keys -> samples -> candidates -> score -> prune -> adjudicate
/// -> history merge -> feedback statuses -> default edges -> join paths.
PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config, Adjudicator& adjudicator,
                            const PipelineOverrides& overrides = {},
                            const std::optional<std::string>& history_log = std::nullopt);

/// Active edges expanded to directed column pairs.
std::vector<std::pair<ColumnRef, ColumnRef>> active_pairs(std::span<const InclusionDependency> inds);

}  // namespace joininfer
