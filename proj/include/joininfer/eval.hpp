#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "joininfer/pipeline.hpp"
#include "json.hpp"

namespace joininfer {

using ColumnPair = std::pair<ColumnRef, ColumnRef>;

struct TruthKey {
    std::string table;
    std::vector<std::string> columns;
};

struct GroundTruth {
    std::vector<TruthKey> pks;
    std::vector<ColumnPair> fks;  ///< directed fk -> pk, composite keys expanded per column
};

/// Truth files share the manifest's constraint layout: a "tables" list whose
/// entries carry "declared_pk" and "declared_fks".
GroundTruth parse_truth(const nlohmann::json& j);
GroundTruth load_truth(const std::filesystem::path& path);
GroundTruth truth_from_manifest(const SchemaManifest& manifest);

struct MetricsReport {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    double accuracy = 0.0;  ///< tp / |predicted union truth|
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double perfect_recall = 0.0;
    nlohmann::json items = nlohmann::json::array();
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

MetricsReport metrics_from_counts(size_t tp, size_t fp, size_t fn);

/// Scores per ground-truth key. Perfect recall counts truth keys found
/// anywhere in the decision's candidate pool.
MetricsReport evaluate_pk(std::span<const PrimaryKeyDecision> decisions, std::span<const TruthKey> truth);

/// Exact directed column-pair matching, case-insensitive.
MetricsReport evaluate_joins(std::span<const ColumnPair> predicted, std::span<const ColumnPair> truth);

struct ThresholdRow {
    double tau = 0.0;
    size_t survivors = 0;
    std::vector<std::string> survivor_ids;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Survivor sets and metrics per threshold over scored candidates.
std::vector<ThresholdRow> ablate_threshold(std::span<const InclusionDependency> candidates, std::span<const double> grid,
                                           std::span<const ColumnPair> truth);

/// Evenly spaced grid from 0 to 1 inclusive.
std::vector<double> threshold_grid(size_t points);

struct SampleSizeRow {
    size_t sample_size = 0;
    size_t candidates = 0;
    size_t survivors = 0;
    std::map<std::string, double> scores;  ///< candidate id -> score
};

struct SampleSizeAblation {
    std::vector<SampleSizeRow> rows;
    /// Smallest size from which the candidate set stays fixed and every
    /// score moves by less than `tolerance`; 0 when never reached.
    size_t convergence_size = 0;
};

SampleSizeAblation ablate_sample_size(const Dataset& dataset, const StatsMap& stats,
                                      std::span<const PrimaryKeyDecision> decisions, std::span<const size_t> sizes,
                                      const PipelineConfig& config, double tolerance = 0.02);

/// Flat CSV renderings for plotting.
std::string threshold_csv(std::span<const ThresholdRow> rows);
std::string sample_size_csv(const SampleSizeAblation& ablation);

}  // namespace joininfer
