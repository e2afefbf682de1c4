#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "joininfer/catalog.hpp"
#include "joininfer/profiler.hpp"

namespace joininfer {

struct KeyWeights {
    double name = 1.0;
    double ratio = 1.0;
    double id_suffix = 1.0;
    double key_suffix = 0.5;

    double total() const noexcept { return name + ratio + id_suffix + key_suffix; }
};

struct PkConfig {
    double x = 0.95;  ///< uniqueness tolerance of the candidate filter, in (0, 1]
    KeyWeights weights;
    double pool_ratio = 0.9;
    size_t pool_cap = 3;
};

struct KeyCandidate {
    std::string table;
    std::vector<std::string> columns;  ///< one entry unless declared/user composite
    ColumnStats stats;
    double name_distance = 0.0;
    double distinct_ratio = 0.0;  ///< distinct / count, clipped to 1 for scoring
    bool suffix_id = false;
    bool suffix_key = false;
    double key_score = 0.0;
    Origin origin = Origin::Statistical;

    const std::string& column() const { return columns.front(); }
    bool composite() const noexcept { return columns.size() > 1; }
    std::string label() const;
};

struct PrimaryKeyDecision {
    std::string table;
    std::optional<std::vector<std::string>> selected;
    std::vector<KeyCandidate> pool;  ///< descending key_score
    bool clear_winner = false;
    std::vector<KeyCandidate> scored;  ///< every candidate considered, descending

    /// Single-column members of the pool; these are never FK sources.
    std::vector<std::string> single_column_pool() const;
    /// IND targets: the single-column pool plus every column of a composite
    /// pool candidate, in first-seen order.
    std::vector<std::string> target_columns() const;
};

/// The five-way uniqueness filter: count > 0 and distinct within
/// [x, 2-x] times both the column count and the table's max distinct.
bool passes_key_filter(const ColumnStats& stats, uint64_t max_distinct, double x);

double key_score(double name_distance, double distinct_ratio, bool suffix_id, bool suffix_key,
                 const KeyWeights& weights = {});

/// Filters and scores the key candidates of one table.
std::vector<KeyCandidate> find_key_candidates(std::span<const ColumnStats> table_stats, double x,
                                              const KeyWeights& weights = {});

/// Sorts candidates (score desc, then shorter name, then lexicographic) and
/// picks a clear winner or keeps a pool of near-top candidates.
PrimaryKeyDecision select_primary_key(std::string table, std::vector<KeyCandidate> candidates,
                                      double pool_ratio = 0.9, size_t pool_cap = 3);

/// Full per-table key inference. A declared key enters as a candidate with
/// the maximal attainable score, bypassing the filter.
PrimaryKeyDecision infer_primary_key(const std::string& table, std::span<const ColumnStats> table_stats,
                                     const std::optional<std::vector<std::string>>& declared,
                                     const PkConfig& config = {});

}  // namespace joininfer
