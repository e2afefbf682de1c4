#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "joininfer/catalog.hpp"
#include "joininfer/pk_inference.hpp"
#include "joininfer/profiler.hpp"

namespace joininfer {

class Adjudicator;

enum class IndStatus {
    Candidate,
    Pruned,
    AdjudicatedAccept,
    AdjudicatedReject,
    Confirmed,
    Rejected,
    HistoryDerived,
    UserDefined,
};

std::string_view to_string(IndStatus status);
std::optional<IndStatus> parse_ind_status(std::string_view text);

/// Statuses whose edges take part in join-tree generation.
bool is_active(IndStatus status) noexcept;

struct FeatureVector {
    double card_ratio = 0.0;
    double mult_depend = 0.0;
    double mult_refs = 0.0;
    double edit_distance = 0.0;
    double typical_suffix = 0.0;

    std::array<double, 5> as_array() const noexcept {
        return {card_ratio, mult_depend, mult_refs, edit_distance, typical_suffix};
    }
};

inline constexpr std::array<const char*, 5> kFeatureNames{"card_ratio", "mult_depend", "mult_refs",
                                                          "edit_distance", "typical_suffix"};

/// Unordered pair of table names, lowercased and sorted.
using TablePair = std::pair<std::string, std::string>;
TablePair make_table_pair(std::string_view a, std::string_view b);

struct Verdict;

struct InclusionDependency {
    ColumnRef fk;
    ColumnRef pk;
    /// Additional column pairs of a composite (user or declared) join.
    std::vector<std::pair<ColumnRef, ColumnRef>> extra_pairs;
    FeatureVector features;
    double score = 0.0;
    IndStatus status = IndStatus::Candidate;
    Origin origin = Origin::Statistical;
    uint64_t fk_distinct = 0;  ///< distinct values in the FK's cleaned sample
    uint64_t pk_distinct = 0;  ///< distinct values of the PK column
    bool default_edge = false;
    bool multi_edge = false;
    bool pk_partial = false;  ///< the PK column is one column of a composite key
    uint64_t history_support = 0;  ///< matching predicates seen in query history
    std::optional<double> confidence;
    std::string rationale;
    std::string warning;

    std::string id() const;
    TablePair table_pair() const { return make_table_pair(fk.table, pk.table); }
};

/// Context that makes scores set-dependent: how many candidates each FK
/// column takes part in and how often each PK column is referenced.
struct ScoringContext {
    std::map<ColumnRef, size_t> dep_count;
    std::map<ColumnRef, size_t> ref_count;
    size_t max_ref_count = 0;

    static ScoringContext from(std::span<const InclusionDependency> candidates);
};

struct IndWeights {
    std::array<double, 5> w{1.0, 1.0, 1.0, 1.0, 1.0};
};

FeatureVector compute_features(const InclusionDependency& ind, const ScoringContext& context);

/// Weighted mean of the five features, so the result stays in [0, 1].
double ind_score(const FeatureVector& features, const IndWeights& weights = {});

/// Computes features and score for every candidate against the frozen set.
void score_candidates(std::vector<InclusionDependency>& candidates, const IndWeights& weights = {});

/// Value set of one PK-pool column used for containment checks.
struct PkValueSet {
    ColumnRef ref;
    TypeTag type_tag = TypeTag::Text;
    std::unordered_set<double> numbers;
    std::unordered_set<std::string> texts;
    uint64_t distinct = 0;  ///< from column statistics
    bool sampled = false;   ///< true when built from a sample of a large table
    bool partial = false;   ///< only part of a composite key, not unique alone

    bool contains_all(const CleanedSample& sample) const;
};

using SampleMap = std::map<ColumnRef, CleanedSample>;
using PkValueMap = std::map<ColumnRef, PkValueSet>;

struct SamplingConfig {
    size_t sample_size = 1'000'000;
    uint64_t seed = 0;
    CleaningConfig cleaning;
    size_t pk_full_threshold = 1'000'000;  ///< PK tables up to this many rows use full value sets
    size_t pk_sample_size = 1'000'000;
};

/// Draws and cleans a sample of every column of every table. Each column gets
/// its own stream seed derived from the base seed and its identity.
SampleMap draw_samples(const Dataset& dataset, const SamplingConfig& config);

/// Value sets for the IND targets of every table (see target_columns).
PkValueMap build_pk_values(const Dataset& dataset, std::span<const PrimaryKeyDecision> decisions,
                           const std::map<ColumnRef, ColumnStats>& stats, const SamplingConfig& config);

/// Candidate A -> B exists iff tags are compatible, A lies outside B's table,
/// A is not a single-column PK-pool member, A's cleaned sample is non-empty, and
/// every sampled value of A is present in B's value set. Pairs of tables in
/// `excluded` are skipped. Output is ordered by (fk, pk).
std::vector<InclusionDependency> generate_candidates(const Dataset& dataset,
                                                     std::span<const PrimaryKeyDecision> decisions,
                                                     const SampleMap& samples, const PkValueMap& pk_values,
                                                     const std::set<TablePair>& excluded = {});

/// Merges declared single-column foreign keys into the candidate list, adding
/// them even when containment failed.
void add_declared_seeds(std::vector<InclusionDependency>& candidates, std::span<const SeedInd> seeds,
                        const Dataset& dataset, const SampleMap& samples, const std::map<ColumnRef, ColumnStats>& stats,
                        const std::set<TablePair>& excluded = {});

/// Marks candidates scoring below tau as pruned and returns the survivors.
/// History-derived candidates are exempt.
std::vector<InclusionDependency> prune_by_threshold(std::vector<InclusionDependency>& candidates, double tau);

struct FinalizeResult {
    std::vector<InclusionDependency> inds;
    std::vector<std::string> warnings;
};

/// Adjudicates survivors in per-table-pair batches, then marks one default
/// edge per accepted table pair. Adjudication failures keep the candidate
/// with status=candidate and a warning.
FinalizeResult finalize(std::vector<InclusionDependency> survivors, Adjudicator& adjudicator,
                        const SampleMap& samples, size_t sample_values = 20);

/// Re-derives default/multi-edge flags over active edges, one group per
/// table pair. Priority: user-defined, confirmed, accepted, history-derived,
/// then score, then id.
void assign_default_edges(std::vector<InclusionDependency>& inds);

}  // namespace joininfer
