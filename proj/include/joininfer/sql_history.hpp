#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joininfer/adjudicator.hpp"
#include "joininfer/catalog.hpp"
#include "joininfer/ind_inference.hpp"
#include "json.hpp"

namespace joininfer {

enum class Validation { Unchecked, Valid, Invalid, Unresolved };

std::string_view to_string(Validation v);

struct ColumnMention {
    std::string qualifier;  ///< as written (alias or table); empty when unqualified
    std::string table;      ///< table after alias resolution; empty when unknown
    std::string column;
};

struct JoinEvidence {
    ColumnMention left;
    ColumnMention right;
    size_t source_query_index = 0;
    bool qualified = false;  ///< both sides carried a qualifier
    /// Tables in scope where the predicate appeared, innermost scope first.
    std::vector<std::string> from_tables;
    Validation validated = Validation::Unchecked;
    size_t occurrence_count = 1;
    std::optional<ColumnRef> left_ref;  ///< set by binding
    std::optional<ColumnRef> right_ref;
    std::string reason;
};

struct SkippedStatement {
    size_t index = 0;
    size_t position = 0;  ///< byte offset of the failure, 0 for non-queries
    std::string reason;
};

struct ParseResult {
    std::vector<JoinEvidence> evidence;
    size_t statements = 0;
    size_t parsed = 0;
    std::vector<SkippedStatement> skipped;
};

/// Extracts column = column predicates from ON and WHERE clauses of SELECT
/// statements, including nested subqueries. Never throws: every statement is
/// counted either as parsed or as skipped.
ParseResult parse_queries(std::span<const std::string> statements);
ParseResult parse_log(std::string_view text);

/// Resolves aliases and unqualified columns against the catalog. Unqualified
/// columns bind to the single FROM table holding them, otherwise the
/// adjudicator picks. Unresolvable sides mark the evidence unresolved.
void bind_evidence(std::vector<JoinEvidence>& evidence, const Dataset& dataset, Adjudicator& adjudicator);

struct ValidationConfig {
    size_t probe_limit = 1'000'000;  ///< columns above this many rows are probed through a sample
    uint64_t seed = 0;
};

/// Valid iff the equi-join over the two bound columns yields a matching row
/// pair. Incompatible types are invalid with reason "type-mismatch".
Validation validate_join(JoinEvidence& evidence, const Dataset& dataset, const ValidationConfig& config = {});

/// Aggregates identical predicates (either orientation) into one record
/// with occurrence_count summed. Keeps first-seen order.
std::vector<JoinEvidence> merge_evidence(std::span<const JoinEvidence> evidence);

struct ConsolidationContext {
    const Dataset* dataset = nullptr;
    const SampleMap* samples = nullptr;
    const std::map<ColumnRef, ColumnStats>* stats = nullptr;
    std::set<ColumnRef> pk_pool;  ///< single-column PK-pool members
    IndWeights weights;
};

struct ConsolidationResult {
    size_t matched = 0;  ///< evidence records that supported an existing IND
    size_t added = 0;    ///< new history-derived INDs
};

/// Merges valid evidence into the IND list. Matches add to history_support;
/// novel predicates become history-derived INDs oriented toward the PK-pool
/// side and scored against the whole set. Default and multi-edge flags are
/// re-derived afterwards.
ConsolidationResult consolidate(std::vector<InclusionDependency>& inds, std::span<const JoinEvidence> evidence,
                                const ConsolidationContext& context);

struct HistoryReport {
    size_t statements = 0;
    size_t parsed = 0;
    size_t skipped = 0;
    size_t valid = 0;
    size_t invalid = 0;
    size_t unresolved = 0;
    size_t matched = 0;
    size_t added = 0;
    std::vector<JoinEvidence> evidence;  ///< merged
    std::vector<SkippedStatement> skipped_items;

    nlohmann::json to_json() const;
};

/// Parse, bind, validate and merge in one pass; consolidation is left to
/// the caller.
HistoryReport mine_history(std::string_view log_text, const Dataset& dataset, Adjudicator& adjudicator,
                           const ValidationConfig& config = {});

}  // namespace joininfer
