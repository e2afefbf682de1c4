#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "joininfer/ind_inference.hpp"
#include "joininfer/pipeline.hpp"
#include "json.hpp"

namespace joininfer {

enum class FeedbackAction { Confirm, Reject, Override, DefineComposite };

std::string_view to_string(FeedbackAction action);
std::optional<FeedbackAction> parse_feedback_action(std::string_view text);

struct FeedbackRecord {
    std::string ind_id;  ///< empty for define-composite
    FeedbackAction action = FeedbackAction::Confirm;
    /// override: {"pairs": [{"fk": ref, "pk": ref}, ...], "replaces": id?}
    /// define-composite: {"table": name, "columns": [...]}
    nlohmann::json payload = nullptr;
    std::string timestamp;
    std::string actor;
};

nlohmann::json record_to_json(const FeedbackRecord& record);
/// Throws Error(InvalidInput) on a malformed record.
FeedbackRecord record_from_json(const nlohmann::json& j);

/// Splits "t.c->t.c[+...]" into its column pairs.
std::optional<std::vector<std::pair<ColumnRef, ColumnRef>>> parse_ind_id(std::string_view id);

/// Builds the IND described by an override payload.
InclusionDependency user_ind_from_payload(const nlohmann::json& payload);

/// Append-only newline-delimited log.
class FeedbackLog {
public:
    explicit FeedbackLog(std::filesystem::path path);

    /// Writes and flushes one record to disk before returning.
    void append(const FeedbackRecord& record);

    /// Missing file reads as empty. A bad line throws Error(InvalidInput)
    /// naming its line number.
    std::vector<FeedbackRecord> read() const;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

/// State derived from the feedback log; a pure function of record order.
struct FeedbackState {
    std::map<std::string, IndStatus> statuses;              ///< last writer wins per IND id
    std::map<std::string, InclusionDependency> user_inds;   ///< by id
    std::map<std::string, std::vector<std::string>> keys;   ///< composite keys by lowercased table
    std::set<TablePair> excluded;                           ///< pairs holding a confirmed edge
    size_t records = 0;

    void apply(const FeedbackRecord& record);
    nlohmann::json to_json() const;
};

FeedbackState replay(std::span<const FeedbackRecord> records);

/// Checks a record against the INDs currently known; throws
/// Error(NotFound) for unknown ids and Error(InvalidInput) for malformed
/// payloads.
void check_record(const FeedbackRecord& record, std::span<const InclusionDependency> known);

/// Applies feedback statuses and user joins to a pipeline IND list.
std::vector<InclusionDependency> overlay_feedback(std::vector<InclusionDependency> inds, const FeedbackState& state);

enum class TrainMode { Full, Incremental };
std::string_view to_string(TrainMode mode);
std::optional<TrainMode> parse_train_mode(std::string_view text);

/// Pipeline overrides for a retrain. Incremental mode skips candidate
/// generation on confirmed pairs and carries their previous edges forward.
PipelineOverrides retrain_overrides(const FeedbackState& state, TrainMode mode,
                                    std::span<const InclusionDependency> previous);

}  // namespace joininfer
