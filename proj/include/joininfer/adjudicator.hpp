#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "joininfer/ind_inference.hpp"
#include "json.hpp"

namespace joininfer {

enum class Decision { Accept, Reject };

std::string_view to_string(Decision decision);

struct Verdict {
    Decision decision = Decision::Reject;
    double confidence = 0.0;
    std::string rationale;
    /// Set when the judge could not decide (transport or protocol failure).
    std::optional<std::string> error;
};

struct AdjudicationRequest {
    std::string candidate_id;
    ColumnRef fk;
    ColumnRef pk;
    std::vector<std::string> fk_samples;
    std::vector<std::string> pk_samples;
    FeatureVector features;
    double score = 0.0;
    Origin origin = Origin::Statistical;
    bool pk_partial = false;

    nlohmann::json to_json() const;
    static AdjudicationRequest from_json(const nlohmann::json& j);
};

AdjudicationRequest make_request(const InclusionDependency& ind, const SampleMap& samples, size_t sample_values);

struct BindingQuery {
    std::string column;
    /// Tables that contain the column.
    std::vector<std::string> candidate_tables;
    /// Tables named in the statement's FROM clause.
    std::vector<std::string> from_tables;
};

class UnresolvedBinding : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Semantic judge over IND candidates and ambiguous column bindings.
class Adjudicator {
public:
    virtual ~Adjudicator() = default;

    /// One verdict per request, order-aligned.
    virtual std::vector<Verdict> judge(std::span<const AdjudicationRequest> batch) = 0;

    /// Picks the table an unqualified column belongs to. Throws
    /// UnresolvedBinding when no candidate table exists.
    virtual std::string judge_binding(const BindingQuery& query) = 0;
};

/// Deterministic rule table used offline and in tests.
///
/// Accept iff (core-name similarity >= min_name_similarity, or the FK column
/// name contains the PK table stem, or the candidate was declared/user-defined)
/// and card_ratio >= min_card_ratio. Statistical candidates whose PK column is
/// only part of a composite key are rejected.
class RuleAdjudicator final : public Adjudicator {
public:
    struct Rules {
        double min_name_similarity = 0.5;
        double min_card_ratio = 0.1;
    };

    RuleAdjudicator() = default;
    explicit RuleAdjudicator(Rules rules) : rules_(rules) {}

    std::vector<Verdict> judge(std::span<const AdjudicationRequest> batch) override;
    std::string judge_binding(const BindingQuery& query) override;

    Verdict judge_one(const AdjudicationRequest& request) const;

private:
    Rules rules_;
};

/// Contract check on a verdict list; returns a description of the first
/// violation, or nullopt.
std::optional<std::string> check_verdicts(std::span<const AdjudicationRequest> batch,
                                          std::span<const Verdict> verdicts);

nlohmann::json verdict_to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& j);

}  // namespace joininfer
