#include "joininfer/adjudicator.hpp"

#include <algorithm>
#include <unordered_set>

#include "joininfer/names.hpp"

namespace joininfer {

using nlohmann::json;

std::string_view to_string(Decision decision) { return decision == Decision::Accept ? "accept" : "reject"; }

json AdjudicationRequest::to_json() const {
    return {{"candidate_id", candidate_id},
            {"fk", {{"table", fk.table}, {"column", fk.column}}},
            {"pk", {{"table", pk.table}, {"column", pk.column}}},
            {"fk_samples", fk_samples},
            {"pk_samples", pk_samples},
            {"features",
             {{"card_ratio", features.card_ratio},
              {"mult_depend", features.mult_depend},
              {"mult_refs", features.mult_refs},
              {"edit_distance", features.edit_distance},
              {"typical_suffix", features.typical_suffix}}},
            {"score", score},
            {"origin", std::string(joininfer::to_string(origin))},
            {"pk_partial", pk_partial}};
}

AdjudicationRequest AdjudicationRequest::from_json(const json& j) {
    AdjudicationRequest r;
    r.candidate_id = j.at("candidate_id").get<std::string>();
    r.fk = {j.at("fk").at("table").get<std::string>(), j.at("fk").at("column").get<std::string>()};
    r.pk = {j.at("pk").at("table").get<std::string>(), j.at("pk").at("column").get<std::string>()};
    r.fk_samples = j.value("fk_samples", std::vector<std::string>{});
    r.pk_samples = j.value("pk_samples", std::vector<std::string>{});
    const auto& f = j.at("features");
    r.features.card_ratio = f.at("card_ratio").get<double>();
    r.features.mult_depend = f.at("mult_depend").get<double>();
    r.features.mult_refs = f.at("mult_refs").get<double>();
    r.features.edit_distance = f.at("edit_distance").get<double>();
    r.features.typical_suffix = f.at("typical_suffix").get<double>();
    r.score = j.at("score").get<double>();
    r.origin = parse_origin(j.value("origin", std::string{"statistical"})).value_or(Origin::Statistical);
    r.pk_partial = j.value("pk_partial", false);
    return r;
}

namespace {

std::vector<std::string> first_distinct(const CleanedSample* sample, size_t limit) {
    std::vector<std::string> out;
    if (sample == nullptr) return out;
    std::unordered_set<std::string> seen;
    auto take = [&](std::string v) {
        if (out.size() < limit && seen.insert(v).second) out.push_back(std::move(v));
    };
    if (sample->type_tag == TypeTag::Text) {
        for (const auto& t : sample->texts) {
            if (out.size() >= limit) break;
            take(t);
        }
    } else {
        for (double d : sample->numbers) {
            if (out.size() >= limit) break;
            take(format_value(Value{d}));
        }
    }
    return out;
}

}  // namespace

AdjudicationRequest make_request(const InclusionDependency& ind, const SampleMap& samples, size_t sample_values) {
    AdjudicationRequest r;
    r.candidate_id = ind.id();
    r.fk = ind.fk;
    r.pk = ind.pk;
    auto fk_it = samples.find(ind.fk);
    auto pk_it = samples.find(ind.pk);
    r.fk_samples = first_distinct(fk_it == samples.end() ? nullptr : &fk_it->second, sample_values);
    r.pk_samples = first_distinct(pk_it == samples.end() ? nullptr : &pk_it->second, sample_values);
    r.features = ind.features;
    r.score = ind.score;
    r.origin = ind.origin;
    r.pk_partial = ind.pk_partial;
    return r;
}

Verdict RuleAdjudicator::judge_one(const AdjudicationRequest& request) const {
    const double similarity = core_name_similarity(request.fk, request.pk);
    const std::string stem = table_stem(request.pk.table);
    const bool names_table = !stem.empty() && normalize_name(request.fk.column).find(stem) != std::string::npos;
    const bool trusted = request.origin == Origin::Declared || request.origin == Origin::User;
    const bool affinity = similarity >= rules_.min_name_similarity || names_table || trusted;
    const bool cardinality = request.features.card_ratio >= rules_.min_card_ratio;
    const bool references_key = !request.pk_partial || trusted;

    Verdict v;
    if (affinity && cardinality && references_key) {
        v.decision = Decision::Accept;
        v.confidence = std::clamp(0.5 + 0.5 * request.score, 0.0, 1.0);
        if (trusted) {
            v.rationale = "declared or user-defined relationship with plausible cardinality";
        } else if (names_table) {
            v.rationale = "foreign key column names the referenced table '" + request.pk.table + "'";
        } else {
            v.rationale = "column names agree (similarity " + std::to_string(similarity) + ")";
        }
    } else {
        v.decision = Decision::Reject;
        v.confidence = std::clamp(1.0 - 0.5 * request.score, 0.0, 1.0);
        if (!references_key) {
            v.rationale = request.pk.str() + " is one column of a composite key and not unique on its own";
        } else if (!affinity) {
            v.rationale = "no name affinity between " + request.fk.str() + " and " + request.pk.str() +
                          "; value overlap alone suggests coincident value domains";
        } else {
            v.rationale = "cardinality ratio " + std::to_string(request.features.card_ratio) +
                          " is too low for a reference";
        }
    }
    return v;
}

std::vector<Verdict> RuleAdjudicator::judge(std::span<const AdjudicationRequest> batch) {
    std::vector<Verdict> out;
    out.reserve(batch.size());
    for (const auto& r : batch) out.push_back(judge_one(r));
    return out;
}

std::string RuleAdjudicator::judge_binding(const BindingQuery& query) {
    std::vector<std::string> pool = query.candidate_tables;
    if (pool.empty()) {
        throw UnresolvedBinding("column '" + query.column + "' does not exist in any table");
    }
    std::vector<std::string> in_from;
    for (const auto& t : pool) {
        if (std::any_of(query.from_tables.begin(), query.from_tables.end(),
                        [&](const std::string& f) { return normalize_name(f) == normalize_name(t); })) {
            in_from.push_back(t);
        }
    }
    if (!in_from.empty()) pool = std::move(in_from);
    if (pool.size() == 1) return pool.front();
    std::sort(pool.begin(), pool.end(), [&](const std::string& a, const std::string& b) {
        const double da = name_distance(a, query.column);
        const double db = name_distance(b, query.column);
        if (da != db) return da > db;
        return a < b;
    });
    return pool.front();
}

std::optional<std::string> check_verdicts(std::span<const AdjudicationRequest> batch,
                                          std::span<const Verdict> verdicts) {
    if (batch.size() != verdicts.size()) {
        return "verdict count " + std::to_string(verdicts.size()) + " does not match request count " +
               std::to_string(batch.size());
    }
    for (size_t i = 0; i < verdicts.size(); ++i) {
        const Verdict& v = verdicts[i];
        if (v.error) continue;
        if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) {
            return "verdict for " + batch[i].candidate_id + " has confidence outside [0, 1]";
        }
        if (v.decision == Decision::Reject && v.rationale.empty()) {
            return "reject verdict for " + batch[i].candidate_id + " has an empty rationale";
        }
    }
    return std::nullopt;
}

json verdict_to_json(const Verdict& v) {
    json j{{"decision", std::string(to_string(v.decision))}, {"confidence", v.confidence}, {"rationale", v.rationale}};
    if (v.error) j["error"] = *v.error;
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    const auto decision = j.at("decision").get<std::string>();
    if (decision == "accept") {
        v.decision = Decision::Accept;
    } else if (decision == "reject") {
        v.decision = Decision::Reject;
    } else {
        throw std::invalid_argument("unknown decision '" + decision + "'");
    }
    v.confidence = j.at("confidence").get<double>();
    v.rationale = j.value("rationale", std::string{});
    if (j.contains("error")) v.error = j.at("error").get<std::string>();
    return v;
}

}  // namespace joininfer
