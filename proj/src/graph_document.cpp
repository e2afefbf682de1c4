#include "joininfer/graph_document.hpp"

#include <fstream>
#include <sstream>

#include <unistd.h>

namespace joininfer {

using nlohmann::json;

namespace {

json ref_json(const ColumnRef& r) { return {{"table", r.table}, {"column", r.column}}; }
ColumnRef ref_from(const json& j) { return {j.at("table").get<std::string>(), j.at("column").get<std::string>()}; }

json features_json(const FeatureVector& f) {
    json j = json::object();
    const auto values = f.as_array();
    for (size_t i = 0; i < values.size(); ++i) j[kFeatureNames[i]] = values[i];
    return j;
}

json candidate_json(const KeyCandidate& c) {
    return {{"columns", c.columns},
            {"key_score", c.key_score},
            {"name_distance", c.name_distance},
            {"distinct_ratio", c.distinct_ratio},
            {"suffix_id", c.suffix_id},
            {"suffix_key", c.suffix_key},
            {"count", c.stats.count},
            {"distinct", c.stats.distinct},
            {"origin", std::string(to_string(c.origin))}};
}

}  // namespace

json ind_to_json(const InclusionDependency& ind) {
    json extra = json::array();
    for (const auto& [f, p] : ind.extra_pairs) extra.push_back({{"fk", ref_json(f)}, {"pk", ref_json(p)}});
    json j{{"id", ind.id()},
           {"fk", ref_json(ind.fk)},
           {"pk", ref_json(ind.pk)},
           {"extra_pairs", extra},
           {"features", features_json(ind.features)},
           {"score", ind.score},
           {"status", std::string(to_string(ind.status))},
           {"origin", std::string(to_string(ind.origin))},
           {"fk_distinct", ind.fk_distinct},
           {"pk_distinct", ind.pk_distinct},
           {"default_edge", ind.default_edge},
           {"multi_edge", ind.multi_edge},
           {"pk_partial", ind.pk_partial},
           {"history_support", ind.history_support},
           {"rationale", ind.rationale},
           {"warning", ind.warning}};
    j["confidence"] = ind.confidence ? json(*ind.confidence) : json(nullptr);
    return j;
}

InclusionDependency ind_from_json(const json& j) {
    InclusionDependency ind;
    ind.fk = ref_from(j.at("fk"));
    ind.pk = ref_from(j.at("pk"));
    for (const auto& e : j.value("extra_pairs", json::array())) {
        ind.extra_pairs.emplace_back(ref_from(e.at("fk")), ref_from(e.at("pk")));
    }
    if (j.contains("features")) {
        const auto& f = j.at("features");
        ind.features.card_ratio = f.value("card_ratio", 0.0);
        ind.features.mult_depend = f.value("mult_depend", 0.0);
        ind.features.mult_refs = f.value("mult_refs", 0.0);
        ind.features.edit_distance = f.value("edit_distance", 0.0);
        ind.features.typical_suffix = f.value("typical_suffix", 0.0);
    }
    ind.score = j.value("score", 0.0);
    const std::string status = j.value("status", std::string{"candidate"});
    const auto parsed_status = parse_ind_status(status);
    if (!parsed_status) throw Error(ErrorKind::InvalidInput, "unknown IND status '" + status + "'");
    ind.status = *parsed_status;
    ind.origin = parse_origin(j.value("origin", std::string{"statistical"})).value_or(Origin::Statistical);
    ind.fk_distinct = j.value("fk_distinct", uint64_t{0});
    ind.pk_distinct = j.value("pk_distinct", uint64_t{0});
    ind.default_edge = j.value("default_edge", false);
    ind.multi_edge = j.value("multi_edge", false);
    ind.pk_partial = j.value("pk_partial", false);
    ind.history_support = j.value("history_support", uint64_t{0});
    ind.rationale = j.value("rationale", std::string{});
    ind.warning = j.value("warning", std::string{});
    if (j.contains("confidence") && !j.at("confidence").is_null()) ind.confidence = j.at("confidence").get<double>();
    return ind;
}

json decision_to_json(const PrimaryKeyDecision& d) {
    json pool = json::array();
    for (const auto& c : d.pool) pool.push_back(candidate_json(c));
    json scored = json::array();
    for (const auto& c : d.scored) scored.push_back(candidate_json(c));
    json j{{"table", d.table}, {"clear_winner", d.clear_winner}, {"pool", pool}, {"scored", scored}};
    j["selected"] = d.selected ? json(*d.selected) : json(nullptr);
    return j;
}

json join_plan_to_json(const JoinPlan& plan) {
    json edges = json::array();
    for (const auto& e : plan.graph.edges) {
        edges.push_back({{"from", e.from}, {"to", e.to}, {"score", e.score}, {"synthetic", e.synthetic},
                         {"ind_id", e.ind_id}});
    }
    json trees = json::array();
    for (const auto& t : plan.trees) {
        json paths = json::array();
        for (const auto& p : t.paths) {
            json hops = json::array();
            for (const auto& h : p.hops) {
                hops.push_back({{"from", h.from}, {"to", h.to}, {"ind_id", h.ind_id}, {"score", h.score},
                                {"synthetic", h.synthetic}});
            }
            paths.push_back({{"dimension", p.dimension},
                             {"hops", hops},
                             {"combined_score", p.combined_score},
                             {"topo_order", p.topo_order}});
        }
        trees.push_back({{"root", t.root}, {"paths", paths}});
    }
    return {{"nodes", plan.graph.nodes}, {"edges", edges}, {"trees", trees}, {"warnings", plan.warnings}};
}

json graph_document(const PipelineResult& result, const DocumentMeta& meta) {
    json tables = json::array();
    std::map<std::string, json> table_columns;
    for (const auto& [ref, s] : result.stats) {
        table_columns[ref.table].push_back({{"column", s.column},
                                            {"type", std::string(to_string(s.type_tag))},
                                            {"count", s.count},
                                            {"distinct", s.distinct},
                                            {"exact", s.is_exact},
                                            {"rows", s.rows},
                                            {"parse_errors", s.parse_errors}});
    }
    for (const auto& d : result.decisions) {
        tables.push_back({{"name", d.table}, {"columns", table_columns[d.table]}});
    }
    json decisions = json::array();
    for (const auto& d : result.decisions) decisions.push_back(decision_to_json(d));
    json inds = json::array();
    for (const auto& i : result.inds) inds.push_back(ind_to_json(i));
    json excluded = json::array();
    for (const auto& [a, b] : meta.excluded) excluded.push_back({a, b});

    json history = nullptr;
    if (result.history) {
        const auto& h = *result.history;
        history = {{"statements", h.statements}, {"parsed", h.parsed},     {"skipped", h.skipped},
                   {"valid", h.valid},           {"invalid", h.invalid},   {"unresolved", h.unresolved},
                   {"matched", h.matched},       {"added", h.added}};
    }

    return {{"version", kGraphDocumentVersion},
            {"database", meta.database},
            {"mode", meta.mode},
            {"config", meta.config},
            {"funnel",
             {{"estimate", result.funnel.estimate},
              {"candidates", result.funnel.candidates},
              {"survivors", result.funnel.survivors},
              {"accepted", result.funnel.accepted}}},
            {"tables", tables},
            {"primary_keys", decisions},
            {"inds", inds},
            {"join_graph", join_plan_to_json(result.plan)},
            {"history", history},
            {"excluded_pairs", excluded},
            {"warnings", result.warnings}};
}

std::vector<InclusionDependency> inds_from_document(const json& document) {
    if (document.value("version", 0) != kGraphDocumentVersion) {
        throw Error(ErrorKind::InvalidInput, "unsupported join-graph document version");
    }
    std::vector<InclusionDependency> out;
    for (const auto& j : document.at("inds")) out.push_back(ind_from_json(j));
    return out;
}

std::vector<PrimaryKeyDecision> decisions_from_document(const json& document) {
    std::vector<PrimaryKeyDecision> out;
    auto candidate = [](const json& c, const std::string& table) {
        KeyCandidate k;
        k.table = table;
        k.columns = c.at("columns").get<std::vector<std::string>>();
        k.key_score = c.value("key_score", 0.0);
        k.origin = parse_origin(c.value("origin", std::string{"statistical"})).value_or(Origin::Statistical);
        return k;
    };
    for (const auto& d : document.at("primary_keys")) {
        PrimaryKeyDecision decision;
        decision.table = d.at("table").get<std::string>();
        if (!d.at("selected").is_null()) decision.selected = d.at("selected").get<std::vector<std::string>>();
        decision.clear_winner = d.value("clear_winner", false);
        for (const auto& c : d.value("pool", json::array())) decision.pool.push_back(candidate(c, decision.table));
        for (const auto& c : d.value("scored", json::array())) decision.scored.push_back(candidate(c, decision.table));
        out.push_back(std::move(decision));
    }
    return out;
}

std::string render_document(const json& document) { return document.dump(2) + "\n"; }

json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "join-graph document not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, "malformed join-graph document " + path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Pipeline, "cannot write " + tmp);
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorKind::Pipeline, "short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace joininfer
