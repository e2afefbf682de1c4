#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "joininfer/pipeline.hpp"
#include "json.hpp"

namespace joininfer {

inline constexpr int kGraphDocumentVersion = 1;

struct DocumentMeta {
    std::string database;
    nlohmann::json config = nlohmann::json::object();
    std::set<TablePair> excluded;
    std::string mode = "full";
};

nlohmann::json ind_to_json(const InclusionDependency& ind);
InclusionDependency ind_from_json(const nlohmann::json& j);

nlohmann::json decision_to_json(const PrimaryKeyDecision& decision);
nlohmann::json join_plan_to_json(const JoinPlan& plan);

/// The join-graph document: key decisions, IND table, join paths, history
/// evidence summary and funnel counts. Contains no timestamps, so identical
/// inputs render to identical bytes.
nlohmann::json graph_document(const PipelineResult& result, const DocumentMeta& meta);

std::vector<InclusionDependency> inds_from_document(const nlohmann::json& document);

/// Key decisions with their pools; feature details are not restored.
std::vector<PrimaryKeyDecision> decisions_from_document(const nlohmann::json& document);

std::string render_document(const nlohmann::json& document);

nlohmann::json load_document(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace joininfer
