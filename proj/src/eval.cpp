#include "joininfer/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace joininfer {

using nlohmann::json;

namespace {

std::string pair_key(const ColumnPair& p) {
    return to_lower(p.first.str()) + "->" + to_lower(p.second.str());
}

std::vector<std::string> lowered(const std::vector<std::string>& cols) {
    std::vector<std::string> out;
    for (const auto& c : cols) out.push_back(to_lower(c));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

GroundTruth parse_truth(const json& j) {
    if (!j.is_object() || !j.contains("tables") || !j.at("tables").is_array()) {
        throw Error(ErrorKind::InvalidInput, "truth file needs a 'tables' list");
    }
    GroundTruth truth;
    for (const auto& t : j.at("tables")) {
        const std::string name = t.at("name").get<std::string>();
        if (t.contains("declared_pk") && !t.at("declared_pk").is_null()) {
            truth.pks.push_back({name, t.at("declared_pk").get<std::vector<std::string>>()});
        }
        for (const auto& fk : t.value("declared_fks", json::array())) {
            const auto cols = fk.at("columns").get<std::vector<std::string>>();
            const auto refs = fk.at("ref_columns").get<std::vector<std::string>>();
            const std::string ref_table = fk.at("ref_table").get<std::string>();
            if (cols.size() != refs.size() || cols.empty()) {
                throw Error(ErrorKind::InvalidInput, "truth foreign key on '" + name + "' has mismatched columns");
            }
            for (size_t i = 0; i < cols.size(); ++i) truth.fks.push_back({{name, cols[i]}, {ref_table, refs[i]}});
        }
    }
    return truth;
}

GroundTruth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "truth file not found: " + path.string());
    try {
        return parse_truth(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, "malformed truth file " + path.string() + ": " + e.what());
    }
}

GroundTruth truth_from_manifest(const SchemaManifest& manifest) {
    return parse_truth(manifest_to_json(manifest));
}

MetricsReport metrics_from_counts(size_t tp, size_t fp, size_t fn) {
    MetricsReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.accuracy = tp + fp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    return r;
}

json MetricsReport::to_json() const {
    return {{"tp", tp},
            {"fp", fp},
            {"fn", fn},
            {"accuracy", accuracy},
            {"precision", precision},
            {"recall", recall},
            {"f1", f1},
            {"perfect_recall", perfect_recall},
            {"items", items},
            {"warnings", warnings}};
}

MetricsReport evaluate_pk(std::span<const PrimaryKeyDecision> decisions, std::span<const TruthKey> truth) {
    std::map<std::string, const PrimaryKeyDecision*> by_table;
    for (const auto& d : decisions) by_table[to_lower(d.table)] = &d;

    size_t tp = 0, fn = 0, in_pool = 0;
    json items = json::array();
    std::set<std::string> matched_tables;
    std::vector<std::string> warnings;
    for (const auto& key : truth) {
        const auto want = lowered(key.columns);
        auto it = by_table.find(to_lower(key.table));
        json item{{"table", key.table}, {"truth", key.columns}};
        if (it == by_table.end()) {
            warnings.push_back("table '" + key.table + "' has no key decision");
            ++fn;
            item["result"] = "missing";
            items.push_back(item);
            continue;
        }
        const PrimaryKeyDecision& d = *it->second;
        item["predicted"] = d.selected ? json(*d.selected) : json(nullptr);
        const bool hit = d.selected && lowered(*d.selected) == want;
        const bool pooled = std::any_of(d.pool.begin(), d.pool.end(),
                                        [&](const KeyCandidate& c) { return lowered(c.columns) == want; });
        if (hit) {
            ++tp;
            matched_tables.insert(to_lower(key.table));
        } else {
            ++fn;
        }
        if (pooled) ++in_pool;
        item["result"] = hit ? "match" : "miss";
        item["in_pool"] = pooled;
        items.push_back(item);
    }
    size_t fp = 0;
    for (const auto& d : decisions) {
        if (d.selected && !matched_tables.contains(to_lower(d.table))) {
            ++fp;
            items.push_back({{"table", d.table}, {"predicted", *d.selected}, {"result", "false-positive"}});
        }
    }
    MetricsReport r = metrics_from_counts(tp, fp, fn);
    r.perfect_recall = truth.empty() ? 0.0 : static_cast<double>(in_pool) / static_cast<double>(truth.size());
    r.items = std::move(items);
    r.warnings = std::move(warnings);
    return r;
}

MetricsReport evaluate_joins(std::span<const ColumnPair> predicted, std::span<const ColumnPair> truth) {
    std::set<std::string> truth_keys, pred_keys;
    for (const auto& t : truth) truth_keys.insert(pair_key(t));
    for (const auto& p : predicted) pred_keys.insert(pair_key(p));
    size_t tp = 0, fp = 0, fn = 0;
    json items = json::array();
    for (const auto& k : pred_keys) {
        const bool hit = truth_keys.contains(k);
        hit ? ++tp : ++fp;
        items.push_back({{"join", k}, {"result", hit ? "match" : "false-positive"}});
    }
    for (const auto& k : truth_keys) {
        if (!pred_keys.contains(k)) {
            ++fn;
            items.push_back({{"join", k}, {"result", "false-negative"}});
        }
    }
    MetricsReport r = metrics_from_counts(tp, fp, fn);
    r.perfect_recall = r.recall;
    r.items = std::move(items);
    return r;
}

std::vector<double> threshold_grid(size_t points) {
    std::vector<double> grid;
    if (points == 0) return grid;
    if (points == 1) return {0.0};
    for (size_t i = 0; i < points; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(points - 1));
    return grid;
}

std::vector<ThresholdRow> ablate_threshold(std::span<const InclusionDependency> candidates, std::span<const double> grid,
                                           std::span<const ColumnPair> truth) {
    std::vector<ThresholdRow> rows;
    for (double tau : grid) {
        ThresholdRow row;
        row.tau = tau;
        std::vector<ColumnPair> predicted;
        for (const auto& c : candidates) {
            if (c.origin == Origin::History || c.score >= tau) {
                row.survivor_ids.push_back(c.id());
                predicted.emplace_back(c.fk, c.pk);
                for (const auto& p : c.extra_pairs) predicted.push_back(p);
            }
        }
        std::sort(row.survivor_ids.begin(), row.survivor_ids.end());
        row.survivors = row.survivor_ids.size();
        const MetricsReport m = evaluate_joins(predicted, truth);
        row.precision = m.precision;
        row.recall = m.recall;
        row.f1 = m.f1;
        rows.push_back(std::move(row));
    }
    return rows;
}

SampleSizeAblation ablate_sample_size(const Dataset& dataset, const StatsMap& stats,
                                      std::span<const PrimaryKeyDecision> decisions, std::span<const size_t> sizes,
                                      const PipelineConfig& config, double tolerance) {
    SampleSizeAblation out;
    for (size_t size : sizes) {
        PipelineConfig cfg = config;
        cfg.sampling.sample_size = size;
        const SampleMap samples = draw_samples(dataset, cfg.sampling);
        std::vector<InclusionDependency> candidates = scored_candidates(dataset, stats, decisions, samples, cfg);
        SampleSizeRow row;
        row.sample_size = size;
        row.candidates = candidates.size();
        for (const auto& c : candidates) {
            row.scores[c.id()] = c.score;
            if (c.score >= cfg.tau) ++row.survivors;
        }
        out.rows.push_back(std::move(row));
    }
    for (size_t i = 0; i < out.rows.size(); ++i) {
        bool stable = true;
        for (size_t k = i + 1; k < out.rows.size() && stable; ++k) {
            const auto& a = out.rows[i].scores;
            const auto& b = out.rows[k].scores;
            if (a.size() != b.size()) {
                stable = false;
                break;
            }
            for (const auto& [id, s] : a) {
                auto it = b.find(id);
                if (it == b.end() || std::abs(it->second - s) >= tolerance) {
                    stable = false;
                    break;
                }
            }
        }
        if (stable) {
            out.convergence_size = out.rows[i].sample_size;
            break;
        }
    }
    return out;
}

std::string threshold_csv(std::span<const ThresholdRow> rows) {
    std::ostringstream out;
    out << "tau,survivors,precision,recall,f1\n";
    for (const auto& r : rows) out << r.tau << ',' << r.survivors << ',' << r.precision << ',' << r.recall << ',' << r.f1 << '\n';
    return out.str();
}

std::string sample_size_csv(const SampleSizeAblation& ablation) {
    std::ostringstream out;
    out << "sample_size,candidates,survivors,ind,score\n";
    for (const auto& r : ablation.rows) {
        if (r.scores.empty()) out << r.sample_size << ',' << r.candidates << ',' << r.survivors << ",,\n";
        for (const auto& [id, s] : r.scores) {
            out << r.sample_size << ',' << r.candidates << ',' << r.survivors << ',' << id << ',' << s << '\n';
        }
    }
    return out.str();
}

}  // namespace joininfer
