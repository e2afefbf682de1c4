#include "joininfer/pipeline.hpp"

#include <algorithm>
#include <future>

#include "joininfer/hashing.hpp"

namespace joininfer {

namespace {

std::string content_key(const TableDecl& decl, const Column& column, const std::string& file_hash,
                        const PipelineConfig& config) {
    return file_hash + ":" + std::string(to_string(column.type())) + ":" + std::to_string(config.exact_threshold) +
           ":" + std::to_string(config.sketch_precision) + ":" + decl.name;
}

}  // namespace

StatsMap profile_dataset(const Dataset& dataset, const PipelineConfig& config, std::vector<std::string>* warnings) {
    std::optional<StatsCache> cache;
    if (config.stats_cache) cache.emplace(*config.stats_cache);

    struct Job {
        const Table* table;
        const Column* column;
        std::string key;
    };
    std::vector<Job> jobs;
    StatsMap out;
    for (const auto& table : dataset.tables) {
        std::string file_hash;
        const TableDecl* decl = dataset.manifest.find_table(table.name);
        if (cache && decl != nullptr && decl->data_source) {
            try {
                file_hash = file_content_hash(decl->data_source->path);
            } catch (const std::exception& e) {
                if (warnings != nullptr) warnings->push_back("stats cache disabled for " + table.name + ": " + e.what());
            }
        }
        for (const auto& column : table.columns) {
            std::string key = file_hash.empty() ? "" : content_key(*decl, column, file_hash, config);
            if (!key.empty()) {
                if (auto hit = cache->lookup(table.name, column.name(), key)) {
                    out.emplace(ColumnRef{table.name, column.name()}, *hit);
                    continue;
                }
            }
            jobs.push_back({&table, &column, std::move(key)});
        }
    }

    auto run = [&](const Job& job) {
        ColumnStats s = profile_column(*job.column, config.exact_threshold, config.sketch_precision);
        s.table = job.table->name;
        s.rows = job.table->row_count();
        return s;
    };
    std::vector<ColumnStats> computed(jobs.size());
    const size_t workers = std::max<size_t>(config.workers, 1);
    if (workers == 1) {
        for (size_t i = 0; i < jobs.size(); ++i) computed[i] = run(jobs[i]);
    } else {
        for (size_t start = 0; start < jobs.size(); start += workers) {
            std::vector<std::future<ColumnStats>> batch;
            for (size_t i = start; i < std::min(jobs.size(), start + workers); ++i) {
                batch.push_back(std::async(std::launch::async, run, std::cref(jobs[i])));
            }
            for (size_t k = 0; k < batch.size(); ++k) computed[start + k] = batch[k].get();
        }
    }
    for (size_t i = 0; i < jobs.size(); ++i) {
        if (cache && !jobs[i].key.empty()) cache->store(computed[i], jobs[i].key);
        out.emplace(ColumnRef{computed[i].table, computed[i].column}, computed[i]);
    }
    if (cache && !jobs.empty()) cache->save();
    return out;
}

std::vector<PrimaryKeyDecision> infer_primary_keys(const Dataset& dataset, const StatsMap& stats,
                                                   const PkConfig& config,
                                                   const std::map<std::string, std::vector<std::string>>& keys) {
    std::vector<PrimaryKeyDecision> out;
    for (const auto& table : dataset.tables) {
        std::vector<ColumnStats> table_stats;
        for (const auto& column : table.columns) {
            auto it = stats.find({table.name, column.name()});
            if (it != stats.end()) table_stats.push_back(it->second);
        }
        std::optional<std::vector<std::string>> declared;
        if (auto k = keys.find(to_lower(table.name)); k != keys.end()) {
            declared = k->second;
        } else if (const TableDecl* decl = dataset.manifest.find_table(table.name)) {
            declared = decl->declared_pk;
        }
        if (table_stats.empty()) {
            out.push_back({table.name, std::nullopt, {}, false, {}});
            continue;
        }
        out.push_back(infer_primary_key(table.name, table_stats, declared, config));
    }
    return out;
}

std::vector<InclusionDependency> scored_candidates(const Dataset& dataset, const StatsMap& stats,
                                                   std::span<const PrimaryKeyDecision> decisions,
                                                   const SampleMap& samples, const PipelineConfig& config,
                                                   const std::set<TablePair>& excluded) {
    const PkValueMap pk_values = build_pk_values(dataset, decisions, stats, config.sampling);
    std::vector<InclusionDependency> candidates = generate_candidates(dataset, decisions, samples, pk_values, excluded);
    const ConstraintSeeds seeds = bootstrap_constraints(dataset.manifest);
    add_declared_seeds(candidates, seeds.inds, dataset, samples, stats, excluded);

    for (size_t k = 0; k < seeds.composite_fks.size(); ++k) {
        const ForeignKeyDecl& fk = seeds.composite_fks[k];
        const std::string& owner = seeds.composite_fk_tables[k];
        if (owner.empty() || excluded.contains(make_table_pair(owner, fk.ref_table))) continue;
        InclusionDependency ind;
        ind.fk = {owner, fk.columns.front()};
        ind.pk = {fk.ref_table, fk.ref_columns.front()};
        for (size_t i = 1; i < fk.columns.size() && i < fk.ref_columns.size(); ++i) {
            ind.extra_pairs.push_back({{owner, fk.columns[i]}, {fk.ref_table, fk.ref_columns[i]}});
        }
        ind.origin = Origin::Declared;
        if (auto s = samples.find(ind.fk); s != samples.end()) ind.fk_distinct = s->second.distinct_count();
        if (auto s = stats.find(ind.pk); s != stats.end()) ind.pk_distinct = s->second.distinct;
        candidates.push_back(std::move(ind));
    }
    score_candidates(candidates, config.weights);
    return candidates;
}

std::vector<std::pair<ColumnRef, ColumnRef>> active_pairs(std::span<const InclusionDependency> inds) {
    std::vector<std::pair<ColumnRef, ColumnRef>> out;
    for (const auto& ind : inds) {
        if (!is_active(ind.status)) continue;
        out.emplace_back(ind.fk, ind.pk);
        for (const auto& p : ind.extra_pairs) out.push_back(p);
    }
    return out;
}

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config, Adjudicator& adjudicator,
                            const PipelineOverrides& overrides, const std::optional<std::string>& history_log) {
    if (dataset.tables.empty()) throw Error(ErrorKind::InvalidInput, "dataset has no tables");
    if (!(config.tau >= 0.0 && config.tau <= 1.0)) throw Error(ErrorKind::BadConfig, "tau must lie in [0, 1]");

    PipelineResult result;
    for (const auto& w : dataset.warnings) result.warnings.push_back(w.table + ": " + w.message);
    result.stats = profile_dataset(dataset, config, &result.warnings);
    result.decisions = infer_primary_keys(dataset, result.stats, config.pk, overrides.keys);
    for (const auto& d : result.decisions) {
        if (!d.selected && d.pool.empty()) result.warnings.push_back("no primary key candidate for table " + d.table);
    }
    result.samples = draw_samples(dataset, config.sampling);

    std::vector<InclusionDependency> candidates =
        scored_candidates(dataset, result.stats, result.decisions, result.samples, config, overrides.excluded);
    result.funnel.estimate = estimate_candidates(dataset.manifest);
    result.funnel.candidates = candidates.size();

    std::vector<InclusionDependency> survivors = prune_by_threshold(candidates, config.tau);
    result.funnel.survivors = survivors.size();
    FinalizeResult finalized = finalize(std::move(survivors), adjudicator, result.samples,
                                        config.adjudication_sample_values);
    result.warnings.insert(result.warnings.end(), finalized.warnings.begin(), finalized.warnings.end());

    std::map<std::string, InclusionDependency> by_id;
    for (auto& c : candidates) {
        if (c.status == IndStatus::Pruned) by_id.emplace(c.id(), std::move(c));
    }
    for (auto& f : finalized.inds) by_id.insert_or_assign(f.id(), std::move(f));
    for (const auto& carried : overrides.carried) by_id.try_emplace(carried.id(), carried);

    result.inds.reserve(by_id.size());
    for (auto& [id, ind] : by_id) result.inds.push_back(std::move(ind));

    if (history_log) {
        HistoryReport report = mine_history(*history_log, dataset, adjudicator, config.validation);
        ConsolidationContext ctx;
        ctx.dataset = &dataset;
        ctx.samples = &result.samples;
        ctx.stats = &result.stats;
        ctx.weights = config.weights;
        for (const auto& d : result.decisions) {
            for (const auto& c : d.target_columns()) {
                if (const Table* t = dataset.find_table(d.table)) {
                    if (const Column* col = t->find(c)) ctx.pk_pool.insert({t->name, col->name()});
                }
            }
        }
        const ConsolidationResult merged = consolidate(result.inds, report.evidence, ctx);
        report.matched = merged.matched;
        report.added = merged.added;
        result.history = std::move(report);
        std::sort(result.inds.begin(), result.inds.end(),
                  [](const InclusionDependency& a, const InclusionDependency& b) { return a.id() < b.id(); });
    }

    for (auto& ind : result.inds) {
        if (auto it = overrides.statuses.find(ind.id()); it != overrides.statuses.end()) ind.status = it->second;
    }
    assign_default_edges(result.inds);
    result.funnel.accepted = static_cast<size_t>(
        std::count_if(result.inds.begin(), result.inds.end(), [](const auto& i) { return is_active(i.status); }));

    std::vector<std::string> tables;
    for (const auto& t : dataset.tables) tables.push_back(t.name);
    result.plan = generate_join_paths(tables, result.inds, config.join_tree);
    result.warnings.insert(result.warnings.end(), result.plan.warnings.begin(), result.plan.warnings.end());
    return result;
}

}  // namespace joininfer
