#include "joininfer/ind_inference.hpp"

#include <algorithm>
#include <array>

#include "joininfer/adjudicator.hpp"
#include "joininfer/hashing.hpp"
#include "joininfer/names.hpp"

namespace joininfer {

namespace {

constexpr std::array<std::pair<IndStatus, std::string_view>, 8> kStatusNames{{
    {IndStatus::Candidate, "candidate"},
    {IndStatus::Pruned, "pruned"},
    {IndStatus::AdjudicatedAccept, "adjudicated-accept"},
    {IndStatus::AdjudicatedReject, "adjudicated-reject"},
    {IndStatus::Confirmed, "confirmed"},
    {IndStatus::Rejected, "rejected"},
    {IndStatus::HistoryDerived, "history-derived"},
    {IndStatus::UserDefined, "user-defined"},
}};

}  // namespace

std::string_view to_string(IndStatus status) {
    for (const auto& [s, name] : kStatusNames) {
        if (s == status) return name;
    }
    return "candidate";
}

std::optional<IndStatus> parse_ind_status(std::string_view text) {
    for (const auto& [s, name] : kStatusNames) {
        if (name == text) return s;
    }
    return std::nullopt;
}

bool is_active(IndStatus status) noexcept {
    return status == IndStatus::AdjudicatedAccept || status == IndStatus::Confirmed ||
           status == IndStatus::HistoryDerived || status == IndStatus::UserDefined;
}

TablePair make_table_pair(std::string_view a, std::string_view b) {
    std::string x = to_lower(a), y = to_lower(b);
    if (y < x) std::swap(x, y);
    return {x, y};
}

std::string InclusionDependency::id() const {
    std::string out = fk.str() + "->" + pk.str();
    for (const auto& [f, p] : extra_pairs) out += "+" + f.str() + "->" + p.str();
    return out;
}

// --- scoring ------------------------------------------------------------------------

ScoringContext ScoringContext::from(std::span<const InclusionDependency> candidates) {
    ScoringContext ctx;
    for (const auto& c : candidates) {
        ++ctx.dep_count[c.fk];
        ++ctx.ref_count[c.pk];
    }
    for (const auto& [ref, n] : ctx.ref_count) ctx.max_ref_count = std::max(ctx.max_ref_count, n);
    return ctx;
}

FeatureVector compute_features(const InclusionDependency& ind, const ScoringContext& ctx) {
    FeatureVector f;
    if (ind.pk_distinct > 0) {
        f.card_ratio = std::min(static_cast<double>(ind.fk_distinct) / static_cast<double>(ind.pk_distinct), 1.0);
    }
    auto dep = ctx.dep_count.find(ind.fk);
    const size_t dep_count = dep == ctx.dep_count.end() ? 1 : std::max<size_t>(dep->second, 1);
    f.mult_depend = 1.0 / static_cast<double>(dep_count);
    auto ref = ctx.ref_count.find(ind.pk);
    const size_t ref_count = ref == ctx.ref_count.end() ? 0 : ref->second;
    f.mult_refs = ctx.max_ref_count == 0 ? 0.0
                                         : static_cast<double>(ref_count) / static_cast<double>(ctx.max_ref_count);
    f.edit_distance = name_similarity(ind.fk.column, ind.pk.column);
    f.typical_suffix = has_typical_suffix(ind.fk.column) ? 1.0 : 0.0;
    return f;
}

double ind_score(const FeatureVector& features, const IndWeights& weights) {
    const auto values = features.as_array();
    double sum = 0.0, total = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        sum += weights.w[i] * values[i];
        total += weights.w[i];
    }
    return total > 0.0 ? sum / total : 0.0;
}

void score_candidates(std::vector<InclusionDependency>& candidates, const IndWeights& weights) {
    const ScoringContext ctx = ScoringContext::from(candidates);
    for (auto& c : candidates) {
        c.features = compute_features(c, ctx);
        c.score = ind_score(c.features, weights);
    }
}

// --- value sets -----------------------------------------------------------------------

bool PkValueSet::contains_all(const CleanedSample& sample) const {
    if (!compatible(sample.type_tag, type_tag)) return false;
    if (sample.type_tag == TypeTag::Text) {
        return std::all_of(sample.texts.begin(), sample.texts.end(),
                           [&](const std::string& v) { return texts.contains(v); });
    }
    return std::all_of(sample.numbers.begin(), sample.numbers.end(),
                       [&](double v) { return numbers.contains(v == 0.0 ? 0.0 : v); });
}

SampleMap draw_samples(const Dataset& dataset, const SamplingConfig& config) {
    SampleMap out;
    for (const auto& table : dataset.tables) {
        for (const auto& column : table.columns) {
            const ColumnRef ref{table.name, column.name()};
            const uint64_t seed = derive_seed(config.seed, ref.str());
            RawSample raw = draw_sample(column, config.sample_size, seed);
            CleanedSample cleaned = clean_sample(raw, column.type(), config.cleaning);
            cleaned.table = table.name;
            out.emplace(ref, std::move(cleaned));
        }
    }
    return out;
}

PkValueMap build_pk_values(const Dataset& dataset, std::span<const PrimaryKeyDecision> decisions,
                           const std::map<ColumnRef, ColumnStats>& stats, const SamplingConfig& config) {
    PkValueMap out;
    for (const auto& decision : decisions) {
        const Table* table = dataset.find_table(decision.table);
        if (table == nullptr) continue;
        const auto singles = decision.single_column_pool();
        for (const auto& name : decision.target_columns()) {
            const Column* column = table->find(name);
            if (column == nullptr) continue;
            PkValueSet set;
            set.ref = {table->name, column->name()};
            set.partial = std::find(singles.begin(), singles.end(), name) == singles.end();
            set.type_tag = column->type();
            std::vector<size_t> rows;
            if (column->size() > config.pk_full_threshold) {
                set.sampled = true;
                rows = reservoir_positions(column->size(), config.pk_sample_size,
                                           derive_seed(config.seed, "pk:" + set.ref.str()));
            } else {
                rows.resize(column->size());
                for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
            }
            for (size_t row : rows) {
                auto v = column->value(row);
                if (!v) continue;
                if (auto* text = std::get_if<std::string>(&*v)) {
                    set.texts.insert(std::move(*text));
                } else {
                    const double d = std::get<double>(*v);
                    set.numbers.insert(d == 0.0 ? 0.0 : d);
                }
            }
            auto st = stats.find(set.ref);
            set.distinct = st != stats.end() ? st->second.distinct : set.numbers.size() + set.texts.size();
            out.emplace(set.ref, std::move(set));
        }
    }
    return out;
}

std::vector<InclusionDependency> generate_candidates(const Dataset& dataset,
                                                     std::span<const PrimaryKeyDecision> decisions,
                                                     const SampleMap& samples, const PkValueMap& pk_values,
                                                     const std::set<TablePair>& excluded) {
    std::set<ColumnRef> pool_members;
    for (const auto& d : decisions) {
        const Table* table = dataset.find_table(d.table);
        if (table == nullptr) continue;
        for (const auto& name : d.single_column_pool()) {
            if (const Column* c = table->find(name)) pool_members.insert({table->name, c->name()});
        }
    }

    std::vector<InclusionDependency> out;
    for (const auto& [fk_ref, sample] : samples) {
        if (pool_members.contains(fk_ref) || sample.empty()) continue;
        const uint64_t fk_distinct = sample.distinct_count();
        for (const auto& [pk_ref, values] : pk_values) {
            if (iequals(pk_ref.table, fk_ref.table)) continue;
            if (!compatible(sample.type_tag, values.type_tag)) continue;
            if (excluded.contains(make_table_pair(fk_ref.table, pk_ref.table))) continue;
            if (!values.contains_all(sample)) continue;
            InclusionDependency ind;
            ind.fk = fk_ref;
            ind.pk = pk_ref;
            ind.fk_distinct = fk_distinct;
            ind.pk_distinct = values.distinct;
            ind.pk_partial = values.partial;
            out.push_back(std::move(ind));
        }
    }
    std::sort(out.begin(), out.end(), [](const InclusionDependency& a, const InclusionDependency& b) {
        return std::tie(a.fk, a.pk) < std::tie(b.fk, b.pk);
    });
    return out;
}

void add_declared_seeds(std::vector<InclusionDependency>& candidates, std::span<const SeedInd> seeds,
                        const Dataset& dataset, const SampleMap& samples,
                        const std::map<ColumnRef, ColumnStats>& stats, const std::set<TablePair>& excluded) {
    for (const auto& seed : seeds) {
        if (excluded.contains(make_table_pair(seed.fk.table, seed.pk.table))) continue;
        auto it = std::find_if(candidates.begin(), candidates.end(), [&](const InclusionDependency& c) {
            return c.fk == seed.fk && c.pk == seed.pk;
        });
        if (it != candidates.end()) {
            it->origin = Origin::Declared;
            continue;
        }
        const Table* fk_table = dataset.find_table(seed.fk.table);
        const Table* pk_table = dataset.find_table(seed.pk.table);
        if (fk_table == nullptr || pk_table == nullptr) continue;
        InclusionDependency ind;
        ind.fk = seed.fk;
        ind.pk = seed.pk;
        ind.origin = Origin::Declared;
        if (auto s = samples.find(seed.fk); s != samples.end()) ind.fk_distinct = s->second.distinct_count();
        if (auto s = stats.find(seed.pk); s != stats.end()) ind.pk_distinct = s->second.distinct;
        candidates.push_back(std::move(ind));
    }
    std::sort(candidates.begin(), candidates.end(), [](const InclusionDependency& a, const InclusionDependency& b) {
        return std::tie(a.fk, a.pk) < std::tie(b.fk, b.pk);
    });
}

std::vector<InclusionDependency> prune_by_threshold(std::vector<InclusionDependency>& candidates, double tau) {
    std::vector<InclusionDependency> survivors;
    for (auto& c : candidates) {
        if (c.origin == Origin::History || c.score >= tau) {
            survivors.push_back(c);
        } else {
            c.status = IndStatus::Pruned;
        }
    }
    return survivors;
}

FinalizeResult finalize(std::vector<InclusionDependency> survivors, Adjudicator& adjudicator,
                        const SampleMap& samples, size_t sample_values) {
    FinalizeResult result;
    std::map<TablePair, std::vector<size_t>> by_pair;
    for (size_t i = 0; i < survivors.size(); ++i) by_pair[survivors[i].table_pair()].push_back(i);

    for (const auto& [pair, indices] : by_pair) {
        std::vector<AdjudicationRequest> batch;
        batch.reserve(indices.size());
        for (size_t i : indices) batch.push_back(make_request(survivors[i], samples, sample_values));

        std::vector<Verdict> verdicts;
        std::string failure;
        try {
            verdicts = adjudicator.judge(batch);
            if (auto problem = check_verdicts(batch, verdicts)) failure = *problem;
        } catch (const std::exception& e) {
            failure = e.what();
        }
        for (size_t k = 0; k < indices.size(); ++k) {
            InclusionDependency& ind = survivors[indices[k]];
            const Verdict* v = failure.empty() ? &verdicts[k] : nullptr;
            if (v == nullptr || v->error) {
                ind.status = IndStatus::Candidate;
                ind.warning = "adjudication failed: " + (v == nullptr ? failure : *v->error);
                result.warnings.push_back(ind.id() + ": " + ind.warning);
                continue;
            }
            ind.status = v->decision == Decision::Accept ? IndStatus::AdjudicatedAccept : IndStatus::AdjudicatedReject;
            ind.confidence = v->confidence;
            ind.rationale = v->rationale;
        }
    }
    assign_default_edges(survivors);
    result.inds = std::move(survivors);
    return result;
}

namespace {

int status_priority(IndStatus s) {
    switch (s) {
        case IndStatus::UserDefined: return 0;
        case IndStatus::Confirmed: return 1;
        case IndStatus::AdjudicatedAccept: return 2;
        case IndStatus::HistoryDerived: return 3;
        default: return 4;
    }
}

}  // namespace

void assign_default_edges(std::vector<InclusionDependency>& inds) {
    std::map<TablePair, std::vector<size_t>> groups;
    for (size_t i = 0; i < inds.size(); ++i) {
        inds[i].default_edge = false;
        inds[i].multi_edge = false;
        if (is_active(inds[i].status)) groups[inds[i].table_pair()].push_back(i);
    }
    for (auto& [pair, members] : groups) {
        std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
            const auto& x = inds[a];
            const auto& y = inds[b];
            if (status_priority(x.status) != status_priority(y.status))
                return status_priority(x.status) < status_priority(y.status);
            if (x.score != y.score) return x.score > y.score;
            return x.id() < y.id();
        });
        inds[members.front()].default_edge = true;
        if (members.size() > 1) {
            for (size_t k : members) inds[k].multi_edge = true;
        }
    }
}

}  // namespace joininfer
