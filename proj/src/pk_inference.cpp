#include "joininfer/pk_inference.hpp"

#include <algorithm>

#include "joininfer/names.hpp"

namespace joininfer {

std::string KeyCandidate::label() const {
    std::string out;
    for (const auto& c : columns) {
        if (!out.empty()) out += ",";
        out += c;
    }
    return out;
}

std::vector<std::string> PrimaryKeyDecision::single_column_pool() const {
    std::vector<std::string> out;
    for (const auto& c : pool) {
        if (!c.composite()) out.push_back(c.column());
    }
    return out;
}

std::vector<std::string> PrimaryKeyDecision::target_columns() const {
    std::vector<std::string> out = single_column_pool();
    for (const auto& c : pool) {
        for (const auto& col : c.columns) {
            if (std::find(out.begin(), out.end(), col) == out.end()) out.push_back(col);
        }
    }
    return out;
}

bool passes_key_filter(const ColumnStats& s, uint64_t max_distinct, double x) {
    if (s.count == 0) return false;
    const auto distinct = static_cast<double>(s.distinct);
    const auto count = static_cast<double>(s.count);
    const auto maxd = static_cast<double>(max_distinct);
    return distinct >= x * count && distinct <= (2.0 - x) * count && distinct >= x * maxd &&
           distinct <= (2.0 - x) * maxd;
}

double key_score(double name_distance, double distinct_ratio, bool suffix_id, bool suffix_key,
                 const KeyWeights& w) {
    return w.name * name_distance + w.ratio * distinct_ratio + w.id_suffix * (suffix_id ? 1.0 : 0.0) +
           w.key_suffix * (suffix_key ? 1.0 : 0.0);
}

std::vector<KeyCandidate> find_key_candidates(std::span<const ColumnStats> table_stats, double x,
                                              const KeyWeights& weights) {
    if (table_stats.empty()) throw Error(ErrorKind::InvalidInput, "no column statistics for key inference");
    if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::BadConfig, "key filter x must be in (0, 1]");
    uint64_t max_distinct = 0;
    for (const auto& s : table_stats) max_distinct = std::max(max_distinct, s.distinct);

    std::vector<KeyCandidate> out;
    for (const auto& s : table_stats) {
        if (!passes_key_filter(s, max_distinct, x)) continue;
        KeyCandidate c;
        c.table = s.table;
        c.columns = {s.column};
        c.stats = s;
        c.name_distance = name_distance(s.table, s.column);
        c.distinct_ratio = std::min(1.0, static_cast<double>(s.distinct) / static_cast<double>(s.count));
        c.suffix_id = is_named_id(s.column);
        c.suffix_key = is_named_key(s.column);
        c.key_score = key_score(c.name_distance, c.distinct_ratio, c.suffix_id, c.suffix_key, weights);
        out.push_back(std::move(c));
    }
    return out;
}

PrimaryKeyDecision select_primary_key(std::string table, std::vector<KeyCandidate> candidates,
                                      double pool_ratio, size_t pool_cap) {
    std::sort(candidates.begin(), candidates.end(), [](const KeyCandidate& a, const KeyCandidate& b) {
        if (a.key_score != b.key_score) return a.key_score > b.key_score;
        const std::string la = a.label(), lb = b.label();
        if (la.size() != lb.size()) return la.size() < lb.size();
        return la < lb;
    });

    PrimaryKeyDecision d;
    d.table = std::move(table);
    d.scored = candidates;
    if (candidates.empty()) return d;

    const double cutoff = pool_ratio * candidates.front().key_score;
    size_t near_top = 0;
    for (size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].key_score >= cutoff) ++near_top;
    }
    if (near_top == 0) {
        d.clear_winner = true;
        d.selected = candidates.front().columns;
        d.pool = {candidates.front()};
        return d;
    }
    for (const auto& c : candidates) {
        if (d.pool.size() >= pool_cap) break;
        if (c.key_score >= cutoff) d.pool.push_back(c);
    }
    return d;
}

PrimaryKeyDecision infer_primary_key(const std::string& table, std::span<const ColumnStats> table_stats,
                                     const std::optional<std::vector<std::string>>& declared,
                                     const PkConfig& config) {
    std::vector<KeyCandidate> candidates = find_key_candidates(table_stats, config.x, config.weights);
    if (declared) {
        std::erase_if(candidates, [&](const KeyCandidate& c) { return c.columns == *declared; });
        KeyCandidate seed;
        seed.table = table;
        seed.columns = *declared;
        seed.origin = Origin::Declared;
        if (declared->size() == 1) {
            for (const auto& s : table_stats) {
                if (s.column == declared->front()) seed.stats = s;
            }
            seed.name_distance = name_distance(table, declared->front());
            seed.suffix_id = is_named_id(declared->front());
            seed.suffix_key = is_named_key(declared->front());
            if (seed.stats.count > 0) {
                seed.distinct_ratio =
                    std::min(1.0, static_cast<double>(seed.stats.distinct) / static_cast<double>(seed.stats.count));
            }
        }
        seed.key_score = config.weights.total();
        candidates.push_back(std::move(seed));
    }
    return select_primary_key(table, std::move(candidates), config.pool_ratio, config.pool_cap);
}

}  // namespace joininfer
