#include "joininfer/sql_history.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <unordered_set>

#include "joininfer/hashing.hpp"
#include "joininfer/names.hpp"
#include "joininfer/sql_lexer.hpp"

namespace joininfer {

using nlohmann::json;
using sql::Token;
using sql::TokenKind;

std::string_view to_string(Validation v) {
    switch (v) {
        case Validation::Unchecked: return "unchecked";
        case Validation::Valid: return "valid";
        case Validation::Invalid: return "invalid";
        case Validation::Unresolved: return "unresolved";
    }
    return "unchecked";
}

namespace {

// --- parser -------------------------------------------------------------------------

struct Source {
    std::string table;                     // empty for derived tables
    std::vector<std::string> inner_tables;  // tables of a derived table's FROM
};

struct Scope {
    std::map<std::string, Source> aliases;  // lowercased alias -> source
    std::vector<std::string> tables;        // FROM tables in order
    std::vector<std::string> derived_tables;
    const Scope* outer = nullptr;
};

constexpr size_t kMaxDepth = 64;

bool any_word(const Token& t, std::initializer_list<std::string_view> words) {
    return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return t.is_word(w); });
}

bool is_ident(const Token& t) {
    return t.kind == TokenKind::QuotedIdent || (t.kind == TokenKind::Word && !sql::is_reserved(t.text));
}

class Parser {
public:
    Parser(std::vector<Token> tokens, size_t index) : toks_(std::move(tokens)), index_(index) {}

    std::vector<JoinEvidence> run() {
        const Token& first = peek();
        if (!(first.is_word("SELECT") || first.is_word("WITH") || first.is_symbol("("))) {
            throw NotAQuery{};
        }
        query(nullptr);
        if (peek().is_symbol(")")) fail("unbalanced ')'");
        return std::move(out_);
    }

    struct NotAQuery {};

private:
    const Token& peek(size_t k = 0) const { return toks_[std::min(p_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = peek();
        if (p_ < toks_.size() - 1) ++p_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::End; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " at offset " + std::to_string(peek().pos));
    }

    void expect_symbol(std::string_view s) {
        if (!peek().is_symbol(s)) fail("expected '" + std::string(s) + "'");
        next();
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxDepth) parser.fail("nesting too deep");
        }
        ~DepthGuard() { --parser.depth_; }
        Parser& parser;
    };

    // query := [WITH ctes] body {set-op body} [trailing clauses]
    // Returns the FROM tables of the first SELECT core, used for derived tables.
    std::vector<std::string> query(const Scope* outer) {
        DepthGuard guard(*this);
        if (peek().is_word("WITH")) with_clause(outer);
        std::vector<std::string> tables = query_body(outer);
        while (any_word(peek(), {"UNION", "INTERSECT", "EXCEPT", "MINUS"})) {
            next();
            if (any_word(peek(), {"ALL", "DISTINCT"})) next();
            auto more = query_body(outer);
            tables.insert(tables.end(), more.begin(), more.end());
        }
        // ORDER BY / LIMIT / OFFSET / FETCH: scan for nested subqueries only.
        Scope none;
        none.outer = outer;
        scan_region(region_end(kTrailingStops), none, false);
        return tables;
    }

    std::vector<std::string> query_body(const Scope* outer) {
        if (peek().is_symbol("(")) {
            next();
            auto tables = query(outer);
            expect_symbol(")");
            return tables;
        }
        return select_core(outer);
    }

    void with_clause(const Scope* outer) {
        next();  // WITH
        if (peek().is_word("RECURSIVE")) next();
        while (true) {
            if (!is_ident(peek())) fail("expected common table expression name");
            next();
            if (peek().is_symbol("(")) skip_balanced();
            if (!peek().is_word("AS")) fail("expected AS");
            next();
            while (any_word(peek(), {"NOT", "MATERIALIZED"})) next();
            expect_symbol("(");
            query(outer);
            expect_symbol(")");
            if (!peek().is_symbol(",")) break;
            next();
        }
    }

    std::vector<std::string> select_core(const Scope* outer) {
        if (!peek().is_word("SELECT")) fail("expected SELECT");
        next();
        Scope scope;
        scope.outer = outer;

        // The select list may reference FROM aliases, so scan it after FROM.
        const size_t list_begin = p_;
        const size_t list_end = region_end(kSelectListStops);
        p_ = list_end;

        if (peek().is_word("INTO")) {
            next();
            p_ = region_end(kSelectListStops);
        }
        if (peek().is_word("FROM")) {
            next();
            from_clause(scope);
        }
        const size_t after_from = p_;

        p_ = list_begin;
        scan_region(list_end, scope, false);
        p_ = after_from;

        while (true) {
            if (peek().is_word("WHERE")) {
                next();
                scan_region(region_end(kClauseStops), scope, true);
            } else if (any_word(peek(), {"GROUP", "HAVING", "QUALIFY", "WINDOW"})) {
                next();
                scan_region(region_end(kClauseStops), scope, false);
            } else {
                break;
            }
        }
        return scope.tables;
    }

    void from_clause(Scope& scope) {
        table_ref(scope);
        while (peek().is_symbol(",")) {
            next();
            table_ref(scope);
        }
    }

    static bool join_start(const Token& t) {
        return any_word(t, {"JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL", "OUTER", "SEMI", "ANTI"});
    }

    void table_ref(Scope& scope) {
        DepthGuard guard(*this);
        std::string previous = table_factor(scope);
        while (join_start(peek())) {
            while (!peek().is_word("JOIN")) {
                if (!join_start(peek())) fail("expected JOIN");
                next();
            }
            next();  // JOIN
            std::string current = table_factor(scope);
            if (peek().is_word("ON")) {
                next();
                scan_region(region_end(kOnStops, true), scope, true);
            } else if (peek().is_word("USING")) {
                next();
                expect_symbol("(");
                while (!peek().is_symbol(")")) {
                    if (at_end()) fail("unterminated USING list");
                    const Token& col = next();
                    if (is_ident(col) && !previous.empty() && !current.empty()) {
                        add_evidence({previous, previous, col.text}, {current, current, col.text}, scope);
                    }
                    if (peek().is_symbol(",")) next();
                }
                next();
            }
            previous = current;
        }
    }

    // Returns the table name of a plain factor, empty for derived tables.
    std::string table_factor(Scope& scope) {
        if (peek().is_word("LATERAL")) next();
        if (peek().is_symbol("(")) {
            if (peek(1).is_word("SELECT") || peek(1).is_word("WITH") || peek(1).is_symbol("(")) {
                next();
                Source derived{"", query(&scope)};
                expect_symbol(")");
                const std::string alias = optional_alias();
                scope.derived_tables.insert(scope.derived_tables.end(), derived.inner_tables.begin(),
                                            derived.inner_tables.end());
                if (!alias.empty()) scope.aliases[to_lower(alias)] = std::move(derived);
                return "";
            }
            next();
            table_ref(scope);
            expect_symbol(")");
            optional_alias();
            return "";
        }
        if (!is_ident(peek())) fail("expected table reference");
        std::string name = next().text;
        while (peek().is_symbol(".") && is_ident(peek(1))) {
            next();
            name = next().text;
        }
        if (peek().is_symbol("(")) {  // table function
            skip_balanced();
            const std::string alias = optional_alias();
            if (!alias.empty()) scope.aliases[to_lower(alias)] = Source{};
            return "";
        }
        const std::string alias = optional_alias();
        scope.tables.push_back(name);
        scope.aliases.try_emplace(to_lower(name), Source{name, {}});
        if (!alias.empty()) scope.aliases[to_lower(alias)] = Source{name, {}};
        return name;
    }

    std::string optional_alias() {
        std::string alias;
        if (peek().is_word("AS")) {
            next();
            if (!is_ident(peek())) fail("expected alias");
            alias = next().text;
        } else if (is_ident(peek())) {
            alias = next().text;
        }
        if (!alias.empty() && peek().is_symbol("(")) skip_balanced();  // column alias list
        return alias;
    }

    void skip_balanced() {
        expect_symbol("(");
        size_t depth = 1;
        while (depth > 0) {
            if (at_end()) fail("unbalanced '('");
            const Token& t = next();
            if (t.is_symbol("(")) ++depth;
            if (t.is_symbol(")")) --depth;
        }
    }

    using StopList = std::span<const std::string_view>;
    static constexpr std::array<std::string_view, 15> kSelectListStops{
        "FROM", "INTO", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "UNION",
        "INTERSECT", "EXCEPT", "MINUS", "QUALIFY", "WINDOW", "OFFSET", "FETCH"};
    static constexpr std::array<std::string_view, 13> kClauseStops{
        "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "UNION", "INTERSECT",
        "EXCEPT", "MINUS", "QUALIFY", "WINDOW", "OFFSET", "FETCH"};
    static constexpr std::array<std::string_view, 22> kOnStops{
        "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL", "SEMI", "ANTI", "WHERE", "GROUP",
        "HAVING", "ORDER", "LIMIT", "UNION", "INTERSECT", "EXCEPT", "MINUS", "QUALIFY", "WINDOW", "OFFSET",
        "FETCH"};
    static constexpr std::array<std::string_view, 4> kTrailingStops{"UNION", "INTERSECT", "EXCEPT", "MINUS"};

    // Index of the first depth-0 token at or after p_ that closes the region.
    size_t region_end(StopList stops, bool comma_stops = false) const {
        size_t depth = 0;
        for (size_t k = p_; k < toks_.size(); ++k) {
            const Token& t = toks_[k];
            if (t.kind == TokenKind::End) return k;
            if (t.is_symbol("(")) {
                ++depth;
            } else if (t.is_symbol(")")) {
                if (depth == 0) return k;
                --depth;
            } else if (depth == 0) {
                if (t.is_symbol(";")) return k;
                if (comma_stops && t.is_symbol(",")) return k;
                if (t.kind == TokenKind::Word &&
                    std::any_of(stops.begin(), stops.end(), [&](std::string_view w) { return t.is_word(w); })) {
                    return k;
                }
            }
        }
        return toks_.size() - 1;
    }

    // Walks tokens [p_, end): recurses into subqueries and, when `joins` is
    // set, records column = column predicates at boolean boundaries.
    void scan_region(size_t end, const Scope& scope, bool joins) {
        DepthGuard guard(*this);
        while (p_ < end) {
            if (peek().is_symbol("(") && (peek(1).is_word("SELECT") || peek(1).is_word("WITH"))) {
                next();
                query(&scope);
                expect_symbol(")");
                continue;
            }
            if (joins && at_boundary()) {
                if (auto match = match_predicate(end)) {
                    add_evidence(match->first, match->second, scope);
                    continue;
                }
            }
            next();
        }
        if (p_ > end) fail("clause overran its region");
    }

    bool at_boundary() const {
        if (p_ == 0) return true;
        const Token& prev = toks_[p_ - 1];
        return prev.is_symbol("(") || any_word(prev, {"AND", "OR", "NOT", "ON", "WHERE"});
    }

    // column reference: ident {'.' ident}
    std::optional<std::pair<std::vector<std::string>, size_t>> column_ref(size_t k, size_t end) const {
        if (k >= end || !is_ident(toks_[k])) return std::nullopt;
        std::vector<std::string> parts{toks_[k].text};
        ++k;
        while (k + 1 < end && toks_[k].is_symbol(".") && is_ident(toks_[k + 1])) {
            parts.push_back(toks_[k + 1].text);
            k += 2;
        }
        if (k < end && (toks_[k].is_symbol("(") || toks_[k].is_symbol("."))) return std::nullopt;
        return std::make_pair(std::move(parts), k);
    }

    std::optional<std::pair<ColumnMention, ColumnMention>> match_predicate(size_t end) {
        auto lhs = column_ref(p_, end);
        if (!lhs || lhs->second >= end || !toks_[lhs->second].is_symbol("=")) return std::nullopt;
        auto rhs = column_ref(lhs->second + 1, end);
        if (!rhs) return std::nullopt;
        const size_t after = rhs->second;
        if (after < end) {
            const Token& t = toks_[after];
            if (!(t.is_symbol(")") || any_word(t, {"AND", "OR"}))) return std::nullopt;
        }
        p_ = after;
        return std::make_pair(mention(lhs->first), mention(rhs->first));
    }

    static ColumnMention mention(const std::vector<std::string>& parts) {
        ColumnMention m;
        m.column = parts.back();
        if (parts.size() >= 2) m.qualifier = parts[parts.size() - 2];
        return m;
    }

    void resolve(ColumnMention& m, const Scope& scope, std::vector<std::string>& extra_tables) const {
        if (m.qualifier.empty()) return;
        const std::string key = to_lower(m.qualifier);
        for (const Scope* s = &scope; s != nullptr; s = s->outer) {
            auto it = s->aliases.find(key);
            if (it == s->aliases.end()) continue;
            if (it->second.table.empty()) {
                extra_tables.insert(extra_tables.end(), it->second.inner_tables.begin(),
                                    it->second.inner_tables.end());
            } else {
                m.table = it->second.table;
            }
            return;
        }
        m.table = m.qualifier;
    }

    void add_evidence(ColumnMention left, ColumnMention right, const Scope& scope) {
        JoinEvidence e;
        std::vector<std::string> extra;
        resolve(left, scope, extra);
        resolve(right, scope, extra);
        e.qualified = !left.qualifier.empty() && !right.qualifier.empty();
        e.left = std::move(left);
        e.right = std::move(right);
        e.source_query_index = index_;
        for (const Scope* s = &scope; s != nullptr; s = s->outer) {
            for (const auto& t : s->tables) e.from_tables.push_back(t);
            for (const auto& t : s->derived_tables) e.from_tables.push_back(t);
        }
        e.from_tables.insert(e.from_tables.end(), extra.begin(), extra.end());
        std::vector<std::string> unique;
        for (const auto& t : e.from_tables) {
            if (std::none_of(unique.begin(), unique.end(), [&](const std::string& u) { return iequals(u, t); })) {
                unique.push_back(t);
            }
        }
        e.from_tables = std::move(unique);
        out_.push_back(std::move(e));
    }

    std::vector<Token> toks_;
    size_t index_;
    size_t p_ = 0;
    size_t depth_ = 0;
    std::vector<JoinEvidence> out_;
};

}  // namespace

ParseResult parse_queries(std::span<const std::string> statements) {
    ParseResult result;
    result.statements = statements.size();
    for (size_t i = 0; i < statements.size(); ++i) {
        try {
            Parser parser(sql::tokenize(statements[i]), i);
            auto evidence = parser.run();
            ++result.parsed;
            for (auto& e : evidence) result.evidence.push_back(std::move(e));
        } catch (const Parser::NotAQuery&) {
            result.skipped.push_back({i, 0, "not a query"});
        } catch (const ParseError& e) {
            std::string what = e.what();
            size_t pos = 0;
            if (auto at = what.rfind("at offset "); at != std::string::npos) {
                pos = std::stoull(what.substr(at + 10));
            }
            result.skipped.push_back({i, pos, what});
        } catch (const std::exception& e) {
            result.skipped.push_back({i, 0, std::string("parser failure: ") + e.what()});
        }
    }
    return result;
}

ParseResult parse_log(std::string_view text) {
    const auto statements = sql::split_statements(text);
    return parse_queries(statements);
}

// --- binding ------------------------------------------------------------------------

namespace {

const Table* find_table_ci(const Dataset& dataset, std::string_view name) { return dataset.find_table(name); }

std::optional<ColumnRef> bind_side(const ColumnMention& m, const std::vector<std::string>& from_tables,
                                   const Dataset& dataset, Adjudicator& adjudicator, std::string& reason) {
    if (!m.table.empty()) {
        const Table* table = find_table_ci(dataset, m.table);
        if (table == nullptr) {
            reason = "unknown table '" + m.table + "'";
            return std::nullopt;
        }
        const Column* column = table->find(m.column);
        if (column == nullptr) {
            reason = "column '" + m.column + "' not in table '" + table->name + "'";
            return std::nullopt;
        }
        return ColumnRef{table->name, column->name()};
    }

    BindingQuery query;
    query.column = m.column;
    for (const auto& table : dataset.tables) {
        if (table.find(m.column) != nullptr) query.candidate_tables.push_back(table.name);
    }
    std::vector<std::string> in_from;
    for (const auto& f : from_tables) {
        if (const Table* t = find_table_ci(dataset, f)) {
            query.from_tables.push_back(t->name);
            if (t->find(m.column) != nullptr) in_from.push_back(t->name);
        }
    }
    std::string table;
    if (in_from.size() == 1) {
        table = in_from.front();
    } else if (!from_tables.empty() && in_from.empty()) {
        reason = "column '" + m.column + "' exists in no FROM table";
        return std::nullopt;
    } else {
        try {
            table = adjudicator.judge_binding(query);
        } catch (const UnresolvedBinding& e) {
            reason = e.what();
            return std::nullopt;
        } catch (const std::exception& e) {
            reason = std::string("binding failed: ") + e.what();
            return std::nullopt;
        }
    }
    const Table* t = find_table_ci(dataset, table);
    const Column* c = t == nullptr ? nullptr : t->find(m.column);
    if (c == nullptr) {
        reason = "judge bound '" + m.column + "' to '" + table + "', which lacks it";
        return std::nullopt;
    }
    return ColumnRef{t->name, c->name()};
}

}  // namespace

void bind_evidence(std::vector<JoinEvidence>& evidence, const Dataset& dataset, Adjudicator& adjudicator) {
    for (auto& e : evidence) {
        std::string reason;
        e.left_ref = bind_side(e.left, e.from_tables, dataset, adjudicator, reason);
        if (e.left_ref) e.right_ref = bind_side(e.right, e.from_tables, dataset, adjudicator, reason);
        if (!e.left_ref || !e.right_ref) {
            e.validated = Validation::Unresolved;
            e.reason = reason;
        } else if (*e.left_ref == *e.right_ref) {
            e.validated = Validation::Invalid;
            e.reason = "column compared with itself";
        }
    }
}

// --- validation ---------------------------------------------------------------------

namespace {

std::vector<size_t> probe_rows(const Column& column, const ValidationConfig& config, const ColumnRef& ref) {
    if (column.size() > config.probe_limit) {
        return reservoir_positions(column.size(), config.probe_limit, derive_seed(config.seed, "probe:" + ref.str()));
    }
    std::vector<size_t> rows(column.size());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

}  // namespace

Validation validate_join(JoinEvidence& evidence, const Dataset& dataset, const ValidationConfig& config) {
    if (evidence.validated == Validation::Unresolved) return evidence.validated;
    if (!evidence.left_ref || !evidence.right_ref) {
        evidence.validated = Validation::Unresolved;
        evidence.reason = "evidence is not bound";
        return evidence.validated;
    }
    const Table* lt = dataset.find_table(evidence.left_ref->table);
    const Table* rt = dataset.find_table(evidence.right_ref->table);
    const Column* lc = lt == nullptr ? nullptr : lt->find(evidence.left_ref->column);
    const Column* rc = rt == nullptr ? nullptr : rt->find(evidence.right_ref->column);
    if (lc == nullptr || rc == nullptr) {
        evidence.validated = Validation::Unresolved;
        evidence.reason = "bound column not ingested";
        return evidence.validated;
    }
    if (!compatible(lc->type(), rc->type())) {
        evidence.validated = Validation::Invalid;
        evidence.reason = "type-mismatch";
        return evidence.validated;
    }

    // Build on the smaller side, probe with the other.
    const bool left_builds = lc->size() <= rc->size();
    const Column& build = left_builds ? *lc : *rc;
    const Column& probe = left_builds ? *rc : *lc;
    const auto build_rows = probe_rows(build, config, left_builds ? *evidence.left_ref : *evidence.right_ref);
    const auto probe_rows_ = probe_rows(probe, config, left_builds ? *evidence.right_ref : *evidence.left_ref);

    bool match = false;
    if (build.stores_text()) {
        std::unordered_set<std::string_view> keys;
        for (size_t r : build_rows) {
            if (!build.is_null(r)) keys.insert(build.text_at(r));
        }
        for (size_t r : probe_rows_) {
            if (!probe.is_null(r) && keys.contains(probe.text_at(r))) {
                match = true;
                break;
            }
        }
    } else {
        std::unordered_set<double> keys;
        for (size_t r : build_rows) {
            if (!build.is_null(r)) keys.insert(build.number_at(r) == 0.0 ? 0.0 : build.number_at(r));
        }
        for (size_t r : probe_rows_) {
            if (!probe.is_null(r) && keys.contains(probe.number_at(r) == 0.0 ? 0.0 : probe.number_at(r))) {
                match = true;
                break;
            }
        }
    }
    evidence.validated = match ? Validation::Valid : Validation::Invalid;
    evidence.reason = match ? "" : "no matching rows";
    return evidence.validated;
}

// --- merge and consolidate ----------------------------------------------------------

namespace {

std::string side_key(const JoinEvidence& e, bool left) {
    if (left ? e.left_ref.has_value() : e.right_ref.has_value()) {
        return to_lower((left ? e.left_ref : e.right_ref)->str());
    }
    const ColumnMention& m = left ? e.left : e.right;
    return to_lower((m.table.empty() ? "?" + m.qualifier : m.table) + "." + m.column);
}

}  // namespace

std::vector<JoinEvidence> merge_evidence(std::span<const JoinEvidence> evidence) {
    std::vector<JoinEvidence> out;
    std::map<std::pair<std::string, std::string>, size_t> index;
    for (const auto& e : evidence) {
        std::string a = side_key(e, true), b = side_key(e, false);
        if (b < a) std::swap(a, b);
        auto [it, fresh] = index.try_emplace({a, b}, out.size());
        if (fresh) {
            out.push_back(e);
        } else {
            out[it->second].occurrence_count += e.occurrence_count;
        }
    }
    return out;
}

ConsolidationResult consolidate(std::vector<InclusionDependency>& inds, std::span<const JoinEvidence> evidence,
                                const ConsolidationContext& context) {
    ConsolidationResult result;
    std::vector<size_t> fresh;
    for (const auto& e : evidence) {
        if (e.validated != Validation::Valid || !e.left_ref || !e.right_ref) continue;
        const ColumnRef& l = *e.left_ref;
        const ColumnRef& r = *e.right_ref;
        auto it = std::find_if(inds.begin(), inds.end(), [&](const InclusionDependency& ind) {
            return ind.extra_pairs.empty() && ((ind.fk == l && ind.pk == r) || (ind.fk == r && ind.pk == l));
        });
        if (it != inds.end()) {
            it->history_support += e.occurrence_count;
            ++result.matched;
            continue;
        }
        InclusionDependency ind;
        const bool l_pool = context.pk_pool.contains(l);
        const bool r_pool = context.pk_pool.contains(r);
        ind.fk = (l_pool && !r_pool) ? r : l;
        ind.pk = (l_pool && !r_pool) ? l : r;
        ind.origin = Origin::History;
        ind.status = IndStatus::HistoryDerived;
        ind.history_support = e.occurrence_count;
        ind.rationale = "join predicate observed in query history";
        if (context.samples != nullptr) {
            if (auto s = context.samples->find(ind.fk); s != context.samples->end()) {
                ind.fk_distinct = s->second.distinct_count();
            }
        }
        if (context.stats != nullptr) {
            if (auto s = context.stats->find(ind.pk); s != context.stats->end()) ind.pk_distinct = s->second.distinct;
        }
        fresh.push_back(inds.size());
        inds.push_back(std::move(ind));
        ++result.added;
    }
    if (!fresh.empty()) {
        // Existing scores stay frozen; new edges are scored against the merged set.
        const ScoringContext ctx = ScoringContext::from(inds);
        for (size_t i : fresh) {
            inds[i].features = compute_features(inds[i], ctx);
            inds[i].score = ind_score(inds[i].features, context.weights);
        }
    }
    assign_default_edges(inds);
    return result;
}

// --- report -------------------------------------------------------------------------

json HistoryReport::to_json() const {
    json items = json::array();
    for (const auto& e : evidence) {
        auto side = [](const ColumnMention& m, const std::optional<ColumnRef>& ref) {
            json j{{"qualifier", m.qualifier}, {"column", m.column}};
            j["table"] = m.table;
            j["bound"] = ref ? json(ref->str()) : json(nullptr);
            return j;
        };
        items.push_back({{"left", side(e.left, e.left_ref)},
                         {"right", side(e.right, e.right_ref)},
                         {"source_query_index", e.source_query_index},
                         {"qualified", e.qualified},
                         {"validated", std::string(joininfer::to_string(e.validated))},
                         {"occurrence_count", e.occurrence_count},
                         {"reason", e.reason}});
    }
    json skipped_json = json::array();
    for (const auto& s : skipped_items) {
        skipped_json.push_back({{"index", s.index}, {"position", s.position}, {"reason", s.reason}});
    }
    return {{"statements", statements}, {"parsed", parsed},   {"skipped", skipped},
            {"valid", valid},           {"invalid", invalid}, {"unresolved", unresolved},
            {"matched", matched},       {"added", added},     {"evidence", items},
            {"skipped_statements", skipped_json}};
}

HistoryReport mine_history(std::string_view log_text, const Dataset& dataset, Adjudicator& adjudicator,
                           const ValidationConfig& config) {
    ParseResult parsed = parse_log(log_text);
    HistoryReport report;
    report.statements = parsed.statements;
    report.parsed = parsed.parsed;
    report.skipped = parsed.skipped.size();
    report.skipped_items = std::move(parsed.skipped);

    bind_evidence(parsed.evidence, dataset, adjudicator);
    std::vector<JoinEvidence> merged = merge_evidence(parsed.evidence);
    for (auto& e : merged) {
        if (e.validated == Validation::Unchecked) validate_join(e, dataset, config);
        switch (e.validated) {
            case Validation::Valid: report.valid += e.occurrence_count; break;
            case Validation::Invalid: report.invalid += e.occurrence_count; break;
            default: report.unresolved += e.occurrence_count; break;
        }
    }
    report.evidence = std::move(merged);
    return report;
}

}  // namespace joininfer
