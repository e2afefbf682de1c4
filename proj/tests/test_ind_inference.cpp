#include <random>

#include "doctest.h"
#include "joininfer/adjudicator.hpp"
#include "joininfer/ind_inference.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace joininfer;

namespace {

CleanedSample numeric_sample(std::vector<double> values) {
    CleanedSample s;
    s.type_tag = TypeTag::IntegerSigned;
    s.numbers = std::move(values);
    return s;
}

PkValueSet numeric_set(std::initializer_list<double> values) {
    PkValueSet set;
    set.type_tag = TypeTag::IntegerSigned;
    for (double v : values) set.numbers.insert(v);
    set.distinct = values.size();
    return set;
}

InclusionDependency edge(std::string fk_table, std::string fk_col, std::string pk_table, std::string pk_col) {
    InclusionDependency ind;
    ind.fk = {std::move(fk_table), std::move(fk_col)};
    ind.pk = {std::move(pk_table), std::move(pk_col)};
    return ind;
}

}  // namespace

TEST_SUITE("ind") {

TEST_CASE("containment examples") {
    const auto b = numeric_set({1, 2, 3, 4});
    CHECK(b.contains_all(numeric_sample({1, 2, 3})));
    CHECK_FALSE(b.contains_all(numeric_sample({1, 2, 5})));
    CleanedSample text;
    text.type_tag = TypeTag::Text;
    text.texts = {"1"};
    CHECK_FALSE(b.contains_all(text));
}

TEST_CASE("ind_score arithmetic") {
    FeatureVector all{1, 1, 1, 1, 1};
    CHECK(ind_score(all) == doctest::Approx(1.0));
    FeatureVector dep_only{0, 1, 0, 0, 0};
    CHECK(ind_score(dep_only) == doctest::Approx(0.2));
    IndWeights w;
    w.w = {2, 0, 0, 0, 0};
    CHECK(ind_score(FeatureVector{0.5, 1, 1, 1, 1}, w) == doctest::Approx(0.5));
}

TEST_CASE("feature context: mult_depend and mult_refs") {
    std::vector<InclusionDependency> c{edge("a", "x", "b", "id"), edge("a", "x", "c", "id"), edge("d", "y", "b", "id")};
    c[0].fk_distinct = 5;
    c[0].pk_distinct = 10;
    score_candidates(c);
    CHECK(c[0].features.mult_depend == doctest::Approx(0.5));
    CHECK(c[2].features.mult_depend == doctest::Approx(1.0));
    CHECK(c[0].features.mult_refs == doctest::Approx(1.0));
    CHECK(c[1].features.mult_refs == doctest::Approx(0.5));
    CHECK(c[0].features.card_ratio == doctest::Approx(0.5));
}

TEST_CASE("identical names give edit_distance 1") {
    std::vector<InclusionDependency> c{edge("orders", "Cust_ID", "customers", "custid")};
    score_candidates(c);
    CHECK(c[0].features.edit_distance == 1.0);
    CHECK(c[0].features.typical_suffix == 1.0);
}

TEST_CASE("three-table toy schema matches the feature oracle exactly") {
    using testing::TableSpec;
    std::vector<TableSpec> specs;
    specs.push_back({testing::make_table("customers", {testing::int_column("id", testing::iota_values(1, 50)),
                                                       testing::text_column("name", std::vector<std::string>(50, "n"))}),
                     std::nullopt,
                     {}});
    std::vector<long long> cust, prod;
    for (int i = 0; i < 200; ++i) {
        cust.push_back(1 + (i * 7) % 40);
        prod.push_back(1 + (i * 3) % 30);
    }
    specs.push_back({testing::make_table("orders", {testing::int_column("order_id", testing::iota_values(1, 200)),
                                                    testing::int_column("cust_id", cust),
                                                    testing::int_column("prod_id", prod)}),
                     std::nullopt,
                     {}});
    specs.push_back({testing::make_table("products", {testing::int_column("id", testing::iota_values(1, 30))}),
                     std::nullopt,
                     {}});
    const Dataset ds = testing::make_dataset(std::move(specs));
    const auto run = testing::library_candidates(ds);
    std::set<ColumnRef> targets, singles;
    testing::pool_sets(run, targets, singles);
    const auto expected = testing::oracle_inds(ds, targets, singles);

    const auto it = std::find_if(run.candidates.begin(), run.candidates.end(), [](const InclusionDependency& c) {
        return c.fk == ColumnRef{"orders", "cust_id"} && c.pk == ColumnRef{"customers", "id"};
    });
    REQUIRE(it != run.candidates.end());
    const auto want = std::find_if(expected.begin(), expected.end(), [&](const testing::OracleInd& o) {
        return o.fk == it->fk && o.pk == it->pk;
    });
    REQUIRE(want != expected.end());
    const auto got = it->features.as_array();
    for (size_t i = 0; i < 5; ++i) CHECK(got[i] == want->features[i]);
    CHECK(it->score == want->score);
    // cust_id holds 40 of 50 ids; it also fits products.id? no, 40 > 30
    CHECK(it->features.card_ratio == doctest::Approx(40.0 / 50.0));
}

TEST_CASE("random schemas: library candidates equal the exhaustive oracle") {
    std::mt19937_64 rng(101);
    size_t total = 0;
    for (int i = 0; i < 25; ++i) {
        const Dataset ds = testing::random_schema(rng, 6, 400);
        const auto rep = testing::compare_with_oracle(ds);
        total += rep.oracle;
        CHECK_MESSAGE(rep.same_set, "schema " << i << " library " << rep.library << " oracle " << rep.oracle);
        CHECK(rep.max_score_error <= 1e-9);
    }
    MESSAGE("oracle candidates over 25 schemas: " << total);
    CHECK(total >= 50);
}

TEST_CASE("containment soundness and feature ranges on random schemas") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const Dataset ds = testing::random_schema(rng, 5, 300);
        PipelineConfig cfg;
        cfg.sampling.sample_size = 50;  // smaller than most tables
        cfg.sampling.seed = static_cast<uint64_t>(i);
        const StatsMap st = profile_dataset(ds, cfg);
        const auto decisions = infer_primary_keys(ds, st, cfg.pk);
        const SampleMap samples = draw_samples(ds, cfg.sampling);
        const auto cands = scored_candidates(ds, st, decisions, samples, cfg);
        for (const auto& c : cands) {
            const Column* b = ds.find_table(c.pk.table)->find(c.pk.column);
            const auto values = testing::oracle_values(*b);
            const auto& s = samples.at(c.fk);
            for (double v : s.numbers) CHECK(values.contains("n:" + std::to_string(static_cast<long long>(v))));
            for (const auto& v : s.texts) CHECK(values.contains("t:" + v));
            CHECK_FALSE(s.empty());
            CHECK(c.fk.table != c.pk.table);
            for (double f : c.features.as_array()) {
                CHECK(f >= 0.0);
                CHECK(f <= 1.0);
            }
            CHECK(c.score >= 0.0);
            CHECK(c.score <= 1.0);
        }
    }
}

TEST_CASE("threshold pruning") {
    std::mt19937_64 rng(13);
    const Dataset ds = testing::random_schema(rng, 6, 300);
    auto cands = testing::library_candidates(ds).candidates;
    REQUIRE(!cands.empty());
    auto all = cands;
    CHECK(prune_by_threshold(all, 0.0).size() == cands.size());
    auto none = cands;
    CHECK(prune_by_threshold(none, 1.01).empty());
    for (const auto& c : none) CHECK(c.status == IndStatus::Pruned);

    // survivor sets shrink as tau grows
    std::set<std::string> prev;
    for (int k = 0; k <= 20; ++k) {
        auto copy = cands;
        std::set<std::string> ids;
        for (const auto& s : prune_by_threshold(copy, k / 20.0)) ids.insert(s.id());
        if (k > 0) CHECK(std::includes(prev.begin(), prev.end(), ids.begin(), ids.end()));
        prev = ids;
    }

    auto hist = std::vector<InclusionDependency>{edge("a", "x", "b", "y")};
    hist[0].origin = Origin::History;
    hist[0].score = 0.0;
    CHECK(prune_by_threshold(hist, 0.4).size() == 1);
}

TEST_CASE("finalize: empty input, multi-edge groups, fail-open") {
    RuleAdjudicator stub;
    CHECK(finalize({}, stub, {}).inds.empty());

    std::vector<InclusionDependency> two{edge("orders", "customer_id", "customers", "id"),
                                         edge("orders", "billing_customer_id", "customers", "id")};
    for (auto& e : two) {
        e.fk_distinct = 10;
        e.pk_distinct = 10;
    }
    score_candidates(two);
    const auto res = finalize(two, stub, {});
    REQUIRE(res.inds.size() == 2);
    int defaults = 0, multi = 0;
    for (const auto& i : res.inds) {
        CHECK(i.status == IndStatus::AdjudicatedAccept);
        defaults += i.default_edge ? 1 : 0;
        multi += i.multi_edge ? 1 : 0;
    }
    CHECK(defaults == 1);
    CHECK(multi == 2);

    struct Failing : Adjudicator {
        std::vector<Verdict> judge(std::span<const AdjudicationRequest>) override {
            throw Error(ErrorKind::Service, "down");
        }
        std::string judge_binding(const BindingQuery&) override { throw UnresolvedBinding("down"); }
    } failing;
    const auto open = finalize(two, failing, {});
    REQUIRE(open.inds.size() == 2);
    for (const auto& i : open.inds) {
        CHECK(i.status == IndStatus::Candidate);
        CHECK_FALSE(i.warning.empty());
    }
    CHECK_FALSE(open.warnings.empty());
}

}  // TEST_SUITE
