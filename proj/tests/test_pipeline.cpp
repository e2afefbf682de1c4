#include <random>

#include "doctest.h"
#include "joininfer/graph_document.hpp"
#include "joininfer/pipeline.hpp"
#include "support.hpp"

using namespace joininfer;
using testing::int_column;
using testing::make_dataset;
using testing::make_table;
using testing::text_column;

namespace {

Dataset shop(bool declare_fk, bool dirty = false) {
    std::vector<std::string> names;
    for (int i = 1; i <= 50; ++i) names.push_back("customer " + std::to_string(i));
    std::vector<long long> cust;
    std::vector<long long> amount;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        cust.push_back(1 + i % 50);
        amount.push_back(10 + static_cast<long long>(rng() % 500));
    }
    if (dirty) cust[17] = 51;

    testing::TableSpec customers{make_table("customers", {int_column("id", testing::iota_values(1, 50)),
                                                          text_column("name", names)}),
                                 std::nullopt,
                                 {}};
    testing::TableSpec orders{make_table("orders", {int_column("order_id", testing::iota_values(1001, 200)),
                                                    int_column("cust_id", cust), int_column("amount", amount)}),
                              std::nullopt,
                              {}};
    if (declare_fk) orders.declared_fks.push_back({{"cust_id"}, "customers", {"id"}});
    return make_dataset({std::move(customers), std::move(orders)}, "shop");
}

const InclusionDependency* find_ind(const PipelineResult& r, const std::string& id) {
    for (const auto& i : r.inds) {
        if (i.id() == id) return &i;
    }
    return nullptr;
}

PipelineConfig small_config() {
    PipelineConfig c;
    c.sampling.sample_size = 1000;
    return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("declared FK survives with a score at least the undeclared one") {
    RuleAdjudicator adj;
    const auto plain = run_pipeline(shop(false), small_config(), adj);
    const auto seeded = run_pipeline(shop(true), small_config(), adj);
    const std::string id = "orders.cust_id->customers.id";
    const auto* p = find_ind(plain, id);
    const auto* s = find_ind(seeded, id);
    REQUIRE(p != nullptr);
    REQUIRE(s != nullptr);
    CHECK(s->origin == Origin::Declared);
    CHECK(p->origin == Origin::Statistical);
    CHECK(s->score >= p->score);
    CHECK(s->status != IndStatus::Pruned);
    CHECK(is_active(s->status));
}

TEST_CASE("a declared FK the data violates is still seeded") {
    RuleAdjudicator adj;
    const auto plain = run_pipeline(shop(false, true), small_config(), adj);
    const auto seeded = run_pipeline(shop(true, true), small_config(), adj);
    const std::string id = "orders.cust_id->customers.id";
    CHECK(find_ind(plain, id) == nullptr);
    const auto* s = find_ind(seeded, id);
    REQUIRE(s != nullptr);
    CHECK(s->origin == Origin::Declared);
    CHECK(s->score >= 0.0);
}

TEST_CASE("funnel and keys on the toy schema") {
    RuleAdjudicator adj;
    const auto r = run_pipeline(shop(false), small_config(), adj);
    REQUIRE(r.decisions.size() == 2);
    for (const auto& d : r.decisions) {
        REQUIRE(d.selected.has_value());
        CHECK(d.selected->front() == (d.table == "customers" ? "id" : "order_id"));
    }
    CHECK(r.funnel.candidates >= r.funnel.survivors);
    CHECK(r.funnel.survivors >= r.funnel.accepted);
    CHECK(r.funnel.accepted == active_pairs(r.inds).size());
    REQUIRE(!r.plan.trees.empty());
    // "cust" is no abbreviation the stub recognizes, so only the declaration carries the edge
    const auto* plain = find_ind(r, "orders.cust_id->customers.id");
    REQUIRE(plain != nullptr);
    CHECK(plain->status == IndStatus::AdjudicatedReject);
    CHECK(r.funnel.accepted == 0);

    const auto seeded = run_pipeline(shop(true), small_config(), adj);
    CHECK(seeded.funnel.accepted == 1);
    REQUIRE(!seeded.plan.trees.empty());
    CHECK(seeded.plan.trees.front().root == "orders");
    REQUIRE(seeded.plan.trees.front().paths.size() == 1);
    CHECK(seeded.plan.trees.front().paths[0].dimension == "customers");
}

TEST_CASE("identical inputs render identical documents") {
    RuleAdjudicator adj;
    const auto a = run_pipeline(shop(true), small_config(), adj);
    const auto b = run_pipeline(shop(true), small_config(), adj);
    DocumentMeta meta;
    meta.database = "shop";
    CHECK(render_document(graph_document(a, meta)) == render_document(graph_document(b, meta)));
}

TEST_CASE("empty dataset and bad threshold") {
    RuleAdjudicator adj;
    Dataset empty;
    try {
        run_pipeline(empty, small_config(), adj);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    PipelineConfig c = small_config();
    c.tau = 2.0;
    CHECK_THROWS_AS(run_pipeline(shop(false), c, adj), Error);
}

TEST_CASE("overrides: excluded pairs, carried edges, statuses and keys") {
    RuleAdjudicator adj;
    const std::string id = "orders.cust_id->customers.id";

    PipelineOverrides skip;
    skip.excluded.insert(make_table_pair("orders", "customers"));
    const auto skipped = run_pipeline(shop(true), small_config(), adj, skip);
    CHECK(skipped.funnel.candidates == 0);
    CHECK(find_ind(skipped, id) == nullptr);

    InclusionDependency kept;
    kept.fk = {"orders", "cust_id"};
    kept.pk = {"customers", "id"};
    kept.status = IndStatus::Confirmed;
    kept.score = 0.9;
    skip.carried.push_back(kept);
    const auto carried = run_pipeline(shop(false), small_config(), adj, skip);
    const auto* c = find_ind(carried, id);
    REQUIRE(c != nullptr);
    CHECK(c->status == IndStatus::Confirmed);
    CHECK(c->default_edge);

    PipelineOverrides reject;
    reject.statuses[id] = IndStatus::Rejected;
    const auto rejected = run_pipeline(shop(true), small_config(), adj, reject);
    const auto* r = find_ind(rejected, id);
    REQUIRE(r != nullptr);
    CHECK(r->status == IndStatus::Rejected);
    CHECK(active_pairs(rejected.inds).empty());
    for (const auto& t : rejected.plan.trees) CHECK(t.paths.empty());

    PipelineOverrides keys;
    keys.keys["orders"] = {"order_id", "amount"};
    const auto keyed = run_pipeline(shop(false), small_config(), adj, keys);
    for (const auto& d : keyed.decisions) {
        if (d.table != "orders") continue;
        REQUIRE(d.selected.has_value());
        CHECK(*d.selected == std::vector<std::string>{"order_id", "amount"});
    }
}

}  // TEST_SUITE
