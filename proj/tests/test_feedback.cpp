#include <fstream>

#include "doctest.h"
#include "joininfer/feedback_service.hpp"
#include "joininfer/graph_document.hpp"
#include "support.hpp"

using namespace joininfer;
using nlohmann::json;

namespace {

FeedbackRecord confirm(const std::string& id) { return {id, FeedbackAction::Confirm, nullptr, "t", "tester"}; }
FeedbackRecord reject(const std::string& id) { return {id, FeedbackAction::Reject, nullptr, "t", "tester"}; }

json ref(const std::string& table, const std::string& column) { return {{"table", table}, {"column", column}}; }

FeedbackRecord override_record(const std::string& fk_table, const std::string& fk, const std::string& pk_table,
                               const std::string& pk, const std::string& replaces = "") {
    json payload{{"pairs", json::array({{{"fk", ref(fk_table, fk)}, {"pk", ref(pk_table, pk)}}})}};
    if (!replaces.empty()) payload["replaces"] = replaces;
    FeedbackRecord r{"", FeedbackAction::Override, payload, "t", "tester"};
    r.ind_id = user_ind_from_payload(payload).id();
    return r;
}

const std::string kOrdersCustomer = "orders.o_custkey->customer.c_custkey";
const std::string kLineitemPart = "lineitem.l_partkey->part.p_partkey";

ServiceConfig service_config(const testing::TempDir& dir) {
    ServiceConfig c;
    c.run.manifest = testing::data_dir() / "tpch-sf0.01" / "manifest.json";
    c.run.output_dir = dir.path();
    c.run.stats_cache = false;
    c.graph_path = dir / "graph.json";
    c.feedback_log = dir / "feedback.jsonl";
    return c;
}

std::string status_of(const json& graph, const std::string& id) {
    for (const auto& i : graph.at("inds")) {
        if (i.at("id") == id) return i.at("status").get<std::string>();
    }
    return "";
}

bool mentions_edge(const json& graph, const std::string& id) {
    for (const auto& tree : graph.at("join_graph").at("trees")) {
        for (const auto& path : tree.at("paths")) {
            for (const auto& hop : path.at("hops")) {
                if (hop.at("ind_id") == id) return true;
            }
        }
    }
    return false;
}

}  // namespace

TEST_SUITE("feedback") {

TEST_CASE("record JSON round trip and IND ids") {
    const auto o = override_record("orders", "o_custkey", "customer", "c_custkey", kLineitemPart);
    const auto back = record_from_json(record_to_json(o));
    CHECK(back.ind_id == o.ind_id);
    CHECK(back.action == FeedbackAction::Override);
    CHECK(back.payload == o.payload);
    CHECK(back.actor == "tester");

    const auto parsed = parse_ind_id("a.x->b.y+a.z->b.w");
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->size() == 2);
    CHECK(parsed->at(1).first.str() == "a.z");
    CHECK(parsed->at(1).second.str() == "b.w");
    CHECK_FALSE(parse_ind_id("no arrow").has_value());
    CHECK_FALSE(parse_ind_id("a->b.y").has_value());
    CHECK_FALSE(parse_ind_id("").has_value());

    CHECK_THROWS_AS(record_from_json(json{{"action", "shrug"}}), Error);
    json mismatched = record_to_json(o);
    mismatched["ind_id"] = "a.b->c.d";
    CHECK_THROWS_AS(record_from_json(mismatched), Error);
}

TEST_CASE("replay: last writer wins and confirmed pairs are excluded") {
    CHECK(replay({}).statuses.empty());
    CHECK(replay({}).records == 0);

    std::vector<FeedbackRecord> log{confirm(kOrdersCustomer)};
    auto s = replay(log);
    CHECK(s.statuses.at(kOrdersCustomer) == IndStatus::Confirmed);
    CHECK(s.excluded.contains(make_table_pair("orders", "customer")));

    log.push_back(reject(kOrdersCustomer));
    s = replay(log);
    CHECK(s.statuses.at(kOrdersCustomer) == IndStatus::Rejected);
    CHECK(s.excluded.empty());
    CHECK(s.records == 2);

    log.push_back(confirm(kOrdersCustomer));
    CHECK(replay(log).statuses.at(kOrdersCustomer) == IndStatus::Confirmed);
}

TEST_CASE("override replaces an edge; define-composite registers a key") {
    const auto o = override_record("lineitem", "l_partkey", "partsupp", "ps_partkey", kLineitemPart);
    FeedbackRecord comp{"", FeedbackAction::DefineComposite,
                        json{{"table", "PartSupp"}, {"columns", {"ps_partkey", "ps_suppkey"}}}, "t", "tester"};
    std::vector<FeedbackRecord> log{o, comp};
    const auto s = replay(log);
    CHECK(s.statuses.at(kLineitemPart) == IndStatus::Rejected);
    CHECK(s.statuses.at(o.ind_id) == IndStatus::UserDefined);
    REQUIRE(s.user_inds.contains(o.ind_id));
    CHECK(s.user_inds.at(o.ind_id).origin == Origin::User);
    CHECK(s.keys.at("partsupp") == std::vector<std::string>{"ps_partkey", "ps_suppkey"});

    FeedbackRecord bad{"", FeedbackAction::DefineComposite, json{{"table", "t"}, {"columns", {"a"}}}, "t", ""};
    CHECK_THROWS_AS(check_record(bad, {}), Error);
    CHECK_THROWS_AS(check_record(confirm("x.y->z.w"), {}), Error);
}

TEST_CASE("retrain overrides by mode") {
    InclusionDependency oc;
    oc.fk = {"orders", "o_custkey"};
    oc.pk = {"customer", "c_custkey"};
    oc.status = IndStatus::AdjudicatedAccept;
    std::vector<InclusionDependency> previous{oc};
    std::vector<FeedbackRecord> log{confirm(kOrdersCustomer), reject(kLineitemPart)};
    const auto state = replay(log);

    const auto full = retrain_overrides(state, TrainMode::Full, previous);
    CHECK(full.excluded.empty());
    CHECK(full.carried.empty());
    CHECK(full.statuses.at(kLineitemPart) == IndStatus::Rejected);

    const auto inc = retrain_overrides(state, TrainMode::Incremental, previous);
    CHECK(inc.excluded.contains(make_table_pair("orders", "customer")));
    REQUIRE(inc.carried.size() == 1);
    CHECK(inc.carried[0].id() == kOrdersCustomer);
}

TEST_CASE("corrupt log line is named") {
    testing::TempDir dir("log");
    FeedbackLog log(dir / "f.jsonl");
    CHECK(log.read().empty());
    log.append(confirm(kOrdersCustomer));
    log.append(reject(kLineitemPart));
    { std::ofstream(dir / "f.jsonl", std::ios::app) << "{not json\n"; }
    try {
        log.read();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("service: submit, overlay, replay after restart, retrain") {
    testing::TempDir dir("service");
    const auto cfg = service_config(dir);
    json first_graph;
    {
        FeedbackService svc(cfg);
        first_graph = svc.graph();
        CHECK(status_of(first_graph, kOrdersCustomer) == "adjudicated-accept");
        CHECK(std::filesystem::exists(cfg.graph_path));

        const auto out = svc.submit(confirm(kOrdersCustomer));
        CHECK(out.at("ind").at("status") == "confirmed");
        const auto g = svc.graph();
        CHECK(status_of(g, kOrdersCustomer) == "confirmed");
        bool excluded = false;
        for (const auto& p : g.at("excluded_pairs")) excluded = excluded || p == json{"customer", "orders"};
        CHECK(excluded);

        svc.submit(reject(kLineitemPart));
        CHECK_THROWS_AS(svc.submit(confirm("nope.a->nope.b")), Error);
        FeedbackRecord ghost{"", FeedbackAction::DefineComposite,
                             json{{"table", "ghost"}, {"columns", {"a", "b"}}}, "", ""};
        CHECK_THROWS_AS(svc.submit(ghost), Error);
        CHECK(svc.feedback_state().at("records") == 2);
    }
    {
        // a fresh service replays the log into the same state
        FeedbackService svc(cfg);
        const auto g = svc.graph();
        CHECK(status_of(g, kOrdersCustomer) == "confirmed");
        CHECK(status_of(g, kLineitemPart) == "rejected");

        svc.start_training(TrainMode::Incremental);
        svc.wait_for_training();
        CHECK(svc.training_status().at("state") == "succeeded");
        const auto after = svc.graph();
        CHECK(status_of(after, kLineitemPart) == "rejected");
        CHECK_FALSE(mentions_edge(after, kLineitemPart));
        CHECK(status_of(after, kOrdersCustomer) == "confirmed");

        svc.start_training(TrainMode::Full);
        svc.wait_for_training();
        CHECK(status_of(svc.graph(), kLineitemPart) == "rejected");
        const auto modes = svc.training_status().at("mode_history");
        CHECK(modes == json{"incremental", "full"});
    }
}

TEST_CASE("incremental retrain with every pair confirmed generates nothing new") {
    testing::TempDir dir("confirm-all");
    const auto cfg = service_config(dir);
    FeedbackService svc(cfg);
    const auto before = svc.graph();
    size_t active = 0;
    for (const auto& i : before.at("inds")) {
        if (i.at("status") == "adjudicated-accept") {
            svc.submit(confirm(i.at("id").get<std::string>()));
            ++active;
        }
    }
    REQUIRE(active > 0);
    svc.start_training(TrainMode::Incremental);
    svc.wait_for_training();
    const auto after = load_document(cfg.graph_path);
    CHECK(after.at("funnel").at("candidates").get<size_t>() <= before.at("funnel").at("candidates").get<size_t>());
    std::set<TablePair> confirmed;
    for (const auto& i : before.at("inds")) {
        if (i.at("status") == "adjudicated-accept") {
            const auto p = parse_ind_id(i.at("id").get<std::string>());
            confirmed.insert(make_table_pair(p->front().first.table, p->front().second.table));
        }
    }
    // nothing is regenerated for a confirmed pair: what remains there is carried over unchanged
    std::map<std::string, json> previous;
    for (const auto& i : before.at("inds")) previous[i.at("id").get<std::string>()] = i;
    size_t in_confirmed = 0;
    for (const auto& i : after.at("inds")) {
        const std::string id = i.at("id").get<std::string>();
        const auto p = parse_ind_id(id);
        if (!confirmed.contains(make_table_pair(p->front().first.table, p->front().second.table))) continue;
        ++in_confirmed;
        REQUIRE(previous.contains(id));
        CHECK(i.at("score") == previous[id].at("score"));
        const std::string expected = previous[id].at("status") == "adjudicated-accept"
                                         ? "confirmed"
                                         : previous[id].at("status").get<std::string>();
        CHECK(i.at("status") == expected);
    }
    CHECK(in_confirmed >= active);
    CHECK(status_of(svc.graph(), kOrdersCustomer) == "confirmed");
}

TEST_CASE("full retrain twice renders identical documents") {
    testing::TempDir dir("full-twice");
    RunConfig run;
    run.manifest = testing::data_dir() / "tpch-sf0.01" / "manifest.json";
    run.output_dir = dir.path();
    run.stats_cache = false;
    const auto a = train_once(run, {}, TrainMode::Full, std::nullopt);
    const auto b = train_once(run, {}, TrainMode::Full, std::nullopt);
    CHECK(render_document(a.document) == render_document(b.document));
}

}  // TEST_SUITE
