#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "doctest.h"
#include "joininfer/catalog.hpp"
#include "support.hpp"

using namespace joininfer;
using nlohmann::json;

namespace {

json table_json(const std::string& name, std::vector<std::string> cols, json extra = json::object()) {
    json columns = json::array();
    for (const auto& c : cols) columns.push_back({{"name", c}, {"declared_type", "integer-signed"}});
    json t{{"name", name}, {"columns", columns}};
    for (auto& [k, v] : extra.items()) t[k] = v;
    return t;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Pipeline;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("catalog") {

TEST_CASE("TPC-H manifest has 8 tables and 61 dimension columns") {
    const auto m = load_manifest(testing::data_dir() / "tpch-sf0.01" / "manifest.json");
    CHECK(m.tables.size() == 8);
    CHECK(m.dimension_count() == 61);
    CHECK(estimate_candidates(m) == 214);
}

TEST_CASE("manifest validation errors") {
    CHECK(message_of([] { parse_manifest(json{{"database_name", "x"}, {"tables", json::array()}}); }) ==
          "empty manifest");
    CHECK(kind_of([] { parse_manifest(json{{"database_name", "x"}, {"tables", json::array()}}); }) ==
          ErrorKind::InvalidInput);

    json doc{{"database_name", "x"},
             {"tables", {table_json("orders", {"id", "amount"}, {{"declared_pk", {"o_id"}}})}}};
    const std::string msg = message_of([&] { parse_manifest(doc); });
    CHECK(msg.find("orders") != std::string::npos);
    CHECK(msg.find("o_id") != std::string::npos);

    json dup{{"database_name", "x"}, {"tables", {table_json("a", {"x"}), table_json("A", {"y"})}}};
    CHECK(message_of([&] { parse_manifest(dup); }).find("duplicate table") != std::string::npos);

    json dupcol{{"database_name", "x"}, {"tables", {table_json("a", {"x", "x"})}}};
    CHECK(message_of([&] { parse_manifest(dupcol); }).find("duplicate column") != std::string::npos);

    json badfk{{"database_name", "x"},
               {"tables",
                {table_json("a", {"id"}),
                 table_json("b", {"a_id"},
                            {{"declared_fks", {{{"columns", {"a_id"}}, {"ref_table", "a"}, {"ref_columns", {"nope"}}}}}})}}};
    CHECK(message_of([&] { parse_manifest(badfk); }).find("nope") != std::string::npos);

    CHECK(kind_of([] { load_manifest("/nonexistent/manifest.json"); }) == ErrorKind::NotFound);
}

TEST_CASE("load_manifest is deterministic") {
    const auto path = testing::data_dir() / "tpch-sf0.01" / "manifest.json";
    CHECK(manifest_to_json(load_manifest(path)) == manifest_to_json(load_manifest(path)));
}

TEST_CASE("estimate_candidates rounds half up") {
    CHECK(estimate_candidates(8, 61) == 214);
    CHECK(estimate_candidates(24, 425) == 4888);
    CHECK(estimate_candidates(1, 17) == 0);
    CHECK(estimate_candidates(0, 0) == 0);
    for (uint64_t k = 1; k <= 200; ++k) CHECK(estimate_candidates(2, 2 * k) == k);
    // floating oracle over a grid
    for (uint64_t t = 1; t <= 40; ++t) {
        for (uint64_t d = t; d <= 12 * t; d += 3) {
            const double exact = static_cast<double>(t * (t - 1) / 2) * static_cast<double>(d) / static_cast<double>(t);
            CHECK(estimate_candidates(t, d) == static_cast<uint64_t>(std::floor(exact + 0.5)));
        }
    }
}

TEST_CASE("bootstrap_constraints passes declared keys through") {
    json doc{{"database_name", "x"},
             {"tables",
              {table_json("orders", {"order_id", "cust_id"},
                          {{"declared_pk", {"order_id"}},
                           {"declared_fks", {{{"columns", {"cust_id"}}, {"ref_table", "customers"}, {"ref_columns", {"id"}}}}}}),
               table_json("customers", {"id"})}}};
    const auto m = parse_manifest(doc);
    const auto seeds = bootstrap_constraints(m);
    REQUIRE(seeds.pks.size() == 1);
    CHECK(seeds.pks[0].table == "orders");
    CHECK(seeds.pks[0].columns == std::vector<std::string>{"order_id"});
    REQUIRE(seeds.inds.size() == 1);
    CHECK(seeds.inds[0].fk == ColumnRef{"orders", "cust_id"});
    CHECK(seeds.inds[0].pk == ColumnRef{"customers", "id"});

    json bare{{"database_name", "x"}, {"tables", {table_json("a", {"x"}), table_json("b", {"y"})}}};
    const auto none = bootstrap_constraints(parse_manifest(bare));
    CHECK(none.pks.empty());
    CHECK(none.inds.empty());
    CHECK(none.composite_fks.empty());
}

TEST_CASE("bootstrap output stays inside the declared tables and columns") {
    // manifest columns with the truth file's declared keys laid over them
    const auto dir = testing::data_dir() / "tpch-sf0.01";
    json doc = json::parse(std::ifstream(dir / "manifest.json"));
    const json truth = json::parse(std::ifstream(dir / "truth.json"));
    for (auto& t : doc["tables"]) {
        for (const auto& tt : truth["tables"]) {
            if (tt["name"] == t["name"]) {
                t["declared_pk"] = tt["declared_pk"];
                t["declared_fks"] = tt["declared_fks"];
            }
        }
    }
    const auto m = parse_manifest(doc, dir);
    const auto seeds = bootstrap_constraints(m);
    CHECK(seeds.pks.size() == 8);
    for (const auto& k : seeds.pks) {
        const TableDecl* t = m.find_table(k.table);
        REQUIRE(t != nullptr);
        for (const auto& c : k.columns) CHECK(t->find_column(c) != nullptr);
    }
    for (const auto& s : seeds.inds) {
        REQUIRE(m.find_table(s.fk.table) != nullptr);
        CHECK(m.find_table(s.fk.table)->find_column(s.fk.column) != nullptr);
        REQUIRE(m.find_table(s.pk.table) != nullptr);
        CHECK(m.find_table(s.pk.table)->find_column(s.pk.column) != nullptr);
    }
    CHECK(seeds.inds.size() == 7);
    CHECK(seeds.composite_fks.size() == 1);
}

TEST_CASE("delimited reader: header, NULLs, quoting and parse errors") {
    testing::TempDir dir("reader");
    {
        std::ofstream out(dir / "t.csv");
        out << "id,name,amount\n1,alpha,3.5\n2,,\n3,\"x,y\",oops\n";
    }
    json doc{{"database_name", "x"},
             {"tables",
              {{{"name", "t"},
                {"columns",
                 {{{"name", "id"}, {"declared_type", "integer-signed"}},
                  {{"name", "name"}, {"declared_type", "text"}},
                  {{"name", "amount"}, {"declared_type", "decimal"}}}},
                {"data_source", "t.csv"}}}}};
    const Dataset ds = ingest(parse_manifest(doc, dir.path()));
    REQUIRE(ds.tables.size() == 1);
    const Table& t = ds.tables[0];
    CHECK(t.row_count() == 3);
    CHECK(t.find("name")->is_null(1));
    CHECK(t.find("amount")->is_null(1));
    CHECK(t.find("name")->text_at(2) == "x,y");
    CHECK(t.find("amount")->is_null(2));
    CHECK(t.find("amount")->parse_errors() == 1);
    CHECK(t.find("amount")->number_at(0) == doctest::Approx(3.5));
}

TEST_CASE("TPC-H data ingests with expected row counts") {
    const Dataset ds = ingest(load_manifest(testing::data_dir() / "tpch-sf0.01" / "manifest.json"));
    std::map<std::string, size_t> rows;
    for (const auto& t : ds.tables) rows[t.name] = t.row_count();
    CHECK(rows["region"] == 5);
    CHECK(rows["nation"] == 25);
    CHECK(rows["supplier"] == 100);
    CHECK(rows["customer"] == 1500);
    CHECK(rows["part"] == 2000);
    CHECK(rows["partsupp"] == 8000);
    CHECK(rows["orders"] == 15000);
    CHECK(rows["lineitem"] == 60175);
    CHECK(ds.warnings.empty());
}

}  // TEST_SUITE
