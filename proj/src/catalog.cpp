#include "joininfer/catalog.hpp"

#include <fstream>
#include <set>

namespace joininfer {

using nlohmann::json;

const ColumnDecl* TableDecl::find_column(std::string_view column) const {
    for (const auto& c : columns) {
        if (iequals(c.name, column)) return &c;
    }
    return nullptr;
}

const TableDecl* SchemaManifest::find_table(std::string_view table) const {
    for (const auto& t : tables) {
        if (iequals(t.name, table)) return &t;
    }
    return nullptr;
}

size_t SchemaManifest::dimension_count() const {
    size_t d = 0;
    for (const auto& t : tables) d += t.columns.size();
    return d;
}

const Table* Dataset::find_table(std::string_view name) const {
    for (const auto& t : tables) {
        if (iequals(t.name, name)) return &t;
    }
    return nullptr;
}

std::string_view to_string(Origin origin) {
    switch (origin) {
        case Origin::Statistical: return "statistical";
        case Origin::Declared: return "declared";
        case Origin::History: return "history";
        case Origin::User: return "user";
    }
    return "statistical";
}

std::optional<Origin> parse_origin(std::string_view text) {
    for (Origin o : {Origin::Statistical, Origin::Declared, Origin::History, Origin::User}) {
        if (to_string(o) == text) return o;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::InvalidInput, message); }

std::vector<std::string> string_list(const json& j, const std::string& what) {
    if (!j.is_array()) invalid(what + " must be a list of column names");
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) invalid(what + " must be a list of column names");
        out.push_back(item.get<std::string>());
    }
    return out;
}

DataSource parse_data_source(const json& j, const std::filesystem::path& base_dir) {
    DataSource src;
    if (j.is_string()) {
        src.path = j.get<std::string>();
    } else if (j.is_object()) {
        src.path = j.at("path").get<std::string>();
        if (j.contains("delimiter")) {
            auto d = j.at("delimiter").get<std::string>();
            if (d == "\\t" || d == "tab") d = "\t";
            if (d.size() != 1) invalid("data_source delimiter must be a single character");
            src.delimiter = d.front();
        }
        if (j.contains("header")) src.header = j.at("header").get<bool>();
    } else {
        invalid("data_source must be a path or an object");
    }
    if (src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
    return src;
}

}  // namespace

void validate_manifest(const SchemaManifest& manifest) {
    if (manifest.tables.empty()) invalid("empty manifest");
    std::set<std::string> table_names;
    for (const auto& t : manifest.tables) {
        if (t.name.empty()) invalid("table with empty name");
        if (!table_names.insert(to_lower(t.name)).second) invalid("duplicate table name '" + t.name + "'");
        if (t.columns.empty()) invalid("table '" + t.name + "' declares no columns");
        std::set<std::string> column_names;
        for (const auto& c : t.columns) {
            if (c.name.empty()) invalid("table '" + t.name + "' has a column with an empty name");
            if (!column_names.insert(to_lower(c.name)).second) {
                invalid("table '" + t.name + "': duplicate column name '" + c.name + "'");
            }
        }
        if (t.declared_pk) {
            if (t.declared_pk->empty()) invalid("table '" + t.name + "': declared_pk is empty");
            for (const auto& c : *t.declared_pk) {
                if (t.find_column(c) == nullptr) {
                    invalid("table '" + t.name + "': declared_pk column '" + c + "' does not exist");
                }
            }
        }
        for (const auto& fk : t.declared_fks) {
            if (fk.columns.empty() || fk.columns.size() != fk.ref_columns.size()) {
                invalid("table '" + t.name + "': declared foreign key column lists differ in length");
            }
            for (const auto& c : fk.columns) {
                if (t.find_column(c) == nullptr) {
                    invalid("table '" + t.name + "': declared foreign key column '" + c + "' does not exist");
                }
            }
        }
    }
    // Remote references are checked once every table is known.
    for (const auto& t : manifest.tables) {
        for (const auto& fk : t.declared_fks) {
            const TableDecl* ref = manifest.find_table(fk.ref_table);
            if (ref == nullptr) {
                invalid("table '" + t.name + "': foreign key references unknown table '" + fk.ref_table + "'");
            }
            for (const auto& c : fk.ref_columns) {
                if (ref->find_column(c) == nullptr) {
                    invalid("table '" + t.name + "': foreign key references missing column '" + fk.ref_table +
                            "." + c + "'");
                }
            }
        }
    }
}

SchemaManifest parse_manifest(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) invalid("manifest must be an object");
    SchemaManifest m;
    try {
        m.database_name = doc.value("database_name", std::string{});
        if (!doc.contains("tables")) invalid("empty manifest");
        for (const auto& jt : doc.at("tables")) {
            TableDecl t;
            t.name = jt.at("name").get<std::string>();
            for (const auto& jc : jt.at("columns")) {
                ColumnDecl c;
                c.name = jc.at("name").get<std::string>();
                auto tag_text = jc.value("declared_type", std::string{"text"});
                auto tag = parse_type_tag(tag_text);
                if (!tag) invalid("table '" + t.name + "', column '" + c.name + "': unknown type '" + tag_text + "'");
                c.declared_type = *tag;
                t.columns.push_back(std::move(c));
            }
            if (jt.contains("data_source") && !jt.at("data_source").is_null()) {
                t.data_source = parse_data_source(jt.at("data_source"), base_dir);
            }
            if (jt.contains("declared_pk") && !jt.at("declared_pk").is_null()) {
                t.declared_pk = string_list(jt.at("declared_pk"), "declared_pk");
            }
            if (jt.contains("declared_fks")) {
                for (const auto& jf : jt.at("declared_fks")) {
                    ForeignKeyDecl fk;
                    fk.columns = string_list(jf.at("columns"), "declared_fks.columns");
                    fk.ref_table = jf.at("ref_table").get<std::string>();
                    fk.ref_columns = string_list(jf.at("ref_columns"), "declared_fks.ref_columns");
                    t.declared_fks.push_back(std::move(fk));
                }
            }
            m.tables.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        invalid(std::string("malformed manifest: ") + e.what());
    }
    validate_manifest(m);
    return m;
}

SchemaManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "manifest not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        invalid("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_manifest(doc, path.parent_path());
}

json manifest_to_json(const SchemaManifest& manifest) {
    json tables = json::array();
    for (const auto& t : manifest.tables) {
        json jt;
        jt["name"] = t.name;
        json cols = json::array();
        for (const auto& c : t.columns) {
            cols.push_back({{"name", c.name}, {"declared_type", std::string(to_string(c.declared_type))}});
        }
        jt["columns"] = cols;
        if (t.data_source) {
            jt["data_source"] = {{"path", t.data_source->path.string()},
                                 {"delimiter", std::string(1, t.data_source->delimiter)},
                                 {"header", t.data_source->header}};
        }
        if (t.declared_pk) jt["declared_pk"] = *t.declared_pk;
        if (!t.declared_fks.empty()) {
            json fks = json::array();
            for (const auto& fk : t.declared_fks) {
                fks.push_back({{"columns", fk.columns}, {"ref_table", fk.ref_table}, {"ref_columns", fk.ref_columns}});
            }
            jt["declared_fks"] = fks;
        }
        tables.push_back(std::move(jt));
    }
    return {{"database_name", manifest.database_name}, {"tables", tables}};
}

ConstraintSeeds bootstrap_constraints(const SchemaManifest& manifest) {
    ConstraintSeeds seeds;
    for (const auto& t : manifest.tables) {
        if (t.declared_pk) seeds.pks.push_back({t.name, *t.declared_pk});
        for (const auto& fk : t.declared_fks) {
            const TableDecl* ref = manifest.find_table(fk.ref_table);
            std::string ref_name = ref != nullptr ? ref->name : fk.ref_table;
            if (fk.columns.size() == 1) {
                seeds.inds.push_back({{t.name, t.find_column(fk.columns.front())->name},
                                      {ref_name, ref->find_column(fk.ref_columns.front())->name}});
            } else {
                seeds.composite_fks.push_back(fk);
                seeds.composite_fks.back().ref_table = ref_name;
                seeds.composite_fk_tables.push_back(t.name);
            }
        }
    }
    return seeds;
}

uint64_t estimate_candidates(uint64_t tables, uint64_t dimensions) {
    if (tables < 2) return 0;
    // C(t,2) * d/t == (t-1) * d / 2, so half-up rounding is exact in integers.
    return ((tables - 1) * dimensions + 1) / 2;
}

uint64_t estimate_candidates(const SchemaManifest& manifest) {
    return estimate_candidates(manifest.tables.size(), manifest.dimension_count());
}

Dataset ingest(SchemaManifest manifest) {
    Dataset ds;
    ds.manifest = std::move(manifest);
    for (const auto& decl : ds.manifest.tables) {
        ds.tables.push_back(read_table(decl, &ds.warnings));
    }
    return ds;
}

}  // namespace joininfer
