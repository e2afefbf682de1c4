#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "joininfer/catalog.hpp"
#include "joininfer/table.hpp"

namespace testing {

using namespace joininfer;

inline Column int_column(std::string name, const std::vector<std::optional<long long>>& values,
                         TypeTag tag = TypeTag::IntegerSigned) {
    Column c(std::move(name), tag);
    for (const auto& v : values) {
        if (v) {
            c.push_number(static_cast<double>(*v));
        } else {
            c.push_null();
        }
    }
    return c;
}

inline Column int_column(std::string name, const std::vector<long long>& values) {
    Column c(std::move(name), TypeTag::IntegerSigned);
    for (long long v : values) c.push_number(static_cast<double>(v));
    return c;
}

inline Column int_column(std::string name, std::initializer_list<long long> values) {
    return int_column(std::move(name), std::vector<long long>(values));
}

inline Column text_column(std::string name, const std::vector<std::string>& values) {
    Column c(std::move(name), TypeTag::Text);
    for (const auto& v : values) c.push_text(v);
    return c;
}

inline std::vector<long long> iota_values(long long from, long long count) {
    std::vector<long long> out;
    for (long long i = 0; i < count; ++i) out.push_back(from + i);
    return out;
}

/// Table plus its manifest declaration, typed from the columns.
struct TableSpec {
    Table table;
    std::optional<std::vector<std::string>> declared_pk;
    std::vector<ForeignKeyDecl> declared_fks;
};

inline Dataset make_dataset(std::vector<TableSpec> specs, std::string name = "test") {
    Dataset ds;
    ds.manifest.database_name = std::move(name);
    for (auto& s : specs) {
        TableDecl decl;
        decl.name = s.table.name;
        for (const auto& c : s.table.columns) decl.columns.push_back({c.name(), c.type()});
        decl.declared_pk = s.declared_pk;
        decl.declared_fks = s.declared_fks;
        ds.manifest.tables.push_back(std::move(decl));
        ds.tables.push_back(std::move(s.table));
    }
    return ds;
}

inline Table make_table(std::string name, std::vector<Column> columns) {
    Table t;
    t.name = std::move(name);
    t.columns = std::move(columns);
    return t;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("joininfer-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return std::filesystem::path(JOININFER_TEST_DATA_DIR); }

}  // namespace testing
