#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "joininfer/table.hpp"
#include "joininfer/types.hpp"
#include "json.hpp"

namespace joininfer {

struct ColumnDecl {
    std::string name;
    TypeTag declared_type = TypeTag::Text;
};

/// Where a table's rows live. `path` is resolved against the manifest's
/// directory when relative. Files ending in ".gz" are decompressed on read.
struct DataSource {
    std::filesystem::path path;
    char delimiter = ',';
    bool header = true;
};

struct ForeignKeyDecl {
    std::vector<std::string> columns;
    std::string ref_table;
    std::vector<std::string> ref_columns;
};

struct TableDecl {
    std::string name;
    std::vector<ColumnDecl> columns;
    std::optional<DataSource> data_source;
    std::optional<std::vector<std::string>> declared_pk;
    std::vector<ForeignKeyDecl> declared_fks;

    const ColumnDecl* find_column(std::string_view column) const;
};

struct SchemaManifest {
    std::string database_name;
    std::vector<TableDecl> tables;

    const TableDecl* find_table(std::string_view table) const;
    size_t dimension_count() const;
};

/// Reads and validates a manifest document. Throws Error(NotFound) for a
/// missing file and Error(InvalidInput) for any invariant violation.
SchemaManifest load_manifest(const std::filesystem::path& path);

/// Validates an already-parsed manifest document; `base_dir` resolves
/// relative data paths.
SchemaManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Checks every manifest invariant, throwing Error(InvalidInput) on the first
/// violation.
void validate_manifest(const SchemaManifest& manifest);

nlohmann::json manifest_to_json(const SchemaManifest& manifest);

enum class Origin { Statistical, Declared, History, User };
std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view text);

struct SeedKey {
    std::string table;
    std::vector<std::string> columns;
};

struct SeedInd {
    ColumnRef fk;
    ColumnRef pk;
};

struct ConstraintSeeds {
    std::vector<SeedKey> pks;
    std::vector<SeedInd> inds;
    /// Declared multi-column foreign keys; carried as composite joins.
    std::vector<ForeignKeyDecl> composite_fks;
    std::vector<std::string> composite_fk_tables;
};

/// Turns declared constraints into pipeline seeds. Declared keys become
/// maximal-confidence key candidates; single-column foreign keys become IND
/// candidates that are still scored and adjudicated.
ConstraintSeeds bootstrap_constraints(const SchemaManifest& manifest);

/// Estimated number of join candidates, C(t,2) * (d/t) rounded half up.
uint64_t estimate_candidates(uint64_t tables, uint64_t dimensions);
uint64_t estimate_candidates(const SchemaManifest& manifest);

struct ReadWarning {
    std::string table;
    std::string message;
};

struct Dataset {
    SchemaManifest manifest;
    std::vector<Table> tables;
    std::vector<ReadWarning> warnings;

    const Table* find_table(std::string_view name) const;
};

/// Reads one table from its data source, typed by the declaration.
Table read_table(const TableDecl& decl, std::vector<ReadWarning>* warnings = nullptr);

/// Ingests every table of the manifest.
Dataset ingest(SchemaManifest manifest);

}  // namespace joininfer
