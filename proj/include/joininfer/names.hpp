#pragma once

#include <string>
#include <string_view>

#include "joininfer/types.hpp"

namespace joininfer {

/// Lowercases and drops every non-alphanumeric character.
std::string normalize_name(std::string_view name);

/// Length of the longest common contiguous substring.
size_t longest_common_substring(std::string_view a, std::string_view b);

/// Affinity of a column name to its table name, in [0, 1]: 1 when the
/// normalized column name occurs inside the normalized table name, otherwise
/// the longest common substring divided by the table name length.
double name_distance(std::string_view table_name, std::string_view column_name);

/// Longest common substring of two normalized column names over the longer
/// normalized length.
double name_similarity(std::string_view a, std::string_view b);

bool is_named_id(std::string_view column_name);
/// Terminal "key" or "nr".
bool is_named_key(std::string_view column_name);
/// Any of the typical identifier suffixes: "id", "key", "nr".
bool has_typical_suffix(std::string_view column_name);

/// Table name with one trailing "s" removed, normalized.
std::string table_stem(std::string_view table_name);

/// Column name with a table-abbreviation prefix ("o_" in orders, "ps_" in
/// partsupp) and a typical key suffix removed, normalized. Falls back to the
/// normalized name when stripping would leave nothing.
std::string core_column_name(std::string_view table_name, std::string_view column_name);

/// Longest common substring of the two core names over the longer one.
double core_name_similarity(const ColumnRef& a, const ColumnRef& b);

}  // namespace joininfer
