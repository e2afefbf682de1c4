#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "joininfer/types.hpp"

namespace joininfer {

/// Columnar storage for one ingested column. Numeric-like tags are stored as
/// doubles, text as strings; NULLs are tracked in a separate mask.
class Column {
public:
    Column(std::string name, TypeTag type) : name_(std::move(name)), type_(type) {}

    const std::string& name() const noexcept { return name_; }
    TypeTag type() const noexcept { return type_; }
    size_t size() const noexcept { return null_.size(); }

    bool is_null(size_t row) const noexcept { return null_[row] != 0; }
    std::optional<Value> value(size_t row) const;
    /// Raw storage access; only meaningful for non-null rows of the matching kind.
    double number_at(size_t row) const noexcept { return numbers_[row]; }
    const std::string& text_at(size_t row) const noexcept { return texts_[row]; }
    bool stores_text() const noexcept { return type_ == TypeTag::Text; }

    void reserve(size_t rows);
    void push_null();
    void push(const Value& value);
    void push_number(double value);
    void push_text(std::string value);

    size_t parse_errors() const noexcept { return parse_errors_; }
    void note_parse_error() noexcept { ++parse_errors_; }

private:
    std::string name_;
    TypeTag type_;
    std::vector<double> numbers_;
    std::vector<std::string> texts_;
    std::vector<uint8_t> null_;
    size_t parse_errors_ = 0;
};

struct Table {
    std::string name;
    std::vector<Column> columns;

    size_t row_count() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
    const Column* find(std::string_view column) const;
    Column* find(std::string_view column);
};

bool iequals(std::string_view a, std::string_view b) noexcept;
std::string to_lower(std::string_view s);

}  // namespace joininfer
