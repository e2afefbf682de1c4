#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace joininfer {

/// Declared column type. Compatibility is decided per class, not per tag.
enum class TypeTag {
    IntegerSigned,
    IntegerUnsigned,
    Decimal,
    Text,
    Date,
    Timestamp,
    Boolean,
};

enum class TypeClass { Numeric, Text, Temporal, Boolean };

TypeClass type_class(TypeTag tag);
bool compatible(TypeTag a, TypeTag b);
bool is_numeric(TypeTag tag);

std::string_view to_string(TypeTag tag);
std::optional<TypeTag> parse_type_tag(std::string_view text);

/// A non-null cell value. Numeric, temporal and boolean values are held as
/// doubles (temporal as seconds since the epoch) so that values of
/// compatible tags compare equal; text is held verbatim.
using Value = std::variant<double, std::string>;

/// Parses one raw field. Returns nullopt for NULL (empty field). Throws
/// ParseError when the text is not valid under `tag`.
std::optional<Value> parse_value(std::string_view field, TypeTag tag);

std::string format_value(const Value& value);

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    BadConfig,
    InvalidInput,
    NotFound,
    Pipeline,
    Service,
};

std::string_view to_string(ErrorKind kind);

/// Process exit status for an error kind; 1 is left for unexpected failures.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ColumnRef {
    std::string table;
    std::string column;

    auto operator<=>(const ColumnRef&) const = default;
    std::string str() const { return table + "." + column; }
};

}  // namespace joininfer

template <>
struct std::hash<joininfer::ColumnRef> {
    size_t operator()(const joininfer::ColumnRef& ref) const noexcept {
        size_t h = std::hash<std::string>{}(ref.table);
        return h ^ (std::hash<std::string>{}(ref.column) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};
