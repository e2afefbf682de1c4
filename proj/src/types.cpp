#include "joininfer/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace joininfer {

TypeClass type_class(TypeTag tag) {
    switch (tag) {
        case TypeTag::IntegerSigned:
        case TypeTag::IntegerUnsigned:
        case TypeTag::Decimal:
            return TypeClass::Numeric;
        case TypeTag::Text:
            return TypeClass::Text;
        case TypeTag::Date:
        case TypeTag::Timestamp:
            return TypeClass::Temporal;
        case TypeTag::Boolean:
            return TypeClass::Boolean;
    }
    return TypeClass::Text;
}

bool compatible(TypeTag a, TypeTag b) { return type_class(a) == type_class(b); }

bool is_numeric(TypeTag tag) { return type_class(tag) == TypeClass::Numeric; }

namespace {

constexpr std::array<std::pair<TypeTag, std::string_view>, 7> kTagNames{{
    {TypeTag::IntegerSigned, "integer-signed"},
    {TypeTag::IntegerUnsigned, "integer-unsigned"},
    {TypeTag::Decimal, "decimal"},
    {TypeTag::Text, "text"},
    {TypeTag::Date, "date"},
    {TypeTag::Timestamp, "timestamp"},
    {TypeTag::Boolean, "boolean"},
}};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Howard Hinnant's days_from_civil.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

double parse_date(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_number(s.substr(0, 4), y) ||
        !parse_number(s.substr(5, 2), m) || !parse_number(s.substr(8, 2), d) || m < 1 || m > 12 ||
        d < 1 || d > 31) {
        throw ParseError("invalid date '" + std::string(s) + "'");
    }
    return static_cast<double>(days_from_civil(y, m, d) * 86400);
}

double parse_timestamp(std::string_view s) {
    if (s.size() == 10) return parse_date(s);
    if (s.size() < 19 || (s[10] != ' ' && s[10] != 'T') || s[13] != ':' || s[16] != ':') {
        throw ParseError("invalid timestamp '" + std::string(s) + "'");
    }
    double base = parse_date(s.substr(0, 10));
    unsigned hh = 0, mm = 0;
    double ss = 0;
    std::string_view sec = s.substr(17);
    if (!sec.empty() && (sec.back() == 'Z')) sec.remove_suffix(1);
    if (!parse_number(s.substr(11, 2), hh) || !parse_number(s.substr(14, 2), mm) ||
        !parse_number(sec, ss) || hh > 23 || mm > 59 || ss >= 61) {
        throw ParseError("invalid timestamp '" + std::string(s) + "'");
    }
    return base + hh * 3600.0 + mm * 60.0 + ss;
}

}  // namespace

std::string_view to_string(TypeTag tag) {
    for (const auto& [t, name] : kTagNames) {
        if (t == tag) return name;
    }
    return "text";
}

std::optional<TypeTag> parse_type_tag(std::string_view text) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& [t, name] : kTagNames) {
        if (name == lowered) return t;
    }
    return std::nullopt;
}

std::optional<Value> parse_value(std::string_view field, TypeTag tag) {
    if (field.empty()) return std::nullopt;
    if (tag == TypeTag::Text) return Value{std::string(field)};

    std::string_view s = trim(field);
    if (s.empty()) return std::nullopt;
    switch (tag) {
        case TypeTag::IntegerSigned:
        case TypeTag::IntegerUnsigned: {
            int64_t v = 0;
            if (parse_number(s, v)) return Value{static_cast<double>(v)};
            // Integral values written with a zero fraction, e.g. "17.00".
            double d = 0;
            if (parse_number(s, d) && std::isfinite(d) && d == std::floor(d)) return Value{d};
            throw ParseError("invalid integer '" + std::string(s) + "'");
        }
        case TypeTag::Decimal: {
            double d = 0;
            if (parse_number(s, d) && std::isfinite(d)) return Value{d};
            throw ParseError("invalid decimal '" + std::string(s) + "'");
        }
        case TypeTag::Date:
            return Value{parse_date(s)};
        case TypeTag::Timestamp:
            return Value{parse_timestamp(s)};
        case TypeTag::Boolean: {
            std::string lowered(s);
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (lowered == "true" || lowered == "t" || lowered == "1" || lowered == "yes" || lowered == "y")
                return Value{1.0};
            if (lowered == "false" || lowered == "f" || lowered == "0" || lowered == "no" || lowered == "n")
                return Value{0.0};
            throw ParseError("invalid boolean '" + std::string(s) + "'");
        }
        case TypeTag::Text:
            break;
    }
    return Value{std::string(field)};
}

std::string format_value(const Value& value) {
    if (const auto* text = std::get_if<std::string>(&value)) return *text;
    double d = std::get<double>(value);
    if (d == std::floor(d) && std::fabs(d) < 1e15) {
        return std::to_string(static_cast<int64_t>(d));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadConfig: return "bad-config";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::NotFound: return "not-found";
        case ErrorKind::Pipeline: return "pipeline";
        case ErrorKind::Service: return "service";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadConfig: return 2;
        case ErrorKind::InvalidInput: return 3;
        case ErrorKind::NotFound: return 4;
        case ErrorKind::Pipeline: return 5;
        case ErrorKind::Service: return 6;
    }
    return 1;
}

}  // namespace joininfer
