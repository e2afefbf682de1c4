#include "joininfer/names.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace joininfer {

std::string normalize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (unsigned char c : name) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

size_t longest_common_substring(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    size_t best = 0;
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    return best;
}

double name_distance(std::string_view table_name, std::string_view column_name) {
    const std::string tn = normalize_name(table_name);
    const std::string cn = normalize_name(column_name);
    if (tn.empty() || cn.empty()) return 0.0;
    if (tn.find(cn) != std::string::npos) return 1.0;
    return static_cast<double>(longest_common_substring(tn, cn)) / static_cast<double>(tn.size());
}

double name_similarity(std::string_view a, std::string_view b) {
    const std::string na = normalize_name(a);
    const std::string nb = normalize_name(b);
    const size_t longest = std::max(na.size(), nb.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(longest_common_substring(na, nb)) / static_cast<double>(longest);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

bool is_named_id(std::string_view column_name) { return ends_with(normalize_name(column_name), "id"); }

bool is_named_key(std::string_view column_name) {
    const std::string n = normalize_name(column_name);
    return ends_with(n, "key") || ends_with(n, "nr");
}

bool has_typical_suffix(std::string_view column_name) {
    return is_named_id(column_name) || is_named_key(column_name);
}

std::string table_stem(std::string_view table_name) {
    std::string n = normalize_name(table_name);
    if (n.size() > 1 && n.back() == 's') n.pop_back();
    return n;
}

namespace {

// "ps" abbreviates "partsupp": same first letter, letters in order.
bool abbreviates(std::string_view token, std::string_view table) {
    if (token.empty() || token.size() > 4 || table.empty() || token.front() != table.front()) return false;
    size_t at = 0;
    for (char c : token) {
        at = table.find(c, at);
        if (at == std::string_view::npos) return false;
        ++at;
    }
    return true;
}

std::string strip_key_suffix(const std::string& n) {
    for (std::string_view suffix : {"key", "id", "nr"}) {
        if (n.size() > suffix.size() && ends_with(n, suffix)) return n.substr(0, n.size() - suffix.size());
    }
    return n;
}

}  // namespace

std::string core_column_name(std::string_view table_name, std::string_view column_name) {
    const std::string whole = normalize_name(column_name);
    const size_t cut = column_name.find('_');
    if (cut != std::string_view::npos && abbreviates(normalize_name(column_name.substr(0, cut)), normalize_name(table_name))) {
        const std::string rest = normalize_name(column_name.substr(cut + 1));
        const std::string core = strip_key_suffix(rest);
        if (!core.empty() && core != rest) return core;
        if (!rest.empty() && !has_typical_suffix(rest)) return rest;
    }
    return strip_key_suffix(whole);
}

double core_name_similarity(const ColumnRef& a, const ColumnRef& b) {
    const std::string ca = core_column_name(a.table, a.column);
    const std::string cb = core_column_name(b.table, b.column);
    const size_t longest = std::max(ca.size(), cb.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(longest_common_substring(ca, cb)) / static_cast<double>(longest);
}

}  // namespace joininfer
