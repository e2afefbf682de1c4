#include "joininfer/sql_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "joininfer/table.hpp"

namespace joininfer::sql {

namespace {

bool word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

constexpr std::array kReserved{
    "ALL",     "AND",       "ANTI",   "AS",     "ASC",    "BETWEEN",   "BY",     "CASE",   "CROSS",
    "DESC",    "DISTINCT",  "ELSE",   "END",    "EXCEPT", "EXISTS",    "FALSE",  "FETCH",  "FOR",
    "FROM",    "FULL",      "GROUP",  "HAVING", "IN",     "INNER",     "INTERSECT", "INTO", "IS",
    "JOIN",    "LATERAL",   "LEFT",   "LIKE",   "LIMIT",  "MINUS",     "NATURAL", "NOT",   "NULL",
    "OFFSET",  "ON",        "OR",     "ORDER",  "OUTER",  "QUALIFY",   "RIGHT",  "SELECT", "SEMI",
    "THEN",    "TRUE",      "UNION",  "USING",  "WHEN",   "WHERE",     "WINDOW", "WITH",
};

}  // namespace

bool Token::is_word(std::string_view upper_text) const {
    return kind == TokenKind::Word && iequals(text, upper_text);
}

bool is_reserved(std::string_view word) {
    const std::string u = upper(word);
    return std::find(kReserved.begin(), kReserved.end(), u) != kReserved.end();
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = text.size();
    auto at = [&](size_t k) -> unsigned char { return k < n ? static_cast<unsigned char>(text[k]) : 0; };

    while (i < n) {
        const unsigned char c = at(i);
        if (std::isspace(c)) {
            ++i;
        } else if (c == '-' && at(i + 1) == '-') {
            while (i < n && text[i] != '\n') ++i;
        } else if (c == '/' && at(i + 1) == '*') {
            const size_t end = text.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
        } else if (word_start(c)) {
            const size_t start = i;
            while (i < n && word_char(at(i))) ++i;
            out.push_back({TokenKind::Word, std::string(text.substr(start, i - start)), start});
        } else if (std::isdigit(c) || (c == '.' && std::isdigit(at(i + 1)))) {
            const size_t start = i;
            while (i < n && (std::isalnum(at(i)) || at(i) == '.')) ++i;
            out.push_back({TokenKind::Number, std::string(text.substr(start, i - start)), start});
        } else if (c == '\'') {
            const size_t start = i++;
            std::string value;
            while (i < n) {
                if (text[i] == '\'') {
                    if (at(i + 1) == '\'') {
                        value += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value += text[i++];
            }
            out.push_back({TokenKind::String, std::move(value), start});
        } else if (c == '"' || c == '`' || c == '[') {
            const char close = c == '[' ? ']' : static_cast<char>(c);
            const size_t start = i++;
            std::string value;
            while (i < n) {
                if (text[i] == close) {
                    if (close != ']' && at(i + 1) == static_cast<unsigned char>(close)) {
                        value += close;
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                value += text[i++];
            }
            out.push_back({TokenKind::QuotedIdent, std::move(value), start});
        } else {
            static constexpr std::array<std::string_view, 9> two{"<=", ">=", "<>", "!=", "==", "||", "::", "->", ":="};
            const std::string_view pair = text.substr(i, 2);
            if (pair.size() == 2 && std::find(two.begin(), two.end(), pair) != two.end()) {
                out.push_back({TokenKind::Symbol, std::string(pair), i});
                i += 2;
            } else {
                out.push_back({TokenKind::Symbol, std::string(1, static_cast<char>(c)), i});
                ++i;
            }
        }
    }
    out.push_back({TokenKind::End, "", n});
    return out;
}

namespace {

bool blank_statement(std::string_view s) {
    const auto tokens = tokenize(s);
    return tokens.size() == 1;
}

bool starts_with_statement_keyword(std::string_view line) {
    static constexpr std::array keywords{"SELECT", "WITH",   "INSERT", "UPDATE",   "DELETE", "CREATE",
                                         "DROP",   "ALTER",  "GRANT",  "REVOKE",   "TRUNCATE", "MERGE",
                                         "USE",    "SET",    "SHOW",   "EXPLAIN",  "BEGIN",  "COMMIT",
                                         "ROLLBACK", "CALL", "COPY",   "VALUES",   "REPLACE", "UPSERT"};
    size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && word_char(static_cast<unsigned char>(line[j]))) ++j;
    if (j == i) return false;
    const std::string w = upper(line.substr(i, j - i));
    return std::find(keywords.begin(), keywords.end(), w) != keywords.end();
}

}  // namespace

std::vector<std::string> split_statements(std::string_view text) {
    std::vector<std::string> out;
    auto emit = [&](std::string_view s) {
        if (!blank_statement(s)) out.emplace_back(s);
    };

    bool any_semicolon = false;
    size_t start = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == '\'' || c == '"' || c == '`') {
            ++i;
            while (i < n) {
                if (text[i] == c) {
                    if (i + 1 < n && text[i + 1] == c) {
                        i += 2;
                        continue;
                    }
                    break;
                }
                ++i;
            }
            ++i;
        } else if (c == '-' && i + 1 < n && text[i + 1] == '-') {
            while (i < n && text[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            const size_t end = text.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
        } else if (c == ';') {
            any_semicolon = true;
            emit(text.substr(start, i - start));
            start = ++i;
        } else {
            ++i;
        }
    }
    if (any_semicolon) {
        if (start < n) emit(text.substr(start));
        return out;
    }

    // No terminators: one statement per keyword-led line, continuation lines appended.
    std::string current;
    size_t pos = 0;
    while (pos <= n) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = n;
        const std::string_view line = text.substr(pos, eol - pos);
        if (starts_with_statement_keyword(line) && !current.empty()) {
            emit(current);
            current.clear();
        }
        if (!current.empty()) current += '\n';
        current += line;
        pos = eol + 1;
    }
    emit(current);
    return out;
}

}  // namespace joininfer::sql
