#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace joininfer::sql {

enum class TokenKind { Word, QuotedIdent, Number, String, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  ///< words keep their spelling; quoted identifiers are unquoted
    size_t pos = 0;    ///< byte offset in the statement

    bool is_word(std::string_view upper) const;
    bool is_symbol(std::string_view s) const { return kind == TokenKind::Symbol && text == s; }
};

/// Tokenizes arbitrary bytes. Comments are dropped, unterminated literals run
/// to the end of input, and unknown bytes become one-character symbols, so
/// the function never fails. The last token is always End.
std::vector<Token> tokenize(std::string_view text);

/// Splits a log into statements on semicolons outside literals and comments.
/// A log without semicolons starts a new statement at every line whose
/// first word is a statement keyword. Blank statements are dropped.
std::vector<std::string> split_statements(std::string_view text);

bool is_reserved(std::string_view word);

}  // namespace joininfer::sql
