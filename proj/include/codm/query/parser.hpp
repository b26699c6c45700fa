#pragma once

#include "codm/query/ast.hpp"
#include "codm/schema.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace codm::query {

struct Token {
    enum class Kind {
        Ident, Int, Real, String, Ref, Hex,
        LBrace, RBrace, LAngle, RAngle, Le, Ge, EqEq, Ne, Assign, Define,
        Colon, Comma, Bar, Dot, LParen, RParen, Semicolon,
        Plus, Minus, Star, Slash, AndAnd, OrOr, Bang, End,
    };

    Kind kind = Kind::End;
    std::string text;
    std::int64_t int_value = 0;
    double real_value = 0.0;
    std::uint64_t ref_id = 0;
    int line = 1;
    int column = 1;
    std::size_t offset = 0; // byte offset into the source text
};

/// Splits query text into tokens; throws SyntaxError on stray characters or
/// unterminated strings.
std::vector<Token> tokenize(std::string_view text);

/// Concept names in `Concept#id` constants are resolved against `schema`.
Query parse_query(std::string_view text, const Schema& schema);
Expr parse_expr(std::string_view text, const Schema& schema);

/// Canonical text form; parse_query(print_query(q)) == q.
std::string print_query(const Query& q, const Schema& schema);
std::string print_expr(const Expr& e, const Schema& schema);

bool is_keyword(std::string_view word) noexcept;

} // namespace codm::query
