#pragma once

#include "codm/value.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace codm::query {

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };
enum class UnaryOp { Not, Neg };
enum class AggFn { Size, Sum, Avg, Min, Max };

struct Query;

/// Expression tree. `Member` is a property path `base.step1.step2`; the base
/// is an identifier, a constant reference or a parenthesized expression.
struct Expr {
    enum class Kind { Const, Ident, Member, Unary, Binary, IsNull, Aggregate, Nested };

    Kind kind = Kind::Const;
    Value constant;                 // Const
    std::string name;               // Ident
    std::vector<std::string> steps; // Member
    UnaryOp unary = UnaryOp::Not;
    BinaryOp binary = BinaryOp::And;
    AggFn agg = AggFn::Size;
    std::vector<Expr> args;              // operands / member base / aggregate argument
    std::shared_ptr<const Query> nested; // Nested

    static Expr make_const(Value v);
    static Expr make_ident(std::string name);
    static Expr make_member(Expr base, std::vector<std::string> steps);
    static Expr make_unary(UnaryOp op, Expr operand);
    static Expr make_binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr make_is_null(Expr operand);
    static Expr make_aggregate(AggFn fn, Expr arg);
    static Expr make_nested(Query q);

    friend bool operator==(const Expr& a, const Expr& b);
};

/// One `binder: source` entry. A path source is an identifier (concept, view
/// or variable) optionally followed by steps; `restriction` is the `= param`
/// suffix of a parent-restricted source.
struct Source {
    enum class Kind { Path, Literal };

    Kind kind = Kind::Path;
    std::string binder;
    Expr path;
    std::optional<Expr> restriction;
    std::vector<std::vector<Value>> rows; // Literal items
    std::vector<std::string> columns;    // Literal dimension names

    friend bool operator==(const Source&, const Source&) = default;
};

struct Return {
    std::string name; // empty = derive automatically
    Expr expr;

    friend bool operator==(const Return&, const Return&) = default;
};

struct Assignment {
    std::string var;
    Expr value;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Blocks {
    std::vector<Assignment> begin;
    std::vector<Assignment> before;
    std::vector<Assignment> after;
    std::vector<Assignment> end;

    friend bool operator==(const Blocks&, const Blocks&) = default;
};

/// Parsed query. When `blocks` is set the query is in block form and has
/// exactly one source (the `over` source).
struct Query {
    std::string name;
    bool distinct = false;
    std::vector<Source> sources;
    std::optional<Expr> predicate;
    std::vector<Return> returns;
    std::optional<Blocks> blocks;

    friend bool operator==(const Query&, const Query&) = default;
};

const char* agg_name(AggFn fn) noexcept;
std::optional<AggFn> agg_from_name(std::string_view name) noexcept;

} // namespace codm::query
