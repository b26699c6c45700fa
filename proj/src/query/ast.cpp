#include "codm/query/ast.hpp"

namespace codm::query {

Expr Expr::make_const(Value v) {
    Expr e;
    e.kind = Kind::Const;
    e.constant = std::move(v);
    return e;
}

Expr Expr::make_ident(std::string name) {
    Expr e;
    e.kind = Kind::Ident;
    e.name = std::move(name);
    return e;
}

Expr Expr::make_member(Expr base, std::vector<std::string> steps) {
    Expr e;
    e.kind = Kind::Member;
    e.steps = std::move(steps);
    e.args.push_back(std::move(base));
    return e;
}

Expr Expr::make_unary(UnaryOp op, Expr operand) {
    Expr e;
    e.kind = Kind::Unary;
    e.unary = op;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::make_binary(BinaryOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Binary;
    e.binary = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

Expr Expr::make_is_null(Expr operand) {
    Expr e;
    e.kind = Kind::IsNull;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::make_aggregate(AggFn fn, Expr arg) {
    Expr e;
    e.kind = Kind::Aggregate;
    e.agg = fn;
    e.args.push_back(std::move(arg));
    return e;
}

Expr Expr::make_nested(Query q) {
    Expr e;
    e.kind = Kind::Nested;
    e.nested = std::make_shared<const Query>(std::move(q));
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::Const: return same_value(a.constant, b.constant);
    case Expr::Kind::Ident: return a.name == b.name;
    case Expr::Kind::Member: return a.steps == b.steps && a.args == b.args;
    case Expr::Kind::Unary: return a.unary == b.unary && a.args == b.args;
    case Expr::Kind::Binary: return a.binary == b.binary && a.args == b.args;
    case Expr::Kind::IsNull: return a.args == b.args;
    case Expr::Kind::Aggregate: return a.agg == b.agg && a.args == b.args;
    case Expr::Kind::Nested:
        if (!a.nested || !b.nested) return a.nested == b.nested;
        return *a.nested == *b.nested;
    }
    return false;
}

const char* agg_name(AggFn fn) noexcept {
    switch (fn) {
    case AggFn::Size: return "size";
    case AggFn::Sum: return "sum";
    case AggFn::Avg: return "avg";
    case AggFn::Min: return "min";
    case AggFn::Max: return "max";
    }
    return "size";
}

std::optional<AggFn> agg_from_name(std::string_view name) noexcept {
    if (name == "size") return AggFn::Size;
    if (name == "sum") return AggFn::Sum;
    if (name == "avg") return AggFn::Avg;
    if (name == "min") return AggFn::Min;
    if (name == "max") return AggFn::Max;
    return std::nullopt;
}

} // namespace codm::query
