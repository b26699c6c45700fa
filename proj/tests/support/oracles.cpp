#include "oracles.hpp"

#include <algorithm>

namespace codm::oracle {

namespace {

std::optional<ItemRef> scan(const Database& db, ItemRef r) {
    for (ItemRef item : db.store().extent(db.schema(), r.concept_id))
        if (item.id == r.id) return item;
    return std::nullopt;
}

std::size_t index_of(const Schema& s, ConceptId c, const std::string& name) {
    const auto& intent = s.get(c).intent;
    for (std::size_t i = 0; i < intent.size(); ++i)
        if (intent[i].name == name) return i;
    throw std::logic_error("oracle: no dimension " + name);
}

double real(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

bool numeric(const Value& v) {
    return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

Value value(const Database& db, const query::Expr& e, const std::string& binder, ItemRef item);

// -1, 0, 1
int order(const Value& a, const Value& b) {
    if (numeric(a) && numeric(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
            const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return (x > y) - (x < y);
        }
        const double x = real(a), y = real(b);
        return (x > y) - (x < y);
    }
    if (std::holds_alternative<std::string>(a)) {
        const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return (c > 0) - (c < 0);
    }
    if (std::holds_alternative<bool>(a)) return std::get<bool>(a) == std::get<bool>(b) ? 0 : 1;
    const auto& x = std::get<ItemRef>(a);
    const auto& y = std::get<ItemRef>(b);
    return x.concept_id == y.concept_id && x.id == y.id ? 0 : 1;
}

bool truth(const Value& v) { return std::holds_alternative<bool>(v) && std::get<bool>(v); }

Value value(const Database& db, const query::Expr& e, const std::string& binder, ItemRef item) {
    using K = query::Expr::Kind;
    using query::BinaryOp;
    switch (e.kind) {
    case K::Const: return e.constant;
    case K::Ident:
        if (e.name != binder) throw std::logic_error("oracle: unknown name " + e.name);
        return item;
    case K::Member: return walk(db, item, e.steps);
    case K::IsNull:
        return std::holds_alternative<Null>(value(db, e.args[0], binder, item));
    case K::Unary: {
        const Value v = value(db, e.args[0], binder, item);
        if (e.unary == query::UnaryOp::Not) return !truth(v);
        if (std::holds_alternative<Null>(v)) return v;
        if (const auto* i = std::get_if<std::int64_t>(&v))
            return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(*i));
        return -std::get<double>(v);
    }
    case K::Binary: {
        const Value a = value(db, e.args[0], binder, item);
        const Value b = value(db, e.args[1], binder, item);
        switch (e.binary) {
        case BinaryOp::And: return truth(a) && truth(b);
        case BinaryOp::Or: return truth(a) || truth(b);
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul: {
            if (std::holds_alternative<Null>(a) || std::holds_alternative<Null>(b)) return Null{};
            if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
                const auto x = static_cast<std::uint64_t>(std::get<std::int64_t>(a));
                const auto y = static_cast<std::uint64_t>(std::get<std::int64_t>(b));
                const std::uint64_t r = e.binary == BinaryOp::Add   ? x + y
                                        : e.binary == BinaryOp::Sub ? x - y
                                                                    : x * y;
                return static_cast<std::int64_t>(r);
            }
            const double x = real(a), y = real(b);
            return e.binary == BinaryOp::Add ? x + y : e.binary == BinaryOp::Sub ? x - y : x * y;
        }
        default: break;
        }
        if (std::holds_alternative<Null>(a) || std::holds_alternative<Null>(b)) return false;
        const int c = order(a, b);
        switch (e.binary) {
        case BinaryOp::Eq: return c == 0;
        case BinaryOp::Ne: return c != 0;
        case BinaryOp::Lt: return c < 0;
        case BinaryOp::Le: return c <= 0;
        case BinaryOp::Gt: return c > 0;
        case BinaryOp::Ge: return c >= 0;
        default: break;
        }
        break;
    }
    default: break;
    }
    throw std::logic_error("oracle: unsupported expression");
}

void keys_of(const Schema& s, ConceptId c, std::vector<std::string> prefix,
             std::vector<std::vector<std::string>>& out) {
    for (const auto& d : s.get(c).intent) {
        if (d.direct) continue;
        auto p = prefix;
        p.push_back(d.name);
        if (is_primitive(d.domain)) out.push_back(p);
        else keys_of(s, d.domain, p, out);
    }
}

std::string join(const std::vector<std::string>& steps) {
    std::string out;
    for (const auto& s : steps) out += (out.empty() ? "" : ".") + s;
    return out;
}

void flatten(const Database& db, ConceptId c, const std::optional<ItemRef>& item,
             std::vector<Value>& out) {
    const Schema& s = db.schema();
    for (const auto& d : s.get(c).intent) {
        if (d.direct) continue;
        std::optional<Value> slot;
        if (item) slot = db.store().values(*item)[index_of(s, c, d.name)];
        if (is_primitive(d.domain)) {
            out.push_back(slot ? *slot : Value{Null{}});
            continue;
        }
        std::optional<ItemRef> sub;
        if (slot && std::holds_alternative<ItemRef>(*slot)) sub = scan(db, std::get<ItemRef>(*slot));
        flatten(db, d.domain, sub, out);
    }
}

} // namespace

Value walk(const Database& db, ItemRef item, const std::vector<std::string>& steps) {
    Value at = item;
    for (const auto& step : steps) {
        if (!std::holds_alternative<ItemRef>(at)) return Null{};
        const auto found = scan(db, std::get<ItemRef>(at));
        if (!found) throw std::logic_error("oracle: dangling reference");
        at = db.store().values(*found)[index_of(db.schema(), found->concept_id, step)];
    }
    return at;
}

Relation concept_semantics(const Database& db, ConceptId c) {
    const Schema& s = db.schema();
    std::vector<std::vector<std::string>> keys;
    keys_of(s, c, {}, keys);
    // keys_of visits dimensions in declaration order; reorder step-wise
    std::vector<std::size_t> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    Relation r;
    for (auto i : order) r.keys.push_back(join(keys[i]));
    for (ItemRef item : db.store().extent(s, c)) {
        std::vector<Value> flat;
        flatten(db, c, item, flat);
        std::vector<Value> row;
        for (auto i : order) row.push_back(flat[i]);
        r.tuples.push_back(std::move(row));
    }
    return r;
}

std::set<std::string> canonical_names(const Schema& schema, ConceptId c) {
    std::vector<std::vector<std::string>> keys;
    keys_of(schema, c, {}, keys);
    std::set<std::string> out;
    for (const auto& k : keys) out.insert(join(k));
    return out;
}

bool predicate(const Database& db, const query::Expr& e, const std::string& binder, ItemRef item) {
    return truth(value(db, e, binder, item));
}

std::vector<ItemRef> filter(const Database& db, ConceptId c, const query::Expr& pred,
                            const std::string& binder) {
    std::vector<ItemRef> out;
    for (ItemRef item : db.store().extent(db.schema(), c))
        if (predicate(db, pred, binder, item)) out.push_back(item);
    return out;
}

std::vector<ItemRef> zigzag(const Database& db, ConceptId t, const std::vector<std::string>& t_steps,
                            ConceptId c, const std::vector<std::string>& c_steps, std::int64_t k) {
    std::vector<ItemRef> out;
    for (ItemRef outer : db.store().extent(db.schema(), t)) {
        const Value key = walk(db, outer, t_steps);
        std::int64_t count = 0;
        if (!std::holds_alternative<Null>(key))
            for (ItemRef inner : db.store().extent(db.schema(), c)) {
                const Value v = walk(db, inner, c_steps);
                if (!std::holds_alternative<Null>(v) && order(v, key) == 0) ++count;
            }
        if (count < k) out.push_back(outer);
    }
    return out;
}

Value aggregate(query::AggFn fn, const std::vector<Value>& values) {
    using query::AggFn;
    if (fn == AggFn::Size) return static_cast<std::int64_t>(values.size());
    std::vector<Value> xs;
    for (const auto& v : values)
        if (!std::holds_alternative<Null>(v)) xs.push_back(v);
    if (fn == AggFn::Sum) {
        bool all_int = true;
        std::uint64_t isum = 0;
        double dsum = 0;
        for (const auto& v : xs) {
            if (const auto* i = std::get_if<std::int64_t>(&v)) isum += static_cast<std::uint64_t>(*i);
            else all_int = false;
            dsum += real(v);
        }
        if (all_int) return static_cast<std::int64_t>(isum);
        return dsum;
    }
    if (xs.empty()) return Null{};
    if (fn == AggFn::Avg) {
        double sum = 0;
        for (const auto& v : xs) sum += real(v);
        return sum / static_cast<double>(xs.size());
    }
    Value best = xs.front();
    for (const auto& v : xs) {
        const int c = order(v, best);
        if ((fn == AggFn::Min && c < 0) || (fn == AggFn::Max && c > 0)) best = v;
    }
    return best;
}

std::vector<OracleCell> cube(const Database& db, ConceptId fact,
                             const std::vector<std::pair<ConceptId, std::vector<std::string>>>& axes,
                             const std::vector<std::string>& measure, query::AggFn fn) {
    std::vector<std::vector<ItemRef>> extents;
    for (const auto& a : axes) extents.push_back(db.store().extent(db.schema(), a.first));
    std::vector<std::vector<ItemRef>> combos{{}};
    for (const auto& e : extents) {
        std::vector<std::vector<ItemRef>> next;
        for (const auto& prefix : combos)
            for (ItemRef r : e) {
                auto c = prefix;
                c.push_back(r);
                next.push_back(std::move(c));
            }
        combos = std::move(next);
    }
    std::vector<OracleCell> out;
    for (const auto& coords : combos) {
        std::vector<Value> values;
        for (ItemRef f : db.store().extent(db.schema(), fact)) {
            bool hit = true;
            for (std::size_t k = 0; k < axes.size() && hit; ++k) {
                const Value v = walk(db, f, axes[k].second);
                hit = std::holds_alternative<ItemRef>(v) && std::get<ItemRef>(v) == coords[k];
            }
            if (hit) values.push_back(walk(db, f, measure));
        }
        OracleCell cell{coords, std::nullopt};
        if (!values.empty() || fn == query::AggFn::Size) cell.value = aggregate(fn, values);
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<std::vector<std::string>> paths(const Schema& schema, ConceptId from, ConceptId to) {
    std::vector<std::vector<std::string>> out;
    if (from == to) out.push_back({});
    if (is_primitive(from)) return out;
    for (const auto& d : schema.get(from).intent) {
        if (d.direct) continue;
        for (auto tail : paths(schema, d.domain, to)) {
            tail.insert(tail.begin(), d.name);
            out.push_back(std::move(tail));
        }
    }
    return out;
}

std::set<ItemRef> infer(const Database& db, ConceptId fact,
                        const std::map<ConceptId, std::set<ItemRef>>& inputs, ConceptId target) {
    std::set<ItemRef> out;
    for (ItemRef f : db.store().extent(db.schema(), fact)) {
        bool keep = true;
        for (const auto& [c, allowed] : inputs)
            for (const auto& p : paths(db.schema(), fact, c)) {
                const Value v = walk(db, f, p);
                if (!std::holds_alternative<ItemRef>(v) || !allowed.count(std::get<ItemRef>(v)))
                    keep = false;
            }
        if (!keep) continue;
        for (const auto& p : paths(db.schema(), fact, target))
            if (const Value v = walk(db, f, p); std::holds_alternative<ItemRef>(v))
                out.insert(std::get<ItemRef>(v));
    }
    return out;
}

std::vector<std::string> integrity(const Database& db) {
    const Schema& s = db.schema();
    std::vector<std::string> problems;
    std::map<ItemRef, std::int64_t> usage;
    for (ConceptId c : s.concepts()) {
        if (is_primitive(c)) continue;
        const auto& intent = s.get(c).intent;
        for (ItemRef item : db.store().extent(s, c)) {
            const auto& values = db.store().values(item);
            if (values.size() != intent.size()) problems.push_back("arity of " + s.format_value(item));
            for (std::size_t i = 0; i < values.size() && i < intent.size(); ++i) {
                const Value& v = values[i];
                if (std::holds_alternative<Null>(v)) {
                    if (!intent[i].nullable) problems.push_back("null in " + s.format_value(item));
                    continue;
                }
                if (const auto* r = std::get_if<ItemRef>(&v)) {
                    if (r->concept_id != intent[i].domain || !scan(db, *r))
                        problems.push_back("dangling " + s.format_value(v) + " in " +
                                           s.format_value(item));
                    ++usage[*r];
                }
            }
        }
    }
    for (ConceptId c : s.concepts()) {
        if (is_primitive(c)) continue;
        for (ItemRef item : db.store().extent(s, c)) {
            const auto it = usage.find(item);
            const std::int64_t expected = it == usage.end() ? 0 : it->second;
            if (db.store().usage(item) != expected)
                problems.push_back("usage of " + s.format_value(item));
        }
    }
    return problems;
}

} // namespace codm::oracle
