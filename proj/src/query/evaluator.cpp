#include "codm/query/evaluator.hpp"

#include "codm/query/parser.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>

namespace codm::query {

std::optional<std::size_t> ResultConcept::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == column) return i;
    return std::nullopt;
}

void collect_names(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Ident) out.push_back(e.name);
    for (const auto& s : e.steps) out.push_back(s);
    for (const auto& a : e.args) collect_names(a, out);
    if (e.nested) collect_names(*e.nested, out);
}

void collect_names(const Query& q, std::vector<std::string>& out) {
    for (const auto& s : q.sources) {
        if (s.kind == Source::Kind::Path) collect_names(s.path, out);
        if (s.restriction) collect_names(*s.restriction, out);
    }
    if (q.predicate) collect_names(*q.predicate, out);
    for (const auto& r : q.returns) collect_names(r.expr, out);
    if (q.blocks)
        for (const auto* list : {&q.blocks->begin, &q.blocks->before, &q.blocks->after,
                                 &q.blocks->end})
            for (const auto& a : *list) {
                out.push_back(a.var);
                collect_names(a.value, out);
            }
}

Query to_block_form(const Query& q) {
    if (q.blocks || q.sources.size() != 1)
        throw Error(ErrorCode::InvalidDefinition,
                    "only single-source simple queries have a block form");
    Query out;
    out.name = q.name;
    out.distinct = q.distinct;
    out.sources = q.sources;
    out.predicate = q.predicate ? *q.predicate : Expr::make_const(true);
    out.blocks = Blocks{};
    out.returns = q.returns;
    if (out.returns.empty()) {
        const Source& s = q.sources.front();
        std::string binder = s.binder;
        if (binder.empty() && s.kind == Source::Kind::Path) {
            const Expr* base = &s.path;
            if (base->kind == Expr::Kind::Member) base = &base->args.front();
            if (base->kind == Expr::Kind::Ident) binder = base->name;
        }
        if (binder.empty())
            throw Error(ErrorCode::InvalidDefinition, "anonymous literal source has no block form");
        out.returns.push_back(Return{"", Expr::make_ident(binder)});
    }
    return out;
}

namespace {

struct Eval {
    Value v;
    std::optional<std::vector<Value>> coll;

    bool is_coll() const { return coll.has_value(); }
};

using Columns = std::shared_ptr<const std::vector<std::string>>;

/// One bound source element. Multi-column rows keep `value` null and expose
/// their fields through `columns`/`row`.
struct Binding {
    std::string name;
    bool anonymous = false;
    Value value;
    Columns columns;
    std::vector<Value> row;
};

struct Frame {
    const Frame* parent = nullptr;
    std::vector<Binding> binders;
    std::map<std::string, std::optional<Value>>* vars = nullptr;
    std::optional<ItemRef> self;
};

constexpr int kMaxDepth = 200;

bool truth(const Value& v) {
    if (is_null(v)) return false;
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw Error(ErrorCode::TypeError, "expected a boolean, got " + format_value(v));
}

double as_double(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

/// Three-way comparison for == and ordering; TypeError on incompatible kinds.
int compare_values(const Value& a, const Value& b, bool ordering) {
    if (is_numeric(a) && is_numeric(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
            const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return x < y ? -1 : x > y ? 1 : 0;
        }
        const double x = as_double(a), y = as_double(b);
        return x < y ? -1 : x > y ? 1 : 0;
    }
    if (a.index() == b.index()) {
        if (const auto* s = std::get_if<std::string>(&a)) {
            const int c = s->compare(std::get<std::string>(b));
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
        if (!ordering) {
            if (const auto* x = std::get_if<bool>(&a)) return *x == std::get<bool>(b) ? 0 : 1;
            if (const auto* r = std::get_if<ItemRef>(&a))
                return refs_match(*r, std::get<ItemRef>(b)) ? 0 : 1;
        }
    }
    throw Error(ErrorCode::TypeError,
                std::string("cannot ") + (ordering ? "order " : "compare ") + format_value(a) +
                    " and " + format_value(b));
}

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return Null{};
    if (!is_numeric(a) || !is_numeric(b))
        throw Error(ErrorCode::TypeError,
                    "arithmetic needs numbers, got " + format_value(a) + " and " + format_value(b));
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
        const auto x = static_cast<std::uint64_t>(std::get<std::int64_t>(a));
        const auto y = static_cast<std::uint64_t>(std::get<std::int64_t>(b));
        switch (op) {
        case BinaryOp::Add: return wrap(x + y);
        case BinaryOp::Sub: return wrap(x - y);
        case BinaryOp::Mul: return wrap(x * y);
        default: {
            const auto sx = std::get<std::int64_t>(a), sy = std::get<std::int64_t>(b);
            if (sy == 0) throw Error(ErrorCode::TypeError, "integer division by zero");
            if (sy == -1) return wrap(0 - x);
            return sx / sy;
        }
        }
    }
    const double x = as_double(a), y = as_double(b);
    switch (op) {
    case BinaryOp::Add: return x + y;
    case BinaryOp::Sub: return x - y;
    case BinaryOp::Mul: return x * y;
    default: return x / y;
    }
}

Value aggregate(AggFn fn, const std::vector<Value>& items) {
    if (fn == AggFn::Size) return static_cast<std::int64_t>(items.size());
    std::vector<const Value*> present;
    for (const auto& v : items)
        if (!is_null(v)) present.push_back(&v);
    switch (fn) {
    case AggFn::Sum: {
        bool real = false;
        std::uint64_t isum = 0;
        double dsum = 0;
        for (const auto* v : present) {
            if (!is_numeric(*v))
                throw Error(ErrorCode::TypeError, "sum over non-numeric " + format_value(*v));
            if (std::holds_alternative<double>(*v)) real = true;
        }
        for (const auto* v : present) {
            if (real) dsum += as_double(*v);
            else isum += static_cast<std::uint64_t>(std::get<std::int64_t>(*v));
        }
        if (real) return dsum;
        return wrap(isum);
    }
    case AggFn::Avg: {
        if (present.empty()) return Null{};
        double total = 0;
        for (const auto* v : present) {
            if (!is_numeric(*v))
                throw Error(ErrorCode::TypeError, "avg over non-numeric " + format_value(*v));
            total += as_double(*v);
        }
        return total / static_cast<double>(present.size());
    }
    default: {
        if (present.empty()) return Null{};
        const Value* best = present.front();
        for (const auto* v : present) {
            if (!is_numeric(*v) && !std::holds_alternative<std::string>(*v))
                throw Error(ErrorCode::TypeError,
                            std::string(agg_name(fn)) + " over " + format_value(*v));
            const int c = compare_values(*v, *best, true);
            if ((fn == AggFn::Min && c < 0) || (fn == AggFn::Max && c > 0)) best = v;
        }
        return *best;
    }
    }
}

std::string join_steps(std::span<const std::string> steps) {
    std::string out;
    for (const auto& s : steps) out += (out.empty() ? "" : ".") + s;
    return out;
}

class Evaluator {
public:
    Evaluator(const Database& db, const Params& params) : db_(db), params_(params) {}

    ResultConcept run(const Query& q, const Frame* outer) {
        DepthGuard guard(*this);
        return q.blocks ? run_blocks(q, outer) : run_simple(q, outer);
    }

    Eval eval(const Expr& e, const Frame& f) {
        switch (e.kind) {
        case Expr::Kind::Const: return {e.constant, {}};
        case Expr::Kind::Ident: return resolve(e.name, {}, f);
        case Expr::Kind::Member: {
            const Expr& base = e.args.front();
            if (base.kind == Expr::Kind::Ident) return resolve(base.name, e.steps, f);
            return navigate(eval(base, f), e.steps);
        }
        case Expr::Kind::Unary: {
            const Value v = scalar(e.args.front(), f);
            if (e.unary == UnaryOp::Not) return {!truth(v), {}};
            if (is_null(v)) return {Null{}, {}};
            if (const auto* i = std::get_if<std::int64_t>(&v))
                return {wrap(0 - static_cast<std::uint64_t>(*i)), {}};
            if (const auto* d = std::get_if<double>(&v)) return {-*d, {}};
            throw Error(ErrorCode::TypeError, "cannot negate " + format_value(v));
        }
        case Expr::Kind::Binary: return {binary(e, f), {}};
        case Expr::Kind::IsNull: {
            const Eval v = eval(e.args.front(), f);
            return {!v.is_coll() && is_null(v.v), {}};
        }
        case Expr::Kind::Aggregate: return {aggregate(e.agg, collection(e.args.front(), f)), {}};
        case Expr::Kind::Nested:
            throw Error(ErrorCode::TypeError,
                        "a nested query can only be consumed by an aggregate");
        }
        return {};
    }

    Value scalar(const Expr& e, const Frame& f) {
        Eval v = eval(e, f);
        if (v.is_coll())
            throw Error(ErrorCode::TypeError,
                        "collection used where a single value is required: " +
                            print_expr(e, db_.schema()));
        return std::move(v.v);
    }

private:
    struct DepthGuard {
        explicit DepthGuard(Evaluator& ev) : ev_(ev) {
            if (++ev_.depth_ > kMaxDepth)
                throw Error(ErrorCode::CycleDetected, "evaluation nests too deeply");
        }
        ~DepthGuard() { --ev_.depth_; }
        Evaluator& ev_;
    };

    struct SourceShape {
        std::string name;
        bool anonymous = false;
        ConceptId concept_id = kTop;
        Columns columns;
    };

    const Schema& schema() const { return db_.schema(); }

    // ---- queries ----

    SourceShape shape_of(const Source& s) {
        SourceShape shape;
        shape.name = s.binder;
        if (s.kind == Source::Kind::Literal) {
            shape.columns = literal_columns(s);
        } else {
            const Expr* base = &s.path;
            if (base->kind == Expr::Kind::Member) base = &base->args.front();
            if (base->kind == Expr::Kind::Ident) {
                if (auto c = schema().find(base->name)) {
                    shape.concept_id = *c;
                    if (shape.name.empty()) shape.name = base->name;
                } else if (s.path.kind == Expr::Kind::Ident && db_.catalog().find_view(base->name)) {
                    auto view = view_result(base->name);
                    auto cols = std::make_shared<std::vector<std::string>>();
                    for (const auto& c : view->columns) cols->push_back(c.name);
                    shape.columns = cols;
                    if (view->columns.size() == 1) shape.concept_id = view->columns[0].domain;
                    if (shape.name.empty()) shape.name = base->name;
                }
            }
        }
        if (s.binder.empty()) shape.anonymous = true;
        return shape;
    }

    Columns literal_columns(const Source& s) {
        const std::size_t arity = s.rows.empty() ? 0 : s.rows.front().size();
        auto cols = std::make_shared<std::vector<std::string>>();
        if (!s.columns.empty()) {
            if (s.columns.size() != arity)
                throw Error(ErrorCode::ArityMismatch, "literal names " +
                                                          std::to_string(s.columns.size()) +
                                                          " columns for " + std::to_string(arity) +
                                                          "-tuples");
            *cols = s.columns;
        } else if (arity > 1) {
            for (std::size_t i = 0; i < arity; ++i) cols->push_back("col" + std::to_string(i + 1));
        }
        return cols;
    }

    std::vector<Binding> literal_rows(const Source& s, const SourceShape& shape) {
        const std::size_t arity = s.rows.empty() ? 0 : s.rows.front().size();
        std::vector<ConceptId> kinds(arity, kTop);
        std::vector<Binding> out;
        for (const auto& row : s.rows) {
            if (row.size() != arity)
                throw Error(ErrorCode::ArityMismatch, "literal tuples differ in length");
            for (std::size_t i = 0; i < arity; ++i) {
                if (is_null(row[i])) continue;
                ConceptId k = value_concept(row[i]);
                if (k == kInteger) k = kReal;
                if (kinds[i] == kTop) kinds[i] = k;
                else if (kinds[i] != k)
                    throw Error(ErrorCode::DomainViolation,
                                "literal column " + std::to_string(i + 1) + " mixes " +
                                    schema().name_of(kinds[i]) + " and " + schema().name_of(k));
            }
            Binding b;
            b.name = shape.name;
            b.anonymous = shape.anonymous;
            b.columns = shape.columns;
            if (arity == 1) b.value = row.front();
            b.row = row;
            out.push_back(std::move(b));
        }
        return out;
    }

    std::shared_ptr<const ResultConcept> view_result(const std::string& name) {
        if (auto it = views_.find(name); it != views_.end()) {
            if (!it->second)
                throw Error(ErrorCode::CycleDetected, "view '" + name + "' depends on itself", name);
            return it->second;
        }
        const Definition* def = db_.catalog().find_view(name);
        views_[name] = nullptr;
        auto result = std::make_shared<const ResultConcept>(run(def->query, nullptr));
        views_[name] = result;
        return result;
    }

    Binding bind_value(const SourceShape& shape, Value v) {
        Binding b;
        b.name = shape.name;
        b.anonymous = shape.anonymous;
        b.value = std::move(v);
        return b;
    }

    std::vector<Binding> from_eval(const SourceShape& shape, Eval e) {
        std::vector<Binding> out;
        if (e.is_coll()) {
            for (auto& v : *e.coll) out.push_back(bind_value(shape, std::move(v)));
        } else if (!is_null(e.v)) {
            out.push_back(bind_value(shape, std::move(e.v)));
        }
        return out;
    }

    bool restriction_matches(const Value& v, const Value& param) {
        if (is_null(v) || is_null(param)) return false;
        return compare_values(v, param, false) == 0;
    }

    Value implicit_parameter(ConceptId target, const Frame& f, const std::string& text) {
        for (const Frame* fr = &f; fr; fr = fr->parent) {
            std::vector<const Binding*> hits;
            for (const auto& b : fr->binders)
                if (const auto* r = std::get_if<ItemRef>(&b.value); r && r->concept_id == target)
                    hits.push_back(&b);
            if (hits.empty() && fr->self && fr->self->concept_id == target) return *fr->self;
            if (hits.size() == 1) return hits.front()->value;
            if (hits.size() > 1)
                throw Error(ErrorCode::MissingParameter,
                            "'" + text + "' matches several enclosing " +
                                schema().name_of(target) + " binders; write '" + text + " = p'");
        }
        throw Error(ErrorCode::MissingParameter,
                    "no enclosing " + schema().name_of(target) + " binder for '" + text +
                        "'; write '" + text + " = p'");
    }

    std::vector<Binding> candidates(const Source& s, const SourceShape& shape, const Frame& f) {
        if (s.kind == Source::Kind::Literal) return literal_rows(s, shape);

        const Expr* base = &s.path;
        std::span<const std::string> steps;
        if (s.path.kind == Expr::Kind::Member) {
            base = &s.path.args.front();
            steps = s.path.steps;
        }
        std::vector<Binding> out;
        if (base->kind == Expr::Kind::Ident) {
            if (auto c = schema().find(base->name)) {
                const DimPath path = schema().resolve_path(*c, steps);
                std::optional<Value> param;
                if (s.restriction) param = scalar(*s.restriction, f);
                else if (!steps.empty())
                    param = implicit_parameter(schema().path_target(path), f,
                                               print_expr(s.path, schema()));
                for (ItemRef item : db_.store().extent(schema(), *c)) {
                    if (param && !restriction_matches(db_.store().get_super(schema(), item, path),
                                                      *param))
                        continue;
                    out.push_back(bind_value(shape, item));
                }
                return out;
            }
            if (steps.empty() && db_.catalog().find_view(base->name)) {
                auto view = view_result(base->name);
                for (const auto& row : view->rows) {
                    Binding b;
                    b.name = shape.name;
                    b.anonymous = shape.anonymous;
                    b.columns = shape.columns;
                    if (row.size() == 1) b.value = row.front();
                    b.row = row;
                    out.push_back(std::move(b));
                }
                return filter_restricted(s, std::move(out), f);
            }
        }
        return filter_restricted(s, from_eval(shape, eval(s.path, f)), f);
    }

    std::vector<Binding> filter_restricted(const Source& s, std::vector<Binding> items,
                                           const Frame& f) {
        if (!s.restriction) return items;
        const Value param = scalar(*s.restriction, f);
        std::vector<Binding> out;
        for (auto& b : items)
            if (restriction_matches(b.value, param)) out.push_back(std::move(b));
        return out;
    }

    static std::string derive_name(const Return& r) {
        if (!r.name.empty()) return r.name;
        switch (r.expr.kind) {
        case Expr::Kind::Member: return r.expr.steps.back();
        case Expr::Kind::Ident: return r.expr.name;
        case Expr::Kind::Aggregate: return agg_name(r.expr.agg);
        default: return "expr";
        }
    }

    static void uniquify(std::vector<Column>& cols) {
        std::set<std::string> used;
        for (auto& c : cols) {
            if (used.insert(c.name).second) continue;
            for (int k = 2;; ++k) {
                std::string candidate = c.name + "_" + std::to_string(k);
                if (used.insert(candidate).second) {
                    c.name = candidate;
                    break;
                }
            }
        }
    }

    static void infer_domains(ResultConcept& r, const std::vector<bool>& fixed) {
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (fixed[i]) continue;
            ConceptId dom = kTop;
            for (const auto& row : r.rows) {
                if (is_null(row[i])) continue;
                const ConceptId k = value_concept(row[i]);
                if (dom == kTop) dom = k;
                else if ((dom == kInteger && k == kReal) || (dom == kReal && k == kInteger))
                    dom = kReal;
            }
            r.columns[i].domain = dom;
        }
    }

    // Domain known without data: a binder or a dimension path from a binder.
    ConceptId static_domain(const Expr& e, const std::vector<SourceShape>& shapes) const {
        const Expr* base = &e;
        if (e.kind == Expr::Kind::Member) base = &e.args.front();
        if (base->kind != Expr::Kind::Ident) return kTop;
        for (const auto& sh : shapes) {
            if (sh.name != base->name || sh.concept_id == kTop || sh.concept_id == kBottom) continue;
            if (e.kind == Expr::Kind::Ident) return sh.concept_id;
            if (is_primitive(sh.concept_id)) return kTop;
            const auto p = schema().try_resolve_path(sh.concept_id, e.steps);
            return p ? schema().path_target(*p) : kTop;
        }
        return kTop;
    }

    static void dedupe(ResultConcept& r) {
        std::vector<std::vector<Value>> kept;
        for (auto& row : r.rows) {
            const bool seen = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
                return std::equal(k.begin(), k.end(), row.begin(), row.end(), same_value);
            });
            if (!seen) kept.push_back(std::move(row));
        }
        r.rows = std::move(kept);
    }

    std::vector<Value> emit_returns(const Query& q, const Frame& f) {
        std::vector<Value> row;
        row.reserve(q.returns.size());
        for (const auto& r : q.returns) row.push_back(scalar(r.expr, f));
        return row;
    }

    ResultConcept run_simple(const Query& q, const Frame* outer) {
        ResultConcept result;
        result.name = q.name;
        std::vector<SourceShape> shapes;
        for (const auto& s : q.sources) shapes.push_back(shape_of(s));

        std::vector<bool> fixed;
        if (!q.returns.empty()) {
            for (const auto& r : q.returns) {
                const ConceptId dom = static_domain(r.expr, shapes);
                result.columns.push_back({derive_name(r), dom});
                fixed.push_back(dom != kTop);
            }
        } else {
            for (const auto& sh : shapes) {
                if (sh.columns && sh.columns->size() > 1) {
                    for (const auto& c : *sh.columns) {
                        result.columns.push_back({c, kTop});
                        fixed.push_back(false);
                    }
                } else {
                    std::string name = sh.name.empty() ? "value" : sh.name;
                    if (sh.columns && sh.columns->size() == 1 && sh.name.empty())
                        name = sh.columns->front();
                    result.columns.push_back({name, sh.concept_id});
                    fixed.push_back(sh.concept_id != kTop && !is_primitive(sh.concept_id));
                }
            }
        }

        Frame frame;
        frame.parent = outer;
        std::function<void(std::size_t)> loop = [&](std::size_t k) {
            if (k == q.sources.size()) {
                if (q.predicate && !truth(scalar(*q.predicate, frame))) return;
                if (!q.returns.empty()) {
                    result.rows.push_back(emit_returns(q, frame));
                    return;
                }
                std::vector<Value> row;
                for (const auto& b : frame.binders) {
                    if (b.columns && b.row.size() > 1) row.insert(row.end(), b.row.begin(), b.row.end());
                    else row.push_back(b.value);
                }
                result.rows.push_back(std::move(row));
                return;
            }
            auto items = candidates(q.sources[k], shapes[k], frame);
            frame.binders.emplace_back();
            for (auto& b : items) {
                frame.binders.back() = std::move(b);
                loop(k + 1);
            }
            frame.binders.pop_back();
        };
        loop(0);

        infer_domains(result, fixed);
        uniquify(result.columns);
        if (q.distinct) dedupe(result);
        return result;
    }

    void exec(const std::vector<Assignment>& stmts, Frame& frame) {
        for (const auto& a : stmts) (*frame.vars)[a.var] = scalar(a.value, frame);
    }

    ResultConcept run_blocks(const Query& q, const Frame* outer) {
        const Blocks& blocks = *q.blocks;
        std::map<std::string, std::optional<Value>> vars;
        for (const auto* list : {&blocks.begin, &blocks.before, &blocks.after, &blocks.end})
            for (const auto& a : *list) vars.emplace(a.var, std::nullopt);

        const Source& src = q.sources.front();
        const SourceShape shape = shape_of(src);
        std::vector<std::string> names;
        for (const auto& r : q.returns) collect_names(r.expr, names);
        const bool uses_binder =
            std::find(names.begin(), names.end(), shape.name) != names.end();
        const bool uses_vars = std::any_of(names.begin(), names.end(),
                                           [&](const auto& n) { return vars.count(n) != 0; });
        const bool per_row = uses_binder || !uses_vars;

        ResultConcept result;
        result.name = q.name;
        std::vector<bool> fixed;
        for (const auto& r : q.returns) {
            const ConceptId dom = static_domain(r.expr, {shape});
            result.columns.push_back({derive_name(r), dom});
            fixed.push_back(dom != kTop);
        }

        Frame frame;
        frame.parent = outer;
        frame.vars = &vars;
        exec(blocks.begin, frame);
        auto items = candidates(src, shape, frame);
        frame.binders.emplace_back();
        for (auto& b : items) {
            frame.binders.back() = std::move(b);
            exec(blocks.before, frame);
            if (q.predicate && !truth(scalar(*q.predicate, frame))) continue;
            exec(blocks.after, frame);
            if (per_row) result.rows.push_back(emit_returns(q, frame));
        }
        frame.binders.pop_back();
        exec(blocks.end, frame);
        if (!per_row) result.rows.push_back(emit_returns(q, frame));

        infer_domains(result, fixed);
        uniquify(result.columns);
        if (q.distinct) dedupe(result);
        return result;
    }

    // ---- names and paths ----

    /// True when `steps` starting at `pos` name a member of concept `c`.
    bool has_member(ConceptId c, std::span<const std::string> steps) const {
        if (steps.empty() || is_primitive(c) || !schema().contains(c)) return false;
        if (match_dimension(c, steps)) return true;
        return db_.catalog().find_property(c, steps.front()) ||
               db_.catalog().find_multi(c, steps.front());
    }

    /// Longest run of leading steps naming one dimension, descending through
    /// inline dimensions. Returns the chain of dimension indexes and the
    /// number of steps consumed.
    std::optional<std::pair<std::vector<std::size_t>, std::size_t>>
    match_dimension(ConceptId c, std::span<const std::string> steps) const {
        const Concept& concept_ref = schema().get(c);
        for (std::size_t len = steps.size(); len >= 1; --len) {
            if (auto idx = concept_ref.dimension_index(join_steps(steps.first(len))))
                return std::make_pair(std::vector<std::size_t>{*idx}, len);
        }
        for (std::size_t i = 0; i < concept_ref.intent.size(); ++i) {
            const Dimension& d = concept_ref.intent[i];
            if (!d.inline_name || is_primitive(d.domain)) continue;
            if (auto inner = match_dimension(d.domain, steps)) {
                inner->first.insert(inner->first.begin(), i);
                return inner;
            }
        }
        return std::nullopt;
    }

    Eval navigate(Eval cur, std::span<const std::string> steps) {
        std::size_t i = 0;
        while (i < steps.size()) {
            if (cur.is_coll()) {
                std::vector<Value> out;
                for (auto& v : *cur.coll) {
                    Eval sub = navigate(Eval{std::move(v), {}}, steps.subspan(i));
                    if (sub.is_coll()) out.insert(out.end(), sub.coll->begin(), sub.coll->end());
                    else out.push_back(std::move(sub.v));
                }
                return {Null{}, std::move(out)};
            }
            if (is_null(cur.v)) return {Null{}, {}};
            const auto* ref = std::get_if<ItemRef>(&cur.v);
            if (!ref)
                throw Error(ErrorCode::UnknownProperty,
                            "primitive value " + format_value(cur.v) + " has no property '" +
                                steps[i] + "'",
                            steps[i]);
            if (ref->concept_id == kTop)
                throw Error(ErrorCode::TypeError,
                            "untyped reference " + format_value(cur.v) + " cannot be navigated");
            const ItemRef item = *ref;
            const Concept& c = schema().get(item.concept_id);
            if (!db_.store().contains(item))
                throw Error(ErrorCode::UnknownItem,
                            schema().format_value(item) + " is not a live item");
            if (auto m = match_dimension(item.concept_id, steps.subspan(i))) {
                Value v = item;
                ConceptId at = item.concept_id;
                for (std::size_t idx : m->first) {
                    if (is_null(v)) break;
                    v = db_.store().values(std::get<ItemRef>(v))[idx];
                    at = schema().get(at).intent[idx].domain;
                }
                cur = Eval{std::move(v), {}};
                i += m->second;
                continue;
            }
            if (const Definition* p = db_.catalog().find_property(item.concept_id, steps[i])) {
                cur = Eval{property_value(*p, item), {}};
                ++i;
                continue;
            }
            if (db_.catalog().find_multi(item.concept_id, steps[i])) {
                std::vector<Value> targets;
                for (ItemRef t : db_.mv_get(item, steps[i])) targets.emplace_back(t);
                cur = Eval{Null{}, std::move(targets)};
                ++i;
                continue;
            }
            throw Error(ErrorCode::UnknownProperty,
                        "concept '" + c.name + "' has no property '" + steps[i] + "'", steps[i]);
        }
        return cur;
    }

    Value property_value(const Definition& p, ItemRef item) {
        DepthGuard guard(*this);
        Frame f;
        f.self = item;
        return scalar(p.body, f);
    }

    Eval from_binding(const Binding& b, std::span<const std::string> rest) {
        if (b.columns && !b.columns->empty() && !rest.empty()) {
            const auto& cols = *b.columns;
            if (auto it = std::find(cols.begin(), cols.end(), rest.front()); it != cols.end())
                return navigate(Eval{b.row[static_cast<std::size_t>(it - cols.begin())], {}},
                                rest.subspan(1));
        }
        if (b.columns && b.row.size() > 1) {
            if (rest.empty())
                throw Error(ErrorCode::TypeError,
                            "row binder '" + b.name + "' is not a single value");
            throw Error(ErrorCode::UnknownProperty,
                        "row binder '" + b.name + "' has no column '" + rest.front() + "'",
                        rest.front());
        }
        return navigate(Eval{b.value, {}}, rest);
    }

    Eval resolve(const std::string& head, std::span<const std::string> rest, const Frame& f) {
        std::vector<std::string> full;
        auto full_steps = [&]() -> std::span<const std::string> {
            if (full.empty()) {
                full.push_back(head);
                full.insert(full.end(), rest.begin(), rest.end());
            }
            return full;
        };
        bool in_property = false;
        for (const Frame* fr = &f; fr; fr = fr->parent) {
            for (auto it = fr->binders.rbegin(); it != fr->binders.rend(); ++it)
                if (!it->anonymous && it->name == head) return from_binding(*it, rest);
            if (fr->vars) {
                if (auto it = fr->vars->find(head); it != fr->vars->end()) {
                    if (!it->second)
                        throw Error(ErrorCode::UnboundBlockVariable,
                                    "block variable '" + head + "' read before assignment", head);
                    return navigate(Eval{*it->second, {}}, rest);
                }
            }
            for (auto it = fr->binders.rbegin(); it != fr->binders.rend(); ++it)
                if (it->anonymous && it->name == head) return from_binding(*it, rest);
            if (fr->self) {
                in_property = true;
                if (has_member(fr->self->concept_id, full_steps()))
                    return navigate(Eval{*fr->self, {}}, full_steps());
                if (head == "self") return navigate(Eval{*fr->self, {}}, rest);
            }
            for (auto it = fr->binders.rbegin(); it != fr->binders.rend(); ++it) {
                if (!it->anonymous) continue;
                const auto* r = std::get_if<ItemRef>(&it->value);
                if (r && r->concept_id != kTop && has_member(r->concept_id, full_steps()))
                    return navigate(Eval{it->value, {}}, full_steps());
            }
        }
        if (auto it = params_.find(head); it != params_.end())
            return navigate(Eval{it->second, {}}, rest);
        if (rest.empty()) {
            if (auto c = schema().find(head)) {
                std::vector<Value> items;
                if (!is_primitive(*c))
                    for (ItemRef r : db_.store().extent(schema(), *c)) items.emplace_back(r);
                return {Null{}, std::move(items)};
            }
            if (db_.catalog().find_view(head)) {
                auto view = view_result(head);
                if (view->columns.size() != 1)
                    throw Error(ErrorCode::TypeError,
                                "view '" + head + "' has several columns", head);
                std::vector<Value> items;
                for (const auto& row : view->rows) items.push_back(row.front());
                return {Null{}, std::move(items)};
            }
        }
        if (in_property)
            throw Error(ErrorCode::UnknownProperty, "unknown property '" + head + "'", head);
        throw Error(ErrorCode::UnknownParameter, "unknown name '" + head + "'", head);
    }

    // ---- operators ----

    Value binary(const Expr& e, const Frame& f) {
        switch (e.binary) {
        case BinaryOp::Or:
            return truth(scalar(e.args[0], f)) || truth(scalar(e.args[1], f));
        case BinaryOp::And:
            return truth(scalar(e.args[0], f)) && truth(scalar(e.args[1], f));
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
            return arithmetic(e.binary, scalar(e.args[0], f), scalar(e.args[1], f));
        default: break;
        }
        const Value a = scalar(e.args[0], f);
        const Value b = scalar(e.args[1], f);
        if (is_null(a) || is_null(b)) return false;
        const bool ordering = e.binary != BinaryOp::Eq && e.binary != BinaryOp::Ne;
        const int c = compare_values(a, b, ordering);
        switch (e.binary) {
        case BinaryOp::Eq: return c == 0;
        case BinaryOp::Ne: return c != 0;
        case BinaryOp::Lt: return c < 0;
        case BinaryOp::Le: return c <= 0;
        case BinaryOp::Gt: return c > 0;
        default: return c >= 0;
        }
    }

    std::vector<Value> collection(const Expr& arg, const Frame& f) {
        if (arg.kind == Expr::Kind::Nested) {
            ResultConcept r = run(*arg.nested, &f);
            std::vector<Value> out;
            if (r.columns.size() == 1) {
                for (auto& row : r.rows) out.push_back(std::move(row.front()));
                return out;
            }
            // multi-column rows can only be counted
            for (std::size_t i = 0; i < r.rows.size(); ++i) out.emplace_back(Null{});
            return out;
        }
        Eval v = eval(arg, f);
        if (v.is_coll()) return std::move(*v.coll);
        if (is_null(v.v)) return {};
        throw Error(ErrorCode::TypeError,
                    "aggregate argument is not a collection: " + print_expr(arg, schema()));
    }

    const Database& db_;
    const Params& params_;
    int depth_ = 0;
    std::map<std::string, std::shared_ptr<const ResultConcept>> views_;
};

} // namespace

Value aggregate_values(AggFn fn, const std::vector<Value>& items) { return aggregate(fn, items); }

ResultConcept evaluate_query(const Database& db, const Query& q, const Params& params) {
    Evaluator ev(db, params);
    return ev.run(q, nullptr);
}

ResultConcept evaluate_query(const Database& db, std::string_view text, const Params& params) {
    return evaluate_query(db, parse_query(text, db.schema()), params);
}

Value evaluate_scalar(const Database& db, const Expr& e, std::optional<ItemRef> self,
                      const Params& params) {
    Evaluator ev(db, params);
    Frame f;
    f.self = self;
    return ev.scalar(e, f);
}

Value evaluate_with(const Database& db, const Expr& e, const Params& bindings,
                    std::optional<ItemRef> self) {
    static const Params kNone;
    Evaluator ev(db, kNone);
    Frame f;
    f.self = self;
    for (const auto& [name, v] : bindings) {
        Binding b;
        b.name = name;
        b.value = v;
        f.binders.push_back(std::move(b));
    }
    return ev.scalar(e, f);
}

} // namespace codm::query
