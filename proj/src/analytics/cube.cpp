#include "codm/analytics/cube.hpp"

#include "codm/query/parser.hpp"

#include <map>

namespace codm::analytics {

namespace {

void check_spec(const Database& db, const CubeSpec& spec) {
    const Schema& s = db.schema();
    if (spec.fact == kTop || spec.fact == kBottom || !s.contains(spec.fact) ||
        is_primitive(spec.fact))
        throw Error(ErrorCode::InvalidAxisPath, "cube fact must be a stored concept");
    if (spec.axes.empty()) throw Error(ErrorCode::InvalidAxisPath, "a cube needs an axis");
    for (const auto& a : spec.axes) {
        if (a.path.source != spec.fact)
            throw Error(ErrorCode::InvalidAxisPath, "axis path does not start at the fact");
        ConceptId reached;
        try {
            reached = s.path_target(a.path);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidAxisPath, e.what());
        }
        if (reached != a.concept_id || is_primitive(reached))
            throw Error(ErrorCode::InvalidAxisPath,
                        "path '" + s.path_name(a.path) + "' does not reach a non-primitive '" +
                            s.name_of(a.concept_id) + "'");
    }
    if (!spec.measure && spec.agg != query::AggFn::Size)
        throw Error(ErrorCode::TypeError,
                    std::string(query::agg_name(spec.agg)) + " needs a measure");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

CubeAxis make_axis(const Database& db, ConceptId fact, const std::vector<std::string>& path) {
    std::optional<DimPath> p = db.schema().try_resolve_path(fact, path);
    if (!p) {
        std::string text;
        for (const auto& step : path) text += (text.empty() ? "" : ".") + step;
        throw Error(ErrorCode::InvalidAxisPath,
                    "'" + text + "' is not a path of '" + db.schema().name_of(fact) + "'");
    }
    const ConceptId target = db.schema().path_target(*p);
    if (is_primitive(target))
        throw Error(ErrorCode::InvalidAxisPath,
                    "axis '" + db.schema().path_name(*p) + "' ends at primitive '" +
                        db.schema().name_of(target) + "'");
    return CubeAxis{target, *p};
}

std::vector<Cell> build_cube(const Database& db, const CubeSpec& spec) {
    check_spec(db, spec);
    const Schema& s = db.schema();

    std::map<std::vector<std::uint64_t>, std::vector<Value>> buckets;
    for (ItemRef fact : db.store().extent(s, spec.fact)) {
        const query::Params bind{{spec.binder, Value{fact}}};
        bool pass = true;
        for (const auto& f : spec.filters) {
            const Value v = query::evaluate_with(db, f, bind);
            if (is_null(v)) pass = false;
            else if (const auto* b = std::get_if<bool>(&v)) pass = *b;
            else throw Error(ErrorCode::TypeError, "cube filter is not boolean");
            if (!pass) break;
        }
        if (!pass) continue;
        std::vector<std::uint64_t> key;
        for (const auto& a : spec.axes) {
            const Value v = db.store().get_super(s, fact, a.path);
            if (is_null(v)) break;
            key.push_back(std::get<ItemRef>(v).id);
        }
        if (key.size() != spec.axes.size()) continue;
        Value m = spec.measure ? query::evaluate_with(db, *spec.measure, bind) : Value{fact};
        buckets[key].push_back(std::move(m));
    }

    std::vector<std::vector<ItemRef>> extents;
    for (const auto& a : spec.axes) extents.push_back(db.store().extent(s, a.concept_id));

    std::vector<Cell> cells;
    std::vector<std::size_t> pos(spec.axes.size(), 0);
    for (const auto& e : extents)
        if (e.empty()) return cells;
    for (;;) {
        Cell cell;
        std::vector<std::uint64_t> key;
        for (std::size_t k = 0; k < pos.size(); ++k) {
            cell.coords.push_back(extents[k][pos[k]]);
            key.push_back(extents[k][pos[k]].id);
        }
        if (auto it = buckets.find(key); it != buckets.end()) {
            cell.facts = it->second.size();
            cell.value = query::aggregate_values(spec.agg, it->second);
        } else if (spec.agg == query::AggFn::Size) {
            cell.value = Value{std::int64_t{0}};
        }
        cells.push_back(std::move(cell));

        std::size_t k = pos.size();
        while (k > 0) {
            --k;
            if (++pos[k] < extents[k].size()) break;
            pos[k] = 0;
            if (k == 0) return cells;
        }
    }
}

CubeSpec change_level(const Database& db, const CubeSpec& spec, std::size_t axis,
                      LevelChange direction, const std::string& via) {
    if (axis >= spec.axes.size())
        throw Error(ErrorCode::NoSuchLevel, "cube has no axis " + std::to_string(axis));
    const Schema& s = db.schema();
    CubeSpec out = spec;
    CubeAxis& a = out.axes[axis];
    if (direction == LevelChange::roll_up) {
        const Dimension* d = s.get(a.concept_id).find_dimension(via);
        if (!d || d->direct || is_primitive(d->domain))
            throw Error(ErrorCode::NoSuchLevel,
                        "'" + s.name_of(a.concept_id) + "' has no superconcept level via '" + via +
                            "'");
        a.path.steps.push_back(via);
        a.concept_id = d->domain;
        return out;
    }
    if (a.path.steps.empty() || a.path.steps.back() != via)
        throw Error(ErrorCode::NoSuchLevel,
                    "no subconcept level of '" + s.name_of(a.concept_id) + "' via '" + via +
                        "' on the fact path");
    a.path.steps.pop_back();
    a.concept_id = s.path_target(a.path);
    return out;
}

std::string cube_query_text(const Database& db, const CubeSpec& spec) {
    check_spec(db, spec);
    const Schema& s = db.schema();
    std::string sources;
    std::string coords;
    std::string cond;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        const std::string a = "a" + std::to_string(k + 1);
        sources += (k ? ", " : "") + a + ": " + s.name_of(spec.axes[k].concept_id);
        coords += a + ", ";
        std::string lhs = spec.binder;
        for (const auto& step : spec.axes[k].path.steps) lhs += "." + step;
        cond += (k ? " AND " : "") + lhs + " == " + a;
    }
    for (const auto& f : spec.filters) cond += " AND (" + query::print_expr(f, s) + ")";
    std::string inner = "{" + spec.binder + ": " + s.name_of(spec.fact) + " | " + cond + "}";
    // size counts facts whatever the measure
    if (spec.measure && spec.agg != query::AggFn::Size)
        inner += " <" + query::print_expr(*spec.measure, s) + ">";
    return "{" + sources + "} <" + coords + "value = " + query::agg_name(spec.agg) + "(" + inner +
           ")>";
}

std::string dump_cube_csv(const Database& db, const CubeSpec& spec,
                          const std::vector<Cell>& cells, bool include_empty) {
    const Schema& s = db.schema();
    std::string out;
    for (const auto& a : spec.axes) out += csv_field(s.name_of(a.concept_id)) + ",";
    out += std::string(query::agg_name(spec.agg)) + "\n";
    for (const auto& c : cells) {
        const bool empty = c.facts == 0;
        if (empty && !include_empty) continue;
        for (const auto& r : c.coords) out += csv_field(db.item_label(r)) + ",";
        if (!empty || spec.agg == query::AggFn::Size) {
            const Value& v = *c.value;
            if (const auto* str = std::get_if<std::string>(&v)) out += csv_field(*str);
            else if (!is_null(v)) out += s.format_value(v);
        }
        out += "\n";
    }
    return out;
}

} // namespace codm::analytics
