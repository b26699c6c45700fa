#include "codm/canonical.hpp"

#include <algorithm>

namespace codm {

namespace {

bool tuple_less(const std::vector<Value>& a, const std::vector<Value>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int c = compare_for_sort(a[i], b[i]);
        if (c != 0) return c < 0;
        // int 1 and real 1.0 tie in compare_for_sort; keep the order total
        if (a[i].index() != b[i].index()) return a[i].index() < b[i].index();
    }
    return false;
}

std::vector<std::string> names_of(const Schema& s, const std::vector<DimPath>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(s.path_name(p));
    return out;
}

} // namespace

FlatTuple canonical_item(const Database& db, ItemRef item) {
    if (!db.store().contains(item))
        throw Error(ErrorCode::UnknownItem,
                    db.schema().format_value(item) + " is not a live item");
    FlatTuple out;
    for (const auto& p : db.schema().canonical_syntax(item.concept_id))
        out.emplace_back(db.schema().path_name(p), db.store().get_super(db.schema(), item, p));
    return out;
}

CanonicalRelation concept_semantics(const Database& db, ConceptId c) {
    if (c == kBottom) return database_semantics(db);
    const auto paths = db.schema().canonical_syntax(c);
    CanonicalRelation r;
    r.concept_id = c;
    r.keys = names_of(db.schema(), paths);
    if (is_primitive(c)) return r;
    for (ItemRef item : db.store().extent(db.schema(), c)) {
        std::vector<Value> row;
        row.reserve(paths.size());
        for (const auto& p : paths) row.push_back(db.store().get_super(db.schema(), item, p));
        r.tuples.push_back(std::move(row));
    }
    return r;
}

CanonicalRelation database_semantics(const Database& db) {
    const Schema& s = db.schema();
    const auto paths = s.canonical_syntax(kBottom);
    CanonicalRelation r;
    r.concept_id = kBottom;
    r.keys = names_of(s, paths);
    for (ConceptId parent : s.bottom_parents()) {
        // paths of this parent, as (column, path below the parent)
        std::vector<std::pair<std::size_t, DimPath>> own;
        for (std::size_t k = 0; k < paths.size(); ++k) {
            if (paths[k].steps.front() != s.get(parent).name) continue;
            own.emplace_back(k, DimPath{parent, {paths[k].steps.begin() + 1, paths[k].steps.end()}});
        }
        for (ItemRef item : db.store().extent(s, parent)) {
            std::vector<Value> row(paths.size(), Value{Null{}});
            for (const auto& [k, p] : own) row[k] = db.store().get_super(s, item, p);
            r.tuples.push_back(std::move(row));
        }
    }
    return r;
}

bool semantic_equal(const Database& a, const Database& b) {
    CanonicalRelation ra = database_semantics(a);
    CanonicalRelation rb = database_semantics(b);
    if (ra.keys != rb.keys)
        throw Error(ErrorCode::IncomparableSchemas,
                    "the databases have different primitive paths");
    if (ra.tuples.size() != rb.tuples.size()) return false;
    std::sort(ra.tuples.begin(), ra.tuples.end(), tuple_less);
    std::sort(rb.tuples.begin(), rb.tuples.end(), tuple_less);
    for (std::size_t i = 0; i < ra.tuples.size(); ++i)
        if (!std::equal(ra.tuples[i].begin(), ra.tuples[i].end(), rb.tuples[i].begin(),
                        rb.tuples[i].end(), same_value))
            return false;
    return true;
}

std::string dump_relation(const CanonicalRelation& r) {
    std::vector<std::size_t> order(r.keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return r.keys[x] < r.keys[y]; });

    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) out += (i ? "\t" : "") + r.keys[order[i]];
    out += '\n';
    std::vector<std::vector<Value>> rows;
    for (const auto& t : r.tuples) {
        std::vector<Value> row;
        for (auto k : order) row.push_back(t[k]);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), tuple_less);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + format_value(row[i]);
        out += '\n';
    }
    return out;
}

} // namespace codm
