#include "codm/analytics/hierarchy.hpp"

#include "codm/query/evaluator.hpp"

namespace codm::analytics {

namespace {

std::vector<std::string> split_dots(const std::string& text) {
    std::vector<std::string> out;
    std::size_t from = 0;
    for (std::size_t next; (next = text.find('.', from)) != std::string::npos; from = next + 1)
        out.push_back(text.substr(from, next - from));
    out.push_back(text.substr(from));
    return out;
}

std::optional<DimPath> path_between(const Schema& s, ConceptId from, ConceptId to,
                                    const std::string& via) {
    if (via.empty()) return std::nullopt;
    auto p = s.try_resolve_path(from, split_dots(via));
    if (!p || p->steps.empty() || s.path_target(*p) != to) return std::nullopt;
    return p;
}

bool accepted(const Database& db, const TreeLevel& level, ItemRef item) {
    if (!level.filter) return true;
    const Value v = query::evaluate_scalar(db, *level.filter, item);
    if (is_null(v)) return false;
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw Error(ErrorCode::TypeError, "tree filter is not boolean");
}

void grow(const Database& db, const TreeSpec& spec, std::size_t last, TreeNode& node) {
    const std::size_t k = node.level; // children belong to levels[k]
    if (k > last) return;
    std::vector<ItemRef> items = k == 0
        ? db.store().extent(db.schema(), spec.levels[0].concept_id)
        : expand_item(db, spec, k, *node.item);
    const TreeLevel& level = spec.levels[k];
    for (ItemRef item : items) {
        if (!accepted(db, level, item)) continue;
        TreeNode child;
        child.level = k + 1;
        child.item = item;
        for (const auto& name : level.shown)
            child.shown.emplace_back(name, query::evaluate_scalar(db, query::Expr::make_ident(name), item));
        grow(db, spec, last, child);
        node.children.push_back(std::move(child));
    }
}

void dump(const Database& db, const TreeNode& node, std::size_t depth, std::string& out) {
    out.append(depth * 2, ' ');
    out += node.item ? db.item_label(*node.item) : "⊤";
    if (!node.shown.empty()) {
        out += " [";
        for (std::size_t i = 0; i < node.shown.size(); ++i) {
            const Value& v = node.shown[i].second;
            out += (i ? " " : "") + node.shown[i].first + "=";
            if (const auto* str = std::get_if<std::string>(&v)) out += *str;
            else if (const auto* r = std::get_if<ItemRef>(&v)) out += db.item_label(*r);
            else out += format_value(v);
        }
        out += "]";
    }
    out += "\n";
    for (const auto& c : node.children) dump(db, c, depth + 1, out);
}

} // namespace

Expansion expansion_rule(const Database& db, const TreeSpec& spec, std::size_t k) {
    const Schema& s = db.schema();
    if (k == 0 || k >= spec.levels.size())
        throw Error(ErrorCode::InvalidTreeSpec, "tree has no level " + std::to_string(k + 1));
    const ConceptId child = spec.levels[k].concept_id;
    const ConceptId parent = spec.levels[k - 1].concept_id;
    const std::string& via = spec.levels[k].via;
    if (path_between(s, child, parent, via)) return Expansion::subitems;
    if (path_between(s, parent, child, via)) return Expansion::superitem;
    if (const Definition* mv = db.catalog().find_multi(parent, via)) {
        if (mv->target == child) return Expansion::multi_valued;
    } else if (db.catalog().find_property(parent, via)) {
        return Expansion::virtual_property;
    }
    throw Error(ErrorCode::InvalidTreeSpec,
                "'" + via + "' does not connect '" + s.name_of(parent) + "' to '" +
                    s.name_of(child) + "'");
}

std::vector<ItemRef> expand_item(const Database& db, const TreeSpec& spec, std::size_t k,
                                 ItemRef parent) {
    const Schema& s = db.schema();
    const TreeLevel& level = spec.levels.at(k);
    const ConceptId above = spec.levels[k - 1].concept_id;
    switch (expansion_rule(db, spec, k)) {
    case Expansion::subitems:
        return db.store().get_subs(s, parent, level.concept_id,
                                   *path_between(s, level.concept_id, above, level.via));
    case Expansion::superitem: {
        const Value v = db.store().get_super(s, parent, *path_between(s, above, level.concept_id,
                                                                      level.via));
        if (const auto* r = std::get_if<ItemRef>(&v)) return {*r};
        return {};
    }
    case Expansion::multi_valued:
        return db.mv_get(parent, level.via);
    case Expansion::virtual_property: {
        const Value v = query::evaluate_scalar(db, query::Expr::make_ident(level.via), parent);
        if (is_null(v)) return {};
        const auto* r = std::get_if<ItemRef>(&v);
        if (!r || r->concept_id != level.concept_id)
            throw Error(ErrorCode::InvalidTreeSpec,
                        "property '" + level.via + "' does not yield '" +
                            s.name_of(level.concept_id) + "' items");
        return {*r};
    }
    }
    return {};
}

TreeNode hierarchy_tree(const Database& db, const TreeSpec& spec, std::size_t depth_limit) {
    if (spec.levels.empty()) throw Error(ErrorCode::InvalidTreeSpec, "a tree needs a level");
    for (const auto& level : spec.levels)
        if (!db.schema().contains(level.concept_id) || is_primitive(level.concept_id))
            throw Error(ErrorCode::InvalidTreeSpec, "tree levels must be stored concepts");
    for (std::size_t k = 1; k < spec.levels.size(); ++k) (void)expansion_rule(db, spec, k);
    std::size_t last = spec.levels.size() - 1;
    if (depth_limit != 0 && depth_limit - 1 < last) last = depth_limit - 1;
    TreeNode root;
    grow(db, spec, last, root);
    return root;
}

std::string dump_tree(const Database& db, const TreeNode& root) {
    std::string out;
    dump(db, root, 0, out);
    return out;
}

} // namespace codm::analytics
