#include "codm/database.hpp"

#include "codm/query/evaluator.hpp"
#include "codm/query/parser.hpp"

#include <algorithm>
#include <functional>

namespace codm {

namespace {

const Definition* find_def(const std::vector<Definition>& defs, DefKind kind, ConceptId owner,
                           std::string_view name) {
    for (const auto& d : defs)
        if (d.kind == kind && d.owner == owner && d.name == name) return &d;
    return nullptr;
}

std::set<std::uint32_t> concepts_of(const std::vector<ItemRef>& refs) {
    std::set<std::uint32_t> out;
    for (auto r : refs) out.insert(r.concept_id.value);
    return out;
}

} // namespace

const Definition* Catalog::find_view(std::string_view name) const {
    return find_def(defs_, DefKind::view, kTop, name);
}

const Definition* Catalog::find_property(ConceptId owner, std::string_view name) const {
    return find_def(defs_, DefKind::property, owner, name);
}

const Definition* Catalog::find_constraint(ConceptId owner, std::string_view name) const {
    return find_def(defs_, DefKind::constraint, owner, name);
}

const Definition* Catalog::find_multi(ConceptId owner, std::string_view name) const {
    return find_def(defs_, DefKind::multi, owner, name);
}

bool Catalog::owns_any(ConceptId c) const {
    return std::any_of(defs_.begin(), defs_.end(), [c](const Definition& d) {
        return (d.kind != DefKind::view && d.owner == c) ||
               (d.kind == DefKind::multi && (d.target == c || d.link == c));
    });
}

bool Catalog::has_constraints() const {
    return std::any_of(defs_.begin(), defs_.end(),
                       [](const Definition& d) { return d.kind == DefKind::constraint; });
}

// ---- schema ----

ConceptId Database::define_concept(const ConceptSpec& spec) {
    return define_concepts({spec}).front();
}

std::vector<ConceptId> Database::define_concepts(const std::vector<ConceptSpec>& specs) {
    for (const auto& s : specs)
        if (catalog_.find_view(s.name))
            throw Error(ErrorCode::DuplicateName, "'" + s.name + "' already names a view", s.name);
    return schema_.define_concepts(specs);
}

void Database::remove_concept(ConceptId c) {
    const Concept& target = schema_.get(c);
    if (target.primitive)
        throw Error(ErrorCode::InvalidDefinition, "primitive concepts cannot be removed",
                    target.name);
    if (store_.size(c) != 0)
        throw Error(ErrorCode::ConceptInUse, "concept '" + target.name + "' still has items",
                    target.name);
    for (auto id : schema_.concepts()) {
        if (id == c) continue;
        for (const auto& d : schema_.get(id).intent)
            if (d.domain == c)
                throw Error(ErrorCode::ConceptInUse,
                            "'" + schema_.get(id).name + "." + d.name + "' refers to '" +
                                target.name + "'",
                            target.name);
    }
    if (catalog_.owns_any(c))
        throw Error(ErrorCode::ConceptInUse,
                    "definitions are attached to '" + target.name + "'", target.name);
    schema_.remove_concept(c);
    store_.drop_extent(c);
}

ConceptId Database::mutable_target(std::string_view name) const {
    if (catalog_.find_view(name))
        throw Error(ErrorCode::ViewImmutable,
                    "view '" + std::string(name) + "' cannot be modified", std::string(name));
    return schema_.id_of(name);
}

// ---- items ----

ItemRef Database::insert(ConceptId c, std::vector<Value> values) {
    std::optional<ItemStore> backup;
    if (catalog_.has_constraints()) backup = store_;
    const ItemRef ref = store_.insert(schema_, c, std::move(values));
    try {
        check_constraints({c.value}, {ref});
    } catch (...) {
        store_ = std::move(*backup);
        throw;
    }
    return ref;
}

ItemRef Database::insert(std::string_view concept_name, std::vector<Value> values) {
    return insert(mutable_target(concept_name), std::move(values));
}

void Database::update(ItemRef item, std::string_view dim, Value v) {
    std::optional<ItemStore> backup;
    if (catalog_.has_constraints()) backup = store_;
    store_.update(schema_, item, dim, std::move(v));
    try {
        check_constraints({item.concept_id.value}, {item});
    } catch (...) {
        store_ = std::move(*backup);
        throw;
    }
}

DeletionReport Database::erase(ItemRef item) {
    std::optional<ItemStore> backup;
    if (catalog_.has_constraints()) backup = store_;
    DeletionReport report = store_.erase(schema_, item);
    try {
        std::vector<ItemRef> touched;
        for (const auto& n : report.nulled) touched.push_back(n.item);
        auto mutated = concepts_of(report.deleted);
        for (auto c : concepts_of(touched)) mutated.insert(c);
        check_constraints(mutated, touched);
    } catch (...) {
        store_ = std::move(*backup);
        throw;
    }
    return report;
}

std::vector<ItemRef> Database::collect_garbage() {
    std::optional<ItemStore> backup;
    if (catalog_.has_constraints()) backup = store_;
    auto collected = store_.collect_garbage(schema_);
    try {
        check_constraints(concepts_of(collected), {});
    } catch (...) {
        store_ = std::move(*backup);
        throw;
    }
    return collected;
}

// ---- definitions ----

void Database::name_unused(ConceptId owner, const std::string& name) const {
    const Concept& c = schema_.get(owner);
    if (c.primitive)
        throw Error(ErrorCode::InvalidDefinition,
                    "primitive concept '" + c.name + "' cannot carry definitions", c.name);
    if (c.find_dimension(name) || catalog_.find_property(owner, name) ||
        catalog_.find_constraint(owner, name) || catalog_.find_multi(owner, name))
        throw Error(ErrorCode::DuplicateName,
                    "'" + c.name + "." + name + "' is already defined", c.name);
}

void Database::define_view(const std::string& name, query::Query q) {
    if (schema_.find(name) || catalog_.find_view(name))
        throw Error(ErrorCode::DuplicateName, "'" + name + "' is already defined", name);
    Definition def;
    def.kind = DefKind::view;
    def.name = name;
    def.query = std::move(q);
    def.query.name.clear();
    catalog_.add(std::move(def));
}

void Database::define_property(ConceptId owner, const std::string& name, query::Expr body) {
    name_unused(owner, name);

    // static dependency walk by property name; forward references are allowed
    std::map<std::string, std::vector<std::string>> deps;
    auto add_deps = [&deps](const std::string& prop, const query::Expr& e) {
        std::vector<std::string> names;
        query::collect_names(e, names);
        for (auto& n : names) deps[prop].push_back(std::move(n));
    };
    for (const auto& d : catalog_.definitions())
        if (d.kind == DefKind::property) add_deps(d.name, d.body);
    add_deps(name, body);
    std::vector<std::string> chain;
    std::set<std::string> done;
    std::function<bool(const std::string&)> visit = [&](const std::string& p) {
        if (std::find(chain.begin(), chain.end(), p) != chain.end()) {
            chain.push_back(p);
            return true;
        }
        if (!done.insert(p).second || !deps.count(p)) return false;
        chain.push_back(p);
        for (const auto& n : deps[p])
            if (deps.count(n) && visit(n)) return true;
        chain.pop_back();
        return false;
    };
    if (visit(name)) {
        std::string text;
        for (const auto& p : chain) text += (text.empty() ? "" : " -> ") + p;
        throw Error(ErrorCode::CycleDetected, "virtual properties depend on each other: " + text,
                    schema_.get(owner).name);
    }

    Definition def;
    def.kind = DefKind::property;
    def.name = name;
    def.owner = owner;
    def.body = std::move(body);
    for (ItemRef item : store_.extent(schema_, owner)) {
        try {
            (void)query::evaluate_scalar(*this, def.body, item);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::TypeError) throw;
        }
    }
    catalog_.add(std::move(def));
}

void Database::define_constraint(ConceptId owner, const std::string& name, query::Expr body) {
    name_unused(owner, name);
    Definition def;
    def.kind = DefKind::constraint;
    def.name = name;
    def.owner = owner;
    def.watched = watched_concepts(body);
    def.body = std::move(body);
    for (ItemRef item : store_.extent(schema_, owner)) check_constraint(def, item);
    catalog_.add(std::move(def));
}

ConceptId Database::define_multi(ConceptId owner, const std::string& name, ConceptId target) {
    name_unused(owner, name);
    const Concept& target_concept = schema_.get(target);
    const std::string link_name = "MV_" + schema_.get(owner).name + "_" + name;
    ConceptId link;
    if (auto existing = schema_.find(link_name)) {
        const Concept& c = schema_.get(*existing);
        const bool adoptable = c.hidden && c.intent.size() == 2 && c.intent[0].name == "src" &&
                               c.intent[0].domain == owner && c.intent[1].name == "tgt" &&
                               c.intent[1].domain == target &&
                               !std::any_of(catalog_.definitions().begin(),
                                            catalog_.definitions().end(),
                                            [&](const Definition& d) { return d.link == *existing; });
        if (!adoptable)
            throw Error(ErrorCode::DuplicateName, "concept '" + link_name + "' already exists",
                        link_name);
        link = *existing;
    } else {
        ConceptSpec spec;
        spec.name = link_name;
        spec.hidden = true;
        spec.dims = {DimSpec{"src", schema_.get(owner).name, false, false, false},
                     DimSpec{"tgt", target_concept.name, false, false, false}};
        link = schema_.define_concept(spec);
    }
    Definition def;
    def.kind = DefKind::multi;
    def.name = name;
    def.owner = owner;
    def.target = target;
    def.link = link;
    catalog_.add(std::move(def));
    return link;
}

namespace {

const Definition& require_multi(const Catalog& catalog, const Schema& schema, ItemRef item,
                                std::string_view prop) {
    const Definition* def = catalog.find_multi(item.concept_id, prop);
    if (!def)
        throw Error(ErrorCode::UnknownProperty,
                    "'" + schema.name_of(item.concept_id) + "." + std::string(prop) +
                        "' is not a multi-valued property",
                    std::string(prop));
    return *def;
}

} // namespace

ItemRef Database::find_link(const Definition& mv, ItemRef item, ItemRef target) const {
    for (ItemRef link : store_.extent(schema_, mv.link)) {
        const auto& v = store_.values(link);
        if (refs_match(std::get<ItemRef>(v[0]), item) && refs_match(std::get<ItemRef>(v[1]), target))
            return link;
    }
    return ItemRef{kTop, 0};
}

void Database::mv_add(ItemRef item, std::string_view prop, ItemRef target) {
    const Definition& def = require_multi(catalog_, schema_, item, prop);
    if (!store_.contains(item))
        throw Error(ErrorCode::UnknownItem, schema_.format_value(item) + " is not a live item");
    if (target.concept_id == kTop) target.concept_id = def.target;
    if (target.concept_id != def.target || !store_.contains(target))
        throw Error(ErrorCode::DomainViolation,
                    "'" + def.name + "' expects a live " + schema_.name_of(def.target) +
                        " item, got " + schema_.format_value(target),
                    def.name);
    if (find_link(def, item, target).concept_id != kTop)
        throw Error(ErrorCode::DuplicateLink,
                    schema_.format_value(item) + "." + def.name + " already holds " +
                        schema_.format_value(target),
                    def.name);
    insert(def.link, {item, target});
}

void Database::mv_delete(ItemRef item, std::string_view prop, ItemRef target) {
    const Definition& def = require_multi(catalog_, schema_, item, prop);
    if (target.concept_id == kTop) target.concept_id = def.target;
    const ItemRef link = find_link(def, item, target);
    if (link.concept_id == kTop)
        throw Error(ErrorCode::UnknownLink,
                    schema_.format_value(item) + "." + def.name + " does not hold " +
                        schema_.format_value(target),
                    def.name);
    erase(link);
}

std::vector<ItemRef> Database::mv_get(ItemRef item, std::string_view prop) const {
    const Definition& def = require_multi(catalog_, schema_, item, prop);
    std::vector<ItemRef> out;
    for (ItemRef link : store_.extent(schema_, def.link)) {
        const auto& v = store_.values(link);
        if (refs_match(std::get<ItemRef>(v[0]), item)) out.push_back(std::get<ItemRef>(v[1]));
    }
    return out;
}

// ---- constraints ----

std::set<std::uint32_t> Database::watched_concepts(const query::Expr& e) const {
    std::vector<std::string> names;
    query::collect_names(e, names);
    std::set<std::uint32_t> out;
    std::set<std::string> seen;
    while (!names.empty()) {
        const std::string n = std::move(names.back());
        names.pop_back();
        if (!seen.insert(n).second) continue;
        if (auto c = schema_.find(n)) out.insert(c->value);
        for (const auto& d : catalog_.definitions()) {
            if (d.name != n) continue;
            if (d.kind == DefKind::view) query::collect_names(d.query, names);
            if (d.kind == DefKind::property) query::collect_names(d.body, names);
            if (d.kind == DefKind::multi) out.insert(d.link.value);
        }
    }
    return out;
}

std::set<std::uint32_t> Database::watched_concepts(const query::Query& q) const {
    query::Expr wrapper = query::Expr::make_nested(q);
    return watched_concepts(wrapper);
}

void Database::check_constraint(const Definition& def, ItemRef item) const {
    const Value v = query::evaluate_scalar(*this, def.body, item);
    if (!is_null(v) && !std::holds_alternative<bool>(v))
        throw Error(ErrorCode::TypeError,
                    "constraint " + schema_.name_of(def.owner) + "." + def.name +
                        " is not boolean",
                    def.name);
    if (is_null(v) || !std::get<bool>(v))
        throw Error(ErrorCode::ConstraintViolation,
                    "constraint " + schema_.name_of(def.owner) + "." + def.name +
                        " fails for " + item_label(item),
                    def.name);
}

void Database::check_constraints(const std::set<std::uint32_t>& mutated,
                                 const std::vector<ItemRef>& touched) const {
    for (const auto& def : catalog_.definitions()) {
        if (def.kind != DefKind::constraint) continue;
        const bool all = std::any_of(def.watched.begin(), def.watched.end(),
                                     [&](auto c) { return mutated.count(c) != 0; });
        if (all) {
            for (ItemRef item : store_.extent(schema_, def.owner)) check_constraint(def, item);
            continue;
        }
        if (!mutated.count(def.owner.value)) continue;
        for (ItemRef item : touched)
            if (item.concept_id == def.owner && store_.contains(item)) check_constraint(def, item);
    }
}

void Database::check_all_constraints() const {
    for (const auto& def : catalog_.definitions())
        if (def.kind == DefKind::constraint)
            for (ItemRef item : store_.extent(schema_, def.owner)) check_constraint(def, item);
}

// ---- labels ----

Value Database::label_value(ItemRef item) const {
    if (!store_.contains(item)) return Null{};
    std::function<std::optional<Value>(ItemRef)> first = [&](ItemRef at) -> std::optional<Value> {
        const Concept& c = schema_.get(at.concept_id);
        const auto& values = store_.values(at);
        for (std::size_t i = 0; i < c.intent.size(); ++i) {
            const Dimension& d = c.intent[i];
            if (d.direct) continue;
            if (is_primitive(d.domain)) return values[i];
            if (is_null(values[i])) return Value{Null{}};
            if (auto v = first(std::get<ItemRef>(values[i]))) return v;
        }
        return std::nullopt;
    };
    return first(item).value_or(Null{});
}

std::string Database::item_label(ItemRef item) const {
    std::string out = schema_.format_value(item);
    const Value v = label_value(item);
    if (is_null(v)) return out;
    if (const auto* s = std::get_if<std::string>(&v)) return out + "(" + *s + ")";
    return out + "(" + format_value(v) + ")";
}

} // namespace codm
