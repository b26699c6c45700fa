#pragma once

#include "codm/query/ast.hpp"
#include "codm/schema.hpp"
#include "codm/store.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace codm {

enum class DefKind { view, property, constraint, multi };

/// Named definition attached to the database. Views have no owner; the other
/// kinds belong to `owner`. A multi-valued property is backed by the hidden
/// link concept `link` with dimensions {src, tgt}.
struct Definition {
    DefKind kind = DefKind::view;
    std::string name;
    ConceptId owner = kTop;
    query::Query query;
    query::Expr body;
    ConceptId target = kTop;
    ConceptId link = kTop;
    std::set<std::uint32_t> watched;
};

/// Definitions in definition order.
class Catalog {
public:
    const std::vector<Definition>& definitions() const { return defs_; }

    const Definition* find_view(std::string_view name) const;
    const Definition* find_property(ConceptId owner, std::string_view name) const;
    const Definition* find_constraint(ConceptId owner, std::string_view name) const;
    const Definition* find_multi(ConceptId owner, std::string_view name) const;
    bool owns_any(ConceptId c) const;
    bool has_constraints() const;

    void add(Definition def) { defs_.push_back(std::move(def)); }

private:
    std::vector<Definition> defs_;
};

/// Schema, extents and catalog with the mutation rules applied together:
/// constraint checks after every mutation, rollback of the store when a
/// mutation fails, and immutability of views.
class Database {
public:
    const Schema& schema() const { return schema_; }
    const ItemStore& store() const { return store_; }
    const Catalog& catalog() const { return catalog_; }

    // Raw access for loaders and tests that build deliberately broken states.
    Schema& mutable_schema() { return schema_; }
    ItemStore& mutable_store() { return store_; }

    ConceptId define_concept(const ConceptSpec& spec);
    std::vector<ConceptId> define_concepts(const std::vector<ConceptSpec>& specs);
    /// Only concepts with an empty extent, no referencing dimension and no
    /// attached definitions can be removed.
    void remove_concept(ConceptId c);

    /// Resolves a concept name for mutation; view names raise ViewImmutable.
    ConceptId mutable_target(std::string_view name) const;

    ItemRef insert(ConceptId c, std::vector<Value> values);
    ItemRef insert(std::string_view concept_name, std::vector<Value> values);
    void update(ItemRef item, std::string_view dim, Value v);
    DeletionReport erase(ItemRef item);
    std::vector<ItemRef> collect_garbage();

    void define_view(const std::string& name, query::Query q);
    void define_property(ConceptId owner, const std::string& name, query::Expr body);
    void define_constraint(ConceptId owner, const std::string& name, query::Expr body);
    /// Creates (or adopts, when loading) the hidden link concept MV_<owner>_<name>.
    ConceptId define_multi(ConceptId owner, const std::string& name, ConceptId target);

    void mv_add(ItemRef item, std::string_view prop, ItemRef target);
    void mv_delete(ItemRef item, std::string_view prop, ItemRef target);
    std::vector<ItemRef> mv_get(ItemRef item, std::string_view prop) const;

    void merge_concept(ConceptId superc, ConceptId subc);
    ConceptId split_concept(ConceptId c, const std::vector<std::string>& dims,
                            const std::string& new_name);

    /// Re-evaluates every constraint on every owner item; throws the first
    /// violation found.
    void check_all_constraints() const;

    /// `Concept#id(first primitive value)`; the value is taken along the first
    /// primitive path in declaration order.
    std::string item_label(ItemRef item) const;
    /// First primitive value reached in declaration order, or null.
    Value label_value(ItemRef item) const;

private:
    void name_unused(ConceptId owner, const std::string& name) const;
    void check_constraints(const std::set<std::uint32_t>& mutated,
                           const std::vector<ItemRef>& touched) const;
    void check_constraint(const Definition& def, ItemRef item) const;
    std::set<std::uint32_t> watched_concepts(const query::Expr& e) const;
    std::set<std::uint32_t> watched_concepts(const query::Query& q) const;
    ItemRef find_link(const Definition& mv, ItemRef item, ItemRef target) const;

    Schema schema_;
    ItemStore store_;
    Catalog catalog_;
};

} // namespace codm
