#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Reference implementations used to check the engine. They read raw slot
// values only and never call the engine's semantics, query or analytics code.
namespace codm::oracle {

/// Follows `steps` from `item` by scanning domain extents for each reference.
Value walk(const Database& db, ItemRef item, const std::vector<std::string>& steps);

struct Relation {
    std::vector<std::string> keys;
    std::vector<std::vector<Value>> tuples;
};

/// Flat tuples by recursive substitution, keys ordered step by step.
Relation concept_semantics(const Database& db, ConceptId c);

/// Canonical path names of `c`, as a set.
std::set<std::string> canonical_names(const Schema& schema, ConceptId c);

/// Evaluates the fragment produced by random_predicate for `binder` = item.
bool predicate(const Database& db, const query::Expr& e, const std::string& binder, ItemRef item);

std::vector<ItemRef> filter(const Database& db, ConceptId c, const query::Expr& pred,
                            const std::string& binder);

/// Items t of T for which |{c in C : c.c_steps == t.t_steps}| < k, with nulls
/// never matching.
std::vector<ItemRef> zigzag(const Database& db, ConceptId t, const std::vector<std::string>& t_steps,
                            ConceptId c, const std::vector<std::string>& c_steps, std::int64_t k);

/// Aggregate with nulls skipped (except size); empty sum is 0, empty
/// avg/min/max null.
Value aggregate(query::AggFn fn, const std::vector<Value>& values);

struct OracleCell {
    std::vector<ItemRef> coords;
    std::optional<Value> value;
};

/// Nested loops over the cross product of axis extents, first axis slowest.
std::vector<OracleCell> cube(const Database& db, ConceptId fact,
                             const std::vector<std::pair<ConceptId, std::vector<std::string>>>& axes,
                             const std::vector<std::string>& measure, query::AggFn fn);

/// Brute force over the fact items of `fact`: keep those whose every path to
/// each constrained concept lands in its allowed set, then collect targets.
std::set<ItemRef> infer(const Database& db, ConceptId fact,
                        const std::map<ConceptId, std::set<ItemRef>>& inputs, ConceptId target);

/// All dimension paths from `from` to `to` by exhaustive walk (non-direct).
std::vector<std::vector<std::string>> paths(const Schema& schema, ConceptId from, ConceptId to);

/// Full scan: dangling or mistyped references, wrong usage counts, nulls in
/// non-nullable slots. Empty when the store is consistent.
std::vector<std::string> integrity(const Database& db);

} // namespace codm::oracle
