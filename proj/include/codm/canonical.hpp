#pragma once

#include "codm/database.hpp"

#include <string>
#include <utility>
#include <vector>

namespace codm {

/// Primitive values of one item keyed by primitive path name, in path-name
/// order. Keys are exactly the canonical syntax of the owning concept.
using FlatTuple = std::vector<std::pair<std::string, Value>>;

struct CanonicalRelation {
    ConceptId concept_id;
    std::vector<std::string> keys;
    std::vector<std::vector<Value>> tuples; // one value per key
};

FlatTuple canonical_item(const Database& db, ItemRef item);
CanonicalRelation concept_semantics(const Database& db, ConceptId c);
/// The relation of the bottom concept: one tuple per item of each of its
/// parents, null outside that parent's own paths.
CanonicalRelation database_semantics(const Database& db);

/// Multiset equality of the bottom relations; throws IncomparableSchemas when
/// the primitive path names differ.
bool semantic_equal(const Database& a, const Database& b);

/// Header of sorted path names, then one tab-separated line per tuple, tuples
/// sorted by value with nulls last.
std::string dump_relation(const CanonicalRelation& r);

} // namespace codm
