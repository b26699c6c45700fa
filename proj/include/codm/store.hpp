#pragma once

#include "codm/schema.hpp"
#include "codm/value.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace codm {

struct NulledSlot {
    ItemRef item;
    std::string dimension;

    friend bool operator==(const NulledSlot&, const NulledSlot&) = default;
};

/// Outcome of a deletion cascade. `deleted` is in post-order: subitems are
/// listed before the superitems whose deletion forced them out.
struct DeletionReport {
    std::vector<ItemRef> deleted;
    std::vector<NulledSlot> nulled;
};

/// Extents of all concepts. Items are keyed by id; ids grow monotonically per
/// concept, so key order is insertion order. The store validates slot values
/// against the schema it is handed but never mutates the schema.
class ItemStore {
public:
    struct Record {
        std::vector<Value> values;
        std::int64_t usage = 0;
    };

    struct Extent {
        std::map<std::uint64_t, Record> items;
        std::uint64_t next_id = 1;
    };

    ItemRef insert(const Schema& schema, ConceptId c, std::vector<Value> values);
    /// Insert with a caller-chosen id; the id must not be below the next free id.
    ItemRef insert_with_id(const Schema& schema, ItemRef ref, std::vector<Value> values);
    void update(const Schema& schema, ItemRef item, std::string_view dim, Value v);
    DeletionReport erase(const Schema& schema, ItemRef item);
    std::vector<ItemRef> collect_garbage(const Schema& schema);

    bool contains(ItemRef item) const;
    const std::vector<Value>& values(ItemRef item) const;
    std::int64_t usage(ItemRef item) const;
    std::vector<ItemRef> extent(const Schema& schema, ConceptId c) const;
    std::size_t size(ConceptId c) const;

    Value get_super(const Schema& schema, ItemRef item, const DimPath& path) const;
    std::vector<ItemRef> get_subs(const Schema& schema, ItemRef item, ConceptId sub,
                                  const DimPath& path) const;

    /// Checks a slot value against a dimension; throws DomainViolation or
    /// NullForbidden. Integers are widened when the domain is Real.
    Value coerce_slot(const Schema& schema, const Concept& owner, const Dimension& dim,
                      Value v) const;

    /// Full-scan check of referential integrity and usage counts; returns one
    /// line per violation.
    std::vector<std::string> check_integrity(const Schema& schema) const;
    void recompute_usage(const Schema& schema);

    // Raw access for loaders and schema transformations. No validation.
    void put_raw(ItemRef ref, std::vector<Value> values);
    void replace_raw(ItemRef ref, std::vector<Value> values);
    void drop_extent(ConceptId c);
    std::uint64_t next_id(ConceptId c) const;
    void set_next_id(ConceptId c, std::uint64_t next);

    const std::map<std::uint32_t, Extent>& extents() const { return extents_; }

private:
    Record& record(ItemRef item);
    const Record* find(ItemRef item) const;
    void adjust_usage(const Value& v, std::int64_t delta);

    std::map<std::uint32_t, Extent> extents_;
};

} // namespace codm
