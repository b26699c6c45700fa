#include "codm/store.hpp"

#include "codm/error.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace codm {

namespace {

std::string ref_text(const Schema& schema, ItemRef r) { return schema.format_value(r); }

bool primitive_matches(ConceptId domain, const Value& v) {
    switch (domain.value) {
    case kString.value: return std::holds_alternative<std::string>(v);
    case kInteger.value: return std::holds_alternative<std::int64_t>(v);
    case kReal.value: return std::holds_alternative<double>(v);
    case kBoolean.value: return std::holds_alternative<bool>(v);
    default: return false;
    }
}

} // namespace

ItemStore::Record& ItemStore::record(ItemRef item) {
    auto ext = extents_.find(item.concept_id.value);
    if (ext != extents_.end()) {
        auto it = ext->second.items.find(item.id);
        if (it != ext->second.items.end()) return it->second;
    }
    throw Error(ErrorCode::UnknownItem, "no live item #" + std::to_string(item.id));
}

const ItemStore::Record* ItemStore::find(ItemRef item) const {
    auto ext = extents_.find(item.concept_id.value);
    if (ext == extents_.end()) return nullptr;
    auto it = ext->second.items.find(item.id);
    return it == ext->second.items.end() ? nullptr : &it->second;
}

void ItemStore::adjust_usage(const Value& v, std::int64_t delta) {
    const auto* r = std::get_if<ItemRef>(&v);
    if (!r) return;
    auto ext = extents_.find(r->concept_id.value);
    if (ext == extents_.end()) return;
    if (auto it = ext->second.items.find(r->id); it != ext->second.items.end())
        it->second.usage += delta;
}

bool ItemStore::contains(ItemRef item) const { return find(item) != nullptr; }

const std::vector<Value>& ItemStore::values(ItemRef item) const {
    if (const Record* rec = find(item)) return rec->values;
    throw Error(ErrorCode::UnknownItem, "no live item #" + std::to_string(item.id));
}

std::int64_t ItemStore::usage(ItemRef item) const {
    if (const Record* rec = find(item)) return rec->usage;
    throw Error(ErrorCode::UnknownItem, "no live item #" + std::to_string(item.id));
}

Value ItemStore::coerce_slot(const Schema& schema, const Concept& owner, const Dimension& dim,
                             Value v) const {
    if (is_null(v)) {
        if (!dim.nullable)
            throw Error(ErrorCode::NullForbidden,
                        "dimension " + owner.name + "." + dim.name + " does not accept null",
                        dim.name);
        return v;
    }
    if (is_primitive(dim.domain)) {
        if (dim.domain == kReal && std::holds_alternative<std::int64_t>(v))
            return static_cast<double>(std::get<std::int64_t>(v));
        if (!primitive_matches(dim.domain, v))
            throw Error(ErrorCode::DomainViolation,
                        "slot " + owner.name + "." + dim.name + " expects " +
                            schema.name_of(dim.domain) + ", got " + schema.format_value(v),
                        dim.name);
        return v;
    }
    auto* r = std::get_if<ItemRef>(&v);
    if (r && r->concept_id == kTop) r->concept_id = dim.domain;
    if (!r || r->concept_id != dim.domain || !contains(*r))
        throw Error(ErrorCode::DomainViolation,
                    "slot " + owner.name + "." + dim.name + " expects a live " +
                        schema.name_of(dim.domain) + " item, got " + schema.format_value(v),
                    dim.name);
    return v;
}

ItemRef ItemStore::insert(const Schema& schema, ConceptId c, std::vector<Value> values) {
    return insert_with_id(schema, ItemRef{c, next_id(c)}, std::move(values));
}

ItemRef ItemStore::insert_with_id(const Schema& schema, ItemRef ref, std::vector<Value> values) {
    const Concept& concept_ref = schema.get(ref.concept_id);
    if (concept_ref.primitive)
        throw Error(ErrorCode::DomainViolation,
                    "primitive concept '" + concept_ref.name + "' has no stored items",
                    concept_ref.name);
    if (values.size() != concept_ref.intent.size())
        throw Error(ErrorCode::ArityMismatch,
                    concept_ref.name + " has " + std::to_string(concept_ref.intent.size()) +
                        " dimensions, got " + std::to_string(values.size()) + " values",
                    concept_ref.name);
    if (ref.id < next_id(ref.concept_id))
        throw Error(ErrorCode::DuplicateName,
                    "reference " + ref_text(schema, ref) + " was already issued",
                    concept_ref.name);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& dim = concept_ref.intent[i];
        // a direct self-reference may point at the item being created
        if (dim.direct && dim.domain == ref.concept_id)
            if (auto* r = std::get_if<ItemRef>(&values[i]); r && r->id == ref.id &&
                                                           (r->concept_id == ref.concept_id ||
                                                            r->concept_id == kTop)) {
                r->concept_id = ref.concept_id;
                continue;
            }
        values[i] = coerce_slot(schema, concept_ref, dim, std::move(values[i]));
    }
    auto& ext = extents_[ref.concept_id.value];
    ext.next_id = ref.id + 1;
    auto& rec = ext.items[ref.id];
    rec.values = std::move(values);
    for (const auto& v : rec.values) adjust_usage(v, +1);
    return ref;
}

void ItemStore::update(const Schema& schema, ItemRef item, std::string_view dim, Value v) {
    Record& rec = record(item);
    const Concept& owner = schema.get(item.concept_id);
    const auto idx = owner.dimension_index(dim);
    if (!idx)
        throw Error(ErrorCode::InvalidPath,
                    "concept '" + owner.name + "' has no dimension '" + std::string(dim) + "'",
                    owner.name);
    const auto& d = owner.intent[*idx];
    if (auto* r = std::get_if<ItemRef>(&v);
        r && d.direct && d.domain == item.concept_id && r->id == item.id) {
        r->concept_id = item.concept_id;
    } else {
        v = coerce_slot(schema, owner, d, std::move(v));
    }
    adjust_usage(rec.values[*idx], -1);
    rec.values[*idx] = std::move(v);
    adjust_usage(rec.values[*idx], +1);
}

DeletionReport ItemStore::erase(const Schema& schema, ItemRef item) {
    if (!contains(item))
        throw Error(ErrorCode::UnknownItem, ref_text(schema, item) + " is not a live item");

    DeletionReport report;
    std::set<ItemRef> doomed;

    std::function<void(ItemRef)> visit = [&](ItemRef x) {
        doomed.insert(x);
        struct Holder {
            ItemRef item;
            std::vector<std::pair<std::size_t, const Dimension*>> slots;
            bool forced = false;
        };
        std::vector<Holder> holders;
        for (auto cid : schema.concepts()) {
            const Concept& k = schema.get(cid);
            std::vector<std::size_t> dims;
            for (std::size_t j = 0; j < k.intent.size(); ++j)
                if (k.intent[j].domain == x.concept_id) dims.push_back(j);
            if (dims.empty()) continue;
            auto ext = extents_.find(cid.value);
            if (ext == extents_.end()) continue;
            for (const auto& [id, rec] : ext->second.items) {
                const ItemRef s{cid, id};
                if (doomed.count(s)) continue;
                Holder h{s, {}, false};
                for (auto j : dims) {
                    const auto* r = std::get_if<ItemRef>(&rec.values[j]);
                    if (r && *r == x) {
                        h.slots.emplace_back(j, &k.intent[j]);
                        h.forced = h.forced || !k.intent[j].nullable;
                    }
                }
                if (!h.slots.empty()) holders.push_back(std::move(h));
            }
        }
        for (const auto& h : holders) {
            if (doomed.count(h.item) || !contains(h.item)) continue;
            if (h.forced) {
                visit(h.item);
                continue;
            }
            Record& rec = record(h.item);
            for (auto [j, dim] : h.slots) {
                adjust_usage(rec.values[j], -1);
                rec.values[j] = Null{};
                report.nulled.push_back({h.item, dim->name});
            }
        }
        Record& rec = record(x);
        for (const auto& v : rec.values) adjust_usage(v, -1);
        extents_[x.concept_id.value].items.erase(x.id);
        report.deleted.push_back(x);
    };
    visit(item);

    std::erase_if(report.nulled, [&](const NulledSlot& n) { return doomed.count(n.item) != 0; });
    return report;
}

std::vector<ItemRef> ItemStore::collect_garbage(const Schema& schema) {
    std::vector<ItemRef> collected;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto cid : schema.concepts()) {
            if (schema.get(cid).gc_scope != GcScope::local) continue;
            auto ext = extents_.find(cid.value);
            if (ext == extents_.end()) continue;
            std::vector<ItemRef> unused;
            for (const auto& [id, rec] : ext->second.items)
                if (rec.usage == 0) unused.push_back(ItemRef{cid, id});
            for (auto r : unused) {
                if (!contains(r) || usage(r) != 0) continue;
                auto report = erase(schema, r);
                collected.insert(collected.end(), report.deleted.begin(), report.deleted.end());
                changed = true;
            }
        }
    }
    return collected;
}

std::vector<ItemRef> ItemStore::extent(const Schema& schema, ConceptId c) const {
    if (c == kTop) throw Error(ErrorCode::UnknownConcept, "the top concept has no extent");
    std::vector<ItemRef> out;
    if (c == kBottom) {
        for (auto p : schema.bottom_parents()) {
            auto part = extent(schema, p);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    (void)schema.get(c);
    auto ext = extents_.find(c.value);
    if (ext == extents_.end()) return out;
    out.reserve(ext->second.items.size());
    for (const auto& [id, rec] : ext->second.items) out.push_back(ItemRef{c, id});
    return out;
}

std::size_t ItemStore::size(ConceptId c) const {
    auto ext = extents_.find(c.value);
    return ext == extents_.end() ? 0 : ext->second.items.size();
}

Value ItemStore::get_super(const Schema& schema, ItemRef item, const DimPath& path) const {
    if (path.source != item.concept_id)
        throw Error(ErrorCode::InvalidPath, "path does not start at the item's concept");
    (void)schema.path_target(path);
    if (!contains(item))
        throw Error(ErrorCode::UnknownItem, ref_text(schema, item) + " is not a live item");
    Value cur = item;
    ConceptId at = item.concept_id;
    for (const auto& step : path.steps) {
        if (is_null(cur)) return cur;
        const Concept& c = schema.get(at);
        const auto idx = *c.dimension_index(step);
        const auto& ref = std::get<ItemRef>(cur);
        const Record* rec = find(ref);
        if (!rec)
            throw Error(ErrorCode::DanglingReference,
                        ref_text(schema, ref) + " is referenced but not live");
        cur = rec->values[idx];
        at = c.intent[idx].domain;
    }
    return cur;
}

std::vector<ItemRef> ItemStore::get_subs(const Schema& schema, ItemRef item, ConceptId sub,
                                         const DimPath& path) const {
    if (path.source != sub || schema.path_target(path) != item.concept_id)
        throw Error(ErrorCode::InvalidPath,
                    "path must lead from " + schema.name_of(sub) + " to " +
                        schema.name_of(item.concept_id));
    std::vector<ItemRef> out;
    for (auto s : extent(schema, sub)) {
        const Value v = get_super(schema, s, path);
        if (const auto* r = std::get_if<ItemRef>(&v); r && *r == item) out.push_back(s);
    }
    return out;
}

std::vector<std::string> ItemStore::check_integrity(const Schema& schema) const {
    std::vector<std::string> problems;
    std::map<ItemRef, std::int64_t> counted;
    for (const auto& [cid, ext] : extents_) {
        const ConceptId c{cid};
        if (!schema.contains(c)) {
            if (!ext.items.empty())
                problems.push_back("items stored for unknown concept " + std::to_string(cid));
            continue;
        }
        const Concept& k = schema.get(c);
        for (const auto& [id, rec] : ext.items) {
            const ItemRef self{c, id};
            if (rec.values.size() != k.intent.size()) {
                problems.push_back(ref_text(schema, self) + " has wrong arity");
                continue;
            }
            for (std::size_t j = 0; j < rec.values.size(); ++j) {
                const auto& v = rec.values[j];
                const auto& d = k.intent[j];
                if (is_null(v)) {
                    if (!d.nullable)
                        problems.push_back(ref_text(schema, self) + "." + d.name +
                                           " is null but not nullable");
                } else if (const auto* r = std::get_if<ItemRef>(&v)) {
                    if (r->concept_id != d.domain || !contains(*r))
                        problems.push_back(ref_text(schema, self) + "." + d.name +
                                           " holds dangling " + ref_text(schema, *r));
                    ++counted[*r];
                } else if (!primitive_matches(d.domain, v)) {
                    problems.push_back(ref_text(schema, self) + "." + d.name +
                                       " holds a value outside its domain");
                }
            }
        }
    }
    for (const auto& [cid, ext] : extents_)
        for (const auto& [id, rec] : ext.items) {
            const ItemRef self{ConceptId{cid}, id};
            const auto it = counted.find(self);
            const std::int64_t expected = it == counted.end() ? 0 : it->second;
            if (rec.usage != expected)
                problems.push_back(ref_text(schema, self) + " usage " +
                                   std::to_string(rec.usage) + " != " +
                                   std::to_string(expected));
        }
    return problems;
}

void ItemStore::recompute_usage(const Schema&) {
    for (auto& [cid, ext] : extents_)
        for (auto& [id, rec] : ext.items) rec.usage = 0;
    for (auto& [cid, ext] : extents_)
        for (auto& [id, rec] : ext.items)
            for (const auto& v : rec.values) adjust_usage(v, +1);
}

void ItemStore::put_raw(ItemRef ref, std::vector<Value> values) {
    auto& ext = extents_[ref.concept_id.value];
    ext.items[ref.id].values = std::move(values);
    ext.next_id = std::max(ext.next_id, ref.id + 1);
}

void ItemStore::replace_raw(ItemRef ref, std::vector<Value> values) {
    record(ref).values = std::move(values);
}

void ItemStore::drop_extent(ConceptId c) { extents_.erase(c.value); }

std::uint64_t ItemStore::next_id(ConceptId c) const {
    auto ext = extents_.find(c.value);
    return ext == extents_.end() ? 1 : ext->second.next_id;
}

void ItemStore::set_next_id(ConceptId c, std::uint64_t next) {
    auto& ext = extents_[c.value];
    ext.next_id = std::max(next, ext.items.empty() ? std::uint64_t{1} : ext.items.rbegin()->first + 1);
}

} // namespace codm
