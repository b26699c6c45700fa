#include "codm/database.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace codm {

namespace {

struct TupleLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            if (a[i].index() != b[i].index()) return a[i].index() < b[i].index();
            if (const int c = compare_for_sort(a[i], b[i]); c != 0) return c < 0;
        }
        return a.size() < b.size();
    }
};

std::string merged_name(const Dimension& d, const Dimension& x) {
    if (d.inline_name) return x.name;
    if (x.inline_name) return d.name;
    return d.name + "." + x.name;
}

} // namespace

void Database::merge_concept(ConceptId superc, ConceptId subc) {
    const Concept& sub = schema_.get(subc);
    if (superc == kTop || superc == kBottom || !schema_.contains(superc))
        throw Error(ErrorCode::NotDirectSuper,
                    "'" + schema_.name_of(superc) + "' is not a stored concept", sub.name);
    const Concept& sup = schema_.get(superc);
    if (sup.primitive)
        throw Error(ErrorCode::PrimitiveDomain,
                    "primitive concept '" + sup.name + "' cannot be merged", sup.name);
    auto merges = [&](const Dimension& d) { return !d.direct && d.domain == superc; };
    if (std::none_of(sub.intent.begin(), sub.intent.end(), merges))
        throw Error(ErrorCode::NotDirectSuper,
                    "'" + sup.name + "' is not a direct superconcept of '" + sub.name + "'",
                    sub.name);

    std::vector<Dimension> intent;
    std::set<std::string> names;
    for (const auto& d : sub.intent) {
        if (!merges(d)) {
            intent.push_back(d);
            continue;
        }
        for (const auto& x : sup.intent)
            intent.push_back(Dimension{merged_name(d, x), x.domain, d.nullable || x.nullable,
                                       x.direct, d.inline_name && x.inline_name});
    }
    for (const auto& d : intent)
        if (!names.insert(d.name).second)
            throw Error(ErrorCode::DuplicateName,
                        "merging yields two dimensions named '" + d.name + "' in '" + sub.name + "'",
                        sub.name);

    const std::vector<Dimension> old_intent = sub.intent;
    const std::size_t width = sup.intent.size();
    for (ItemRef item : store_.extent(schema_, subc)) {
        const auto& old = store_.values(item);
        std::vector<Value> values;
        for (std::size_t i = 0; i < old_intent.size(); ++i) {
            if (!merges(old_intent[i])) {
                values.push_back(old[i]);
                continue;
            }
            if (is_null(old[i])) {
                values.insert(values.end(), width, Value{Null{}});
                continue;
            }
            const auto& super_values = store_.values(std::get<ItemRef>(old[i]));
            values.insert(values.end(), super_values.begin(), super_values.end());
        }
        store_.replace_raw(item, std::move(values));
    }
    schema_.replace_intent(subc, std::move(intent));

    bool referenced = catalog_.owns_any(superc);
    for (auto id : schema_.concepts()) {
        if (id == superc) continue;
        for (const auto& d : schema_.get(id).intent)
            if (d.domain == superc) referenced = true;
    }
    if (!referenced) {
        schema_.remove_concept(superc);
        store_.drop_extent(superc);
    }
    store_.recompute_usage(schema_);
}

ConceptId Database::split_concept(ConceptId c, const std::vector<std::string>& dims,
                                  const std::string& new_name) {
    const Concept& source = schema_.get(c);
    if (source.primitive)
        throw Error(ErrorCode::BadDimensionSubset,
                    "primitive concept '" + source.name + "' has no dimensions", source.name);
    std::set<std::string> wanted(dims.begin(), dims.end());
    if (dims.empty() || wanted.size() != dims.size() || wanted.size() >= source.intent.size())
        throw Error(ErrorCode::BadDimensionSubset,
                    "split needs a nonempty proper subset of the dimensions of '" + source.name +
                        "'",
                    source.name);
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < source.intent.size(); ++i)
        if (wanted.count(source.intent[i].name)) picked.push_back(i);
    if (picked.size() != wanted.size())
        throw Error(ErrorCode::BadDimensionSubset,
                    "'" + source.name + "' lacks some of the selected dimensions", source.name);
    for (auto i : picked)
        if (source.intent[i].direct)
            throw Error(ErrorCode::BadDimensionSubset,
                        "direct dimension '" + source.intent[i].name + "' cannot be split off",
                        source.name);
    if (schema_.find(new_name) || catalog_.find_view(new_name))
        throw Error(ErrorCode::DuplicateName, "'" + new_name + "' is already defined", new_name);

    // a shared first path component becomes the replacement dimension's name
    std::string prefix;
    bool use_prefix = true;
    for (auto i : picked) {
        const Dimension& d = source.intent[i];
        const auto dot = d.name.find('.');
        if (d.inline_name || dot == std::string::npos || dot == 0 || dot + 1 == d.name.size()) {
            use_prefix = false;
            break;
        }
        const std::string head = d.name.substr(0, dot);
        if (prefix.empty()) prefix = head;
        else if (prefix != head) {
            use_prefix = false;
            break;
        }
    }

    std::set<std::string> remaining;
    for (std::size_t i = 0; i < source.intent.size(); ++i)
        if (!wanted.count(source.intent[i].name)) remaining.insert(source.intent[i].name);

    std::string replacement;
    if (use_prefix) {
        replacement = prefix;
        if (remaining.count(replacement))
            throw Error(ErrorCode::DuplicateName,
                        "'" + source.name + "' already has a dimension '" + replacement + "'",
                        source.name);
    } else {
        replacement = new_name;
        replacement[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(replacement[0])));
        const std::string base = replacement;
        for (int k = 2; remaining.count(replacement); ++k) replacement = base + "_" + std::to_string(k);
    }

    ConceptSpec spec;
    spec.name = new_name;
    for (auto i : picked) {
        const Dimension& d = source.intent[i];
        DimSpec ds;
        ds.name = use_prefix ? d.name.substr(prefix.size() + 1) : d.name;
        ds.domain = schema_.name_of(d.domain);
        ds.nullable = d.nullable;
        ds.inline_name = d.inline_name;
        spec.dims.push_back(std::move(ds));
    }
    const std::vector<Dimension> old_intent = source.intent;
    const ConceptId fresh = schema_.define_concept(spec);

    std::vector<Dimension> intent;
    for (std::size_t i = 0; i < old_intent.size(); ++i) {
        if (i == picked.front())
            intent.push_back(Dimension{replacement, fresh, false, false, !use_prefix});
        if (!wanted.count(old_intent[i].name)) intent.push_back(old_intent[i]);
    }

    std::map<std::vector<Value>, ItemRef, TupleLess> made;
    for (ItemRef item : store_.extent(schema_, c)) {
        const auto& old = store_.values(item);
        std::vector<Value> projection;
        for (auto i : picked) projection.push_back(old[i]);
        auto it = made.find(projection);
        if (it == made.end()) {
            const ItemRef ref{fresh, store_.next_id(fresh)};
            store_.put_raw(ref, projection);
            it = made.emplace(std::move(projection), ref).first;
        }
        std::vector<Value> values;
        for (std::size_t i = 0; i < old.size(); ++i) {
            if (i == picked.front()) values.emplace_back(it->second);
            if (!wanted.count(old_intent[i].name)) values.push_back(old[i]);
        }
        store_.replace_raw(item, std::move(values));
    }
    schema_.replace_intent(c, std::move(intent));
    store_.recompute_usage(schema_);
    return fresh;
}

} // namespace codm
