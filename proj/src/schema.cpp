#include "codm/schema.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

namespace codm {

const Dimension* Concept::find_dimension(std::string_view dim) const {
    for (const auto& d : intent)
        if (d.name == dim) return &d;
    return nullptr;
}

std::optional<std::size_t> Concept::dimension_index(std::string_view dim) const {
    for (std::size_t i = 0; i < intent.size(); ++i)
        if (intent[i].name == dim) return i;
    return std::nullopt;
}

Schema::Schema() {
    const std::pair<ConceptId, const char*> primitives[] = {
        {kString, "String"}, {kInteger, "Integer"}, {kReal, "Real"}, {kBoolean, "Boolean"}};
    for (auto [id, name] : primitives) {
        Concept c;
        c.id = id;
        c.name = name;
        c.primitive = true;
        concepts_.emplace(id.value, std::move(c));
    }
}

ConceptId Schema::define_concept(const ConceptSpec& spec) {
    return define_concepts({spec}).front();
}

ConceptId Schema::define_concept(std::string name, std::vector<DimSpec> dims, GcScope scope) {
    ConceptSpec spec;
    spec.name = std::move(name);
    spec.dims = std::move(dims);
    spec.gc_scope = scope;
    return define_concept(spec);
}

void Schema::check_spec_shape(const ConceptSpec& spec) const {
    if (spec.name.empty())
        throw Error(ErrorCode::InvalidDefinition, "concept name is empty");
    if (spec.name == "⊤" || spec.name == "⊥")
        throw Error(ErrorCode::DuplicateName, "'" + spec.name + "' is reserved", spec.name);
    if (find(spec.name))
        throw Error(ErrorCode::DuplicateName, "concept '" + spec.name + "' already exists",
                    spec.name);
    if (spec.dims.empty())
        throw Error(ErrorCode::InvalidDefinition,
                    "concept '" + spec.name + "' needs at least one dimension", spec.name);
    std::set<std::string_view> seen;
    for (const auto& d : spec.dims) {
        if (d.name.empty())
            throw Error(ErrorCode::InvalidDefinition,
                        "empty dimension name in '" + spec.name + "'", spec.name);
        if (!seen.insert(d.name).second)
            throw Error(ErrorCode::DuplicateName,
                        "dimension '" + d.name + "' repeated in '" + spec.name + "'", spec.name);
    }
}

namespace {

using Graph = std::map<std::uint32_t, Concept>;

/// Returns the first cycle through non-direct edges as a chain of
/// (concept, dimension) hops, empty when acyclic.
std::vector<std::pair<std::uint32_t, std::string>> find_cycle(const Graph& g) {
    enum class Mark { fresh, open, done };
    std::unordered_map<std::uint32_t, Mark> mark;
    std::vector<std::pair<std::uint32_t, std::string>> stack;
    std::vector<std::pair<std::uint32_t, std::string>> cycle;

    std::function<bool(std::uint32_t)> visit = [&](std::uint32_t id) -> bool {
        mark[id] = Mark::open;
        const auto it = g.find(id);
        if (it != g.end()) {
            for (const auto& d : it->second.intent) {
                if (d.direct) continue;
                const auto next = d.domain.value;
                stack.emplace_back(id, d.name);
                if (mark[next] == Mark::open) {
                    auto from = std::find_if(stack.begin(), stack.end(),
                                             [&](const auto& e) { return e.first == next; });
                    cycle.assign(from, stack.end());
                    return true;
                }
                if (mark[next] == Mark::fresh && visit(next)) return true;
                stack.pop_back();
            }
        }
        mark[id] = Mark::done;
        return false;
    };

    for (const auto& [id, c] : g)
        if (mark[id] == Mark::fresh && visit(id)) return cycle;
    return {};
}

std::string render_cycle(const Graph& g,
                         const std::vector<std::pair<std::uint32_t, std::string>>& cycle) {
    std::string out;
    for (const auto& [id, dim] : cycle) out += g.at(id).name + "." + dim + " -> ";
    out += g.at(cycle.front().first).name;
    return out;
}

} // namespace

std::vector<ConceptId> Schema::define_concepts(const std::vector<ConceptSpec>& specs) {
    std::unordered_map<std::string, std::uint32_t> batch_ids;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        check_spec_shape(specs[i]);
        if (!batch_ids.emplace(specs[i].name, next_id_ + static_cast<std::uint32_t>(i)).second)
            throw Error(ErrorCode::DuplicateName,
                        "concept '" + specs[i].name + "' defined twice", specs[i].name);
    }

    Graph staged = concepts_;
    std::vector<ConceptId> ids;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        Concept c;
        c.id = ConceptId{next_id_ + static_cast<std::uint32_t>(i)};
        c.name = spec.name;
        c.gc_scope = spec.gc_scope;
        c.hidden = spec.hidden;
        for (const auto& ds : spec.dims) {
            std::optional<ConceptId> dom;
            if (auto b = batch_ids.find(ds.domain); b != batch_ids.end())
                dom = ConceptId{b->second};
            else
                dom = find(ds.domain);
            if (!dom)
                throw Error(ErrorCode::UnknownDomain,
                            "domain '" + ds.domain + "' of " + spec.name + "." + ds.name +
                                " does not exist",
                            spec.name);
            c.intent.push_back(Dimension{ds.name, *dom, ds.nullable, ds.direct, ds.inline_name});
        }
        ids.push_back(c.id);
        staged.emplace(c.id.value, std::move(c));
    }

    if (auto cycle = find_cycle(staged); !cycle.empty()) {
        // blame the most recently defined concept on the cycle
        std::uint32_t culprit = 0;
        for (const auto& hop : cycle) culprit = std::max(culprit, hop.first);
        throw Error(ErrorCode::CycleDetected, render_cycle(staged, cycle),
                    staged.at(culprit).name);
    }

    concepts_ = std::move(staged);
    next_id_ += static_cast<std::uint32_t>(specs.size());
    return ids;
}

bool Schema::contains(ConceptId c) const { return concepts_.count(c.value) != 0; }

const Concept& Schema::get(ConceptId c) const {
    const auto it = concepts_.find(c.value);
    if (it == concepts_.end()) {
        if (c == kTop || c == kBottom)
            throw Error(ErrorCode::UnknownConcept, "top and bottom concepts are virtual");
        throw Error(ErrorCode::UnknownConcept, "no concept with id " + std::to_string(c.value));
    }
    return it->second;
}

std::optional<ConceptId> Schema::find(std::string_view name) const {
    for (const auto& [id, c] : concepts_)
        if (c.name == name) return c.id;
    return std::nullopt;
}

ConceptId Schema::id_of(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error(ErrorCode::UnknownConcept, "no concept named '" + std::string(name) + "'",
                std::string(name));
}

std::string Schema::name_of(ConceptId c) const {
    if (c == kTop) return "⊤";
    if (c == kBottom) return "⊥";
    return get(c).name;
}

std::vector<ConceptId> Schema::concepts() const {
    std::vector<ConceptId> out;
    for (const auto& [id, c] : concepts_) out.push_back(c.id);
    return out;
}

std::vector<ConceptId> Schema::topological_order() const {
    std::map<std::uint32_t, int> pending;
    std::map<std::uint32_t, std::vector<std::uint32_t>> users;
    for (const auto& [id, c] : concepts_) {
        if (c.primitive) continue;
        std::set<std::uint32_t> supers;
        for (const auto& d : c.intent)
            if (!d.direct && !is_primitive(d.domain)) supers.insert(d.domain.value);
        pending[id] = static_cast<int>(supers.size());
        for (auto s : supers) users[s].push_back(id);
    }
    auto by_name = [this](std::uint32_t a, std::uint32_t b) {
        const auto& na = concepts_.at(a).name;
        const auto& nb = concepts_.at(b).name;
        return na != nb ? na > nb : a > b;
    };
    std::vector<std::uint32_t> ready;
    for (const auto& [id, n] : pending)
        if (n == 0) ready.push_back(id);
    std::make_heap(ready.begin(), ready.end(), by_name);

    std::vector<ConceptId> order;
    while (!ready.empty()) {
        std::pop_heap(ready.begin(), ready.end(), by_name);
        const auto id = ready.back();
        ready.pop_back();
        order.push_back(ConceptId{id});
        for (auto u : users[id]) {
            if (--pending[u] == 0) {
                ready.push_back(u);
                std::push_heap(ready.begin(), ready.end(), by_name);
            }
        }
    }
    return order;
}

std::vector<ConceptId> Schema::neighbors(ConceptId c, Direction direction) const {
    std::vector<ConceptId> out;
    auto push_unique = [&out](ConceptId id) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    };
    if (c == kTop) {
        if (direction == Direction::sub)
            for (auto p : {kString, kInteger, kReal, kBoolean}) out.push_back(p);
        return out;
    }
    if (c == kBottom) {
        if (direction == Direction::super) out = bottom_parents();
        return out;
    }
    const Concept& concept_ref = get(c);
    if (direction == Direction::super) {
        if (concept_ref.primitive) return {kTop};
        for (const auto& d : concept_ref.intent)
            if (!d.direct) push_unique(d.domain);
        return out;
    }
    for (const auto& [id, other] : concepts_)
        for (const auto& d : other.intent)
            if (!d.direct && d.domain == c) push_unique(other.id);
    if (out.empty() && is_bottom_parent(c)) out.push_back(kBottom);
    return out;
}

bool Schema::is_bottom_parent(ConceptId c) const {
    const auto it = concepts_.find(c.value);
    if (it == concepts_.end() || it->second.primitive) return false;
    for (const auto& [id, other] : concepts_)
        for (const auto& d : other.intent)
            if (!d.direct && d.domain == c) return false;
    return true;
}

std::vector<ConceptId> Schema::bottom_parents() const {
    std::vector<ConceptId> out;
    for (const auto& [id, c] : concepts_)
        if (is_bottom_parent(c.id)) out.push_back(c.id);
    return out;
}

std::vector<DimPath> Schema::enumerate_paths(ConceptId from, ConceptId to) const {
    if (from != kBottom) (void)get(from);
    if (to != kTop && to != kBottom) (void)get(to);

    std::vector<DimPath> out;
    std::vector<std::string> steps;
    // to == kTop collects every maximal path, i.e. the ones ending at primitives
    std::function<void(ConceptId)> walk = [&](ConceptId at) {
        const Concept& c = get(at);
        if (at == to || (to == kTop && c.primitive)) out.push_back(DimPath{from, steps});
        for (const auto& d : c.intent) {
            if (d.direct) continue;
            steps.push_back(d.name);
            walk(d.domain);
            steps.pop_back();
        }
    };
    if (from == kBottom) {
        if (to == kBottom) out.push_back(DimPath{from, {}});
        for (auto p : bottom_parents()) {
            steps.push_back(get(p).name);
            walk(p);
            steps.pop_back();
        }
    } else {
        walk(from);
    }
    return out;
}

std::vector<DimPath> Schema::canonical_syntax(ConceptId c) const {
    if (c == kTop)
        throw Error(ErrorCode::UnknownConcept, "the top concept has no canonical syntax");
    auto paths = enumerate_paths(c, kTop);
    std::vector<std::pair<std::string, DimPath>> named;
    for (auto& p : paths) named.emplace_back(path_name(p), std::move(p));
    std::stable_sort(named.begin(), named.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    paths.clear();
    for (auto& [n, p] : named) paths.push_back(std::move(p));
    return paths;
}

bool Schema::reaches(ConceptId from, ConceptId to) const {
    if (from == kBottom) return to != kBottom;
    if (!contains(from)) return false;
    for (const auto& d : get(from).intent) {
        if (d.direct) continue;
        if (d.domain == to || reaches(d.domain, to)) return true;
    }
    return false;
}

std::string Schema::path_name(const DimPath& path) const {
    std::string out;
    ConceptId at = path.source;
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        const auto& step = path.steps[i];
        bool hidden_step = false;
        ConceptId next;
        if (at == kBottom) {
            next = id_of(step);
        } else {
            const Dimension* d = get(at).find_dimension(step);
            if (!d) throw Error(ErrorCode::InvalidPath, "no dimension '" + step + "'");
            hidden_step = d->inline_name;
            next = d->domain;
        }
        if (!hidden_step) {
            if (!out.empty()) out += '.';
            out += step;
        }
        at = next;
    }
    return out;
}

ConceptId Schema::path_target(const DimPath& path) const {
    ConceptId at = path.source;
    for (const auto& step : path.steps) {
        if (at == kBottom) {
            auto id = find(step);
            if (!id || !is_bottom_parent(*id))
                throw Error(ErrorCode::InvalidPath, "'" + step + "' is not a parent of ⊥");
            at = *id;
            continue;
        }
        const Concept& c = get(at);
        const Dimension* d = c.find_dimension(step);
        if (!d)
            throw Error(ErrorCode::InvalidPath,
                        "concept '" + c.name + "' has no dimension '" + step + "'", c.name);
        at = d->domain;
    }
    return at;
}

std::optional<DimPath> Schema::try_resolve_path(ConceptId source,
                                                std::span<const std::string> idents) const {
    std::vector<std::string> steps;
    std::function<bool(ConceptId, std::size_t)> match = [&](ConceptId at, std::size_t pos) {
        if (pos == idents.size()) return true;
        if (at == kBottom) {
            auto id = find(idents[pos]);
            if (!id || !is_bottom_parent(*id)) return false;
            steps.push_back(idents[pos]);
            if (match(*id, pos + 1)) return true;
            steps.pop_back();
            return false;
        }
        if (!contains(at)) return false;
        const Concept& c = get(at);
        for (std::size_t len = idents.size() - pos; len >= 1; --len) {
            std::string joined = idents[pos];
            for (std::size_t k = 1; k < len; ++k) joined += "." + idents[pos + k];
            if (const Dimension* d = c.find_dimension(joined)) {
                steps.push_back(joined);
                if (match(d->domain, pos + len)) return true;
                steps.pop_back();
            }
        }
        for (const auto& d : c.intent) {
            if (!d.inline_name || d.direct) continue;
            steps.push_back(d.name);
            if (match(d.domain, pos)) return true;
            steps.pop_back();
        }
        return false;
    };
    if (match(source, 0)) return DimPath{source, steps};
    return std::nullopt;
}

DimPath Schema::resolve_path(ConceptId source, std::span<const std::string> idents) const {
    if (auto p = try_resolve_path(source, idents)) return *p;
    std::string text;
    for (const auto& s : idents) text += (text.empty() ? "" : ".") + s;
    throw Error(ErrorCode::InvalidPath,
                "'" + text + "' is not a path of '" + name_of(source) + "'", name_of(source));
}

std::vector<SchemaIssue> Schema::validate() const {
    std::vector<SchemaIssue> issues;
    for (const auto& [id, c] : concepts_) {
        if (c.primitive && !c.intent.empty())
            issues.push_back({ErrorCode::InvalidDefinition,
                              "primitive concept '" + c.name + "' has dimensions"});
        if (!c.primitive && c.intent.empty())
            issues.push_back({ErrorCode::InvalidDefinition,
                              "concept '" + c.name + "' has no dimensions"});
        std::set<std::string_view> seen;
        for (const auto& d : c.intent) {
            if (d.name.empty())
                issues.push_back({ErrorCode::InvalidDefinition,
                                  "concept '" + c.name + "' has an unnamed dimension"});
            else if (!seen.insert(d.name).second)
                issues.push_back({ErrorCode::DuplicateName,
                                  "dimension '" + c.name + "." + d.name + "' repeated"});
            if (!contains(d.domain))
                issues.push_back({ErrorCode::UnknownDomain,
                                  "domain of '" + c.name + "." + d.name + "' does not exist"});
        }
    }

    // report every back edge of a depth-first traversal as one cycle
    enum class Mark { fresh, open, done };
    std::unordered_map<std::uint32_t, Mark> mark;
    std::vector<std::pair<std::uint32_t, std::string>> stack;
    std::function<void(std::uint32_t)> visit = [&](std::uint32_t id) {
        mark[id] = Mark::open;
        for (const auto& d : concepts_.at(id).intent) {
            if (d.direct || !contains(d.domain)) continue;
            stack.emplace_back(id, d.name);
            const auto next = d.domain.value;
            if (mark[next] == Mark::open) {
                auto from = std::find_if(stack.begin(), stack.end(),
                                         [&](const auto& e) { return e.first == next; });
                issues.push_back({ErrorCode::CycleDetected,
                                  render_cycle(concepts_, {from, stack.end()})});
            } else if (mark[next] == Mark::fresh) {
                visit(next);
            }
            stack.pop_back();
        }
        mark[id] = Mark::done;
    };
    for (const auto& [id, c] : concepts_)
        if (mark[id] == Mark::fresh) visit(id);
    return issues;
}

std::string Schema::format_value(const Value& v) const {
    if (const auto* r = std::get_if<ItemRef>(&v); r && r->concept_id != kTop) {
        const auto it = concepts_.find(r->concept_id.value);
        const std::string name = it == concepts_.end() ? "?" : it->second.name;
        return name + "#" + std::to_string(r->id);
    }
    return codm::format_value(v);
}

void Schema::replace_intent(ConceptId c, std::vector<Dimension> intent) {
    mutable_concept(c).intent = std::move(intent);
}

void Schema::remove_concept(ConceptId c) {
    if (is_primitive(c))
        throw Error(ErrorCode::InvalidDefinition, "primitive concepts cannot be removed");
    (void)get(c);
    concepts_.erase(c.value);
}

Concept& Schema::mutable_concept(ConceptId c) {
    const auto it = concepts_.find(c.value);
    if (it == concepts_.end())
        throw Error(ErrorCode::UnknownConcept, "no concept with id " + std::to_string(c.value));
    return it->second;
}

} // namespace codm
