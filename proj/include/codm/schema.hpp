#pragma once

#include "codm/error.hpp"
#include "codm/value.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codm {

enum class GcScope { persistent, local };

/// Dimension as written in DDL: the domain is still a name.
struct DimSpec {
    std::string name;
    std::string domain;
    bool nullable = false;
    bool direct = false;
    bool inline_name = false;
};

struct ConceptSpec {
    std::string name;
    std::vector<DimSpec> dims;
    GcScope gc_scope = GcScope::persistent;
    bool hidden = false;
};

/// A `direct` dimension stores a many-to-one reference that is not a
/// superconcept edge: it is exempt from DAG ordering and from path enumeration.
/// An `inline_name` dimension contributes no component to path names; split
/// produces one when the moved dimensions share no common prefix.
struct Dimension {
    std::string name;
    ConceptId domain;
    bool nullable = false;
    bool direct = false;
    bool inline_name = false;

    friend bool operator==(const Dimension&, const Dimension&) = default;
};

struct Concept {
    ConceptId id;
    std::string name;
    std::vector<Dimension> intent;
    bool primitive = false;
    GcScope gc_scope = GcScope::persistent;
    bool hidden = false;

    const Dimension* find_dimension(std::string_view dim) const;
    std::optional<std::size_t> dimension_index(std::string_view dim) const;
    std::size_t dimensionality() const { return intent.size(); }
};

/// Sequence of dimension names starting at `source`. For paths starting at the
/// bottom concept the first step names one of its parent concepts.
struct DimPath {
    ConceptId source;
    std::vector<std::string> steps;

    std::size_t rank() const { return steps.size(); }
    friend bool operator==(const DimPath&, const DimPath&) = default;
};

enum class Direction { super, sub };

struct SchemaIssue {
    ErrorCode code;
    std::string message;
};

/// The concept graph. Top and bottom are virtual: they have reserved ids but
/// no Concept record. The four primitives are registered at construction.
class Schema {
public:
    Schema();

    ConceptId define_concept(const ConceptSpec& spec);
    ConceptId define_concept(std::string name, std::vector<DimSpec> dims,
                             GcScope scope = GcScope::persistent);

    /// Defines several concepts at once; domains may refer to any concept of
    /// the batch, so mutually referencing definitions surface as CycleDetected.
    /// Nothing is registered when any definition fails.
    std::vector<ConceptId> define_concepts(const std::vector<ConceptSpec>& specs);

    bool contains(ConceptId c) const;
    const Concept& get(ConceptId c) const;
    std::optional<ConceptId> find(std::string_view name) const;
    ConceptId id_of(std::string_view name) const;
    std::string name_of(ConceptId c) const;

    /// All stored concepts (primitives included) in registration order.
    std::vector<ConceptId> concepts() const;
    /// Non-primitive concepts, superconcepts first, ties broken by name.
    std::vector<ConceptId> topological_order() const;

    std::vector<ConceptId> neighbors(ConceptId c, Direction direction) const;
    std::vector<ConceptId> bottom_parents() const;
    bool is_bottom_parent(ConceptId c) const;

    std::vector<DimPath> enumerate_paths(ConceptId from, ConceptId to) const;
    std::vector<DimPath> canonical_syntax(ConceptId c) const;
    /// Strict superconcept test through non-direct edges (rank >= 1).
    bool reaches(ConceptId from, ConceptId to) const;

    std::string path_name(const DimPath& path) const;
    /// Concept reached by the path; throws InvalidPath on an invalid step.
    ConceptId path_target(const DimPath& path) const;
    /// Matches identifiers against dimension names, allowing dotted names
    /// produced by merges (`size.label` matches one dimension when present).
    DimPath resolve_path(ConceptId source, std::span<const std::string> idents) const;
    /// Same as resolve_path, but returns nullopt instead of throwing.
    std::optional<DimPath> try_resolve_path(ConceptId source,
                                            std::span<const std::string> idents) const;

    std::vector<SchemaIssue> validate() const;

    std::string format_value(const Value& v) const;

    // Structural edits used by merge/split and tests. They do not re-validate.
    void replace_intent(ConceptId c, std::vector<Dimension> intent);
    void remove_concept(ConceptId c);
    Concept& mutable_concept(ConceptId c);

private:
    void check_spec_shape(const ConceptSpec& spec) const;

    std::map<std::uint32_t, Concept> concepts_;
    std::uint32_t next_id_ = kFirstUserConcept;
};

} // namespace codm
