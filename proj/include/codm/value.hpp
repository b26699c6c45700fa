#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace codm {

/// Opaque concept identifier. Ids are handed out in registration order and are
/// never reused within a schema.
struct ConceptId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(ConceptId, ConceptId) = default;
};

inline constexpr ConceptId kTop{0};
inline constexpr ConceptId kBottom{1};
inline constexpr ConceptId kString{2};
inline constexpr ConceptId kInteger{3};
inline constexpr ConceptId kReal{4};
inline constexpr ConceptId kBoolean{5};
inline constexpr std::uint32_t kFirstUserConcept = 6;

constexpr bool is_primitive(ConceptId c) noexcept {
    return c.value >= kString.value && c.value <= kBoolean.value;
}

/// Reference to an item of a concept. A reference whose concept is kTop is an
/// untyped reference (written `0x...` in queries); it matches any item with the
/// same id.
struct ItemRef {
    ConceptId concept_id;
    std::uint64_t id = 0;

    friend constexpr auto operator<=>(const ItemRef&, const ItemRef&) = default;
};

struct Null {
    friend constexpr auto operator<=>(Null, Null) = default;
};

/// Slot value: null, one of the four primitives (by value), or a reference.
using Value = std::variant<Null, bool, std::int64_t, double, std::string, ItemRef>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<Null>(v); }
inline bool is_ref(const Value& v) noexcept { return std::holds_alternative<ItemRef>(v); }
inline bool is_numeric(const Value& v) noexcept {
    return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

/// Concept a non-null value belongs to (primitive concept or the referenced
/// item's concept). Null maps to the top concept.
ConceptId value_concept(const Value& v) noexcept;

/// Exact identity: same alternative and same payload. Untyped refs only match
/// untyped refs here; use `refs_match` for query-level comparison.
bool same_value(const Value& a, const Value& b) noexcept;

bool refs_match(const ItemRef& a, const ItemRef& b) noexcept;

/// Total order used for deterministic output: bool < numbers < strings < refs,
/// null last. Integers and reals compare numerically.
int compare_for_sort(const Value& a, const Value& b) noexcept;

/// Literal syntax shared by the query language, data lines and dumps.
std::string format_value(const Value& v);
std::string format_real(double d);
std::string quote_string(std::string_view s);

struct ItemRefHash {
    std::size_t operator()(const ItemRef& r) const noexcept {
        return std::hash<std::uint64_t>{}(r.id * 1000003u ^ r.concept_id.value);
    }
};

} // namespace codm
