#include "codm/value.hpp"

#include "codm/error.hpp"

#include <charconv>
#include <cmath>

namespace codm {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::InvalidDefinition: return "InvalidDefinition";
    case ErrorCode::NotDirectSuper: return "NotDirectSuper";
    case ErrorCode::PrimitiveDomain: return "PrimitiveDomain";
    case ErrorCode::BadDimensionSubset: return "BadDimensionSubset";
    case ErrorCode::ConceptInUse: return "ConceptInUse";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NullForbidden: return "NullForbidden";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::IncomparableSchemas: return "IncomparableSchemas";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::UnboundBlockVariable: return "UnboundBlockVariable";
    case ErrorCode::ViewImmutable: return "ViewImmutable";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::DuplicateLink: return "DuplicateLink";
    case ErrorCode::InvalidAxisPath: return "InvalidAxisPath";
    case ErrorCode::NoSuchLevel: return "NoSuchLevel";
    case ErrorCode::NoCommonSubconcept: return "NoCommonSubconcept";
    case ErrorCode::InvalidTreeSpec: return "InvalidTreeSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

ConceptId value_concept(const Value& v) noexcept {
    switch (v.index()) {
    case 1: return kBoolean;
    case 2: return kInteger;
    case 3: return kReal;
    case 4: return kString;
    case 5: return std::get<ItemRef>(v).concept_id;
    default: return kTop;
    }
}

bool same_value(const Value& a, const Value& b) noexcept {
    if (a.index() != b.index()) return false;
    if (const auto* d = std::get_if<double>(&a)) {
        // bitwise-style equality so that NaN payloads do not break multiset checks
        const double e = std::get<double>(b);
        return *d == e || (std::isnan(*d) && std::isnan(e));
    }
    return a == b;
}

bool refs_match(const ItemRef& a, const ItemRef& b) noexcept {
    if (a.id != b.id) return false;
    return a.concept_id == b.concept_id || a.concept_id == kTop || b.concept_id == kTop;
}

namespace {

int kind_rank(const Value& v) {
    switch (v.index()) {
    case 0: return 4;
    case 1: return 0;
    case 2:
    case 3: return 1;
    case 4: return 2;
    default: return 3;
    }
}

template <typename T>
int three_way(const T& a, const T& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}

double as_double(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

} // namespace

int compare_for_sort(const Value& a, const Value& b) noexcept {
    const int ka = kind_rank(a);
    const int kb = kind_rank(b);
    if (ka != kb) return ka < kb ? -1 : 1;
    switch (ka) {
    case 0: return three_way(std::get<bool>(a), std::get<bool>(b));
    case 1:
        if (a.index() == 2 && b.index() == 2)
            return three_way(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
        if (int c = three_way(as_double(a), as_double(b)); c != 0) return c;
        // 1 and 1.0 are numerically equal but must still sort deterministically
        return three_way(a.index(), b.index());
    case 2: return three_way(std::get<std::string>(a), std::get<std::string>(b));
    case 3: return three_way(std::get<ItemRef>(a), std::get<ItemRef>(b));
    default: return 0;
    }
}

std::string format_real(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d < 0 ? "-inf" : "inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, end);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string quote_string(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

std::string format_value(const Value& v) {
    switch (v.index()) {
    case 0: return "null";
    case 1: return std::get<bool>(v) ? "true" : "false";
    case 2: return std::to_string(std::get<std::int64_t>(v));
    case 3: return format_real(std::get<double>(v));
    case 4: return quote_string(std::get<std::string>(v));
    default: {
        const auto& r = std::get<ItemRef>(v);
        if (r.concept_id == kTop) {
            char buf[32];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r.id, 16);
            return "0x" + std::string(buf, end);
        }
        // concept names are resolved by callers that know the schema
        return "#" + std::to_string(r.id);
    }
    }
}

} // namespace codm
