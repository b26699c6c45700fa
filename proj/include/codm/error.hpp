#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codm {

enum class ErrorCode {
    DuplicateName,
    UnknownDomain,
    CycleDetected,
    UnknownConcept,
    InvalidDefinition,
    NotDirectSuper,
    PrimitiveDomain,
    BadDimensionSubset,
    ConceptInUse,
    ArityMismatch,
    DomainViolation,
    NullForbidden,
    ConstraintViolation,
    InvalidPath,
    DanglingReference,
    UnknownItem,
    IncomparableSchemas,
    SyntaxError,
    UnknownProperty,
    TypeError,
    UnknownParameter,
    MissingParameter,
    UnboundBlockVariable,
    ViewImmutable,
    UnknownLink,
    DuplicateLink,
    InvalidAxisPath,
    NoSuchLevel,
    NoCommonSubconcept,
    InvalidTreeSpec,
    ParseError,
    IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Every engine failure is reported through this exception. `subject` names the
/// concept, dimension or item the failure is about when there is one; the script
/// runner uses it to attribute batch errors to a source line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string subject = {})
        : std::runtime_error(std::string(error_name(code)) + ": " + message),
          code_(code), subject_(std::move(subject)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    ErrorCode code_;
    std::string subject_;
};

} // namespace codm
