#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"
#include "codm/query/evaluator.hpp"

#include <optional>
#include <string>

namespace codm::analytics {

/// One row per item of `groups`: the group item and the aggregate of
/// `measure` over its members. `member` is either `Sub.path` (the subitems of
/// the group reached through that path) or a multi-valued property of the
/// group concept. Bare identifiers in `measure` refer to the member item.
query::ResultConcept group_aggregate(const Database& db, ConceptId groups,
                                     const std::string& member,
                                     const std::optional<query::Expr>& measure,
                                     query::AggFn agg);

} // namespace codm::analytics
