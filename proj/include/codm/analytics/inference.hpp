#pragma once

#include "codm/database.hpp"

#include <map>
#include <set>
#include <vector>

namespace codm::analytics {

/// Allowed items per constrained concept; a concept without an entry is
/// unconstrained.
using ConstraintSet = std::map<ConceptId, std::set<ItemRef>>;

/// Maximal concepts below the target (rank >= 1) and below or equal to every
/// constrained concept.
std::vector<ConceptId> inference_facts(const Database& db, const ConstraintSet& inputs,
                                       ConceptId target);

/// Target items reached upward from the fact items that satisfy every input
/// constraint along every path, in target extent order. A constraint on the
/// target itself also restricts the result.
std::vector<ItemRef> infer(const Database& db, const ConstraintSet& inputs, ConceptId target);

} // namespace codm::analytics
