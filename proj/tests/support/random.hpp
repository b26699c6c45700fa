#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"

#include <random>
#include <string>
#include <vector>

namespace codm::testing {

using Rng = std::mt19937_64;

struct RandomDbOptions {
    int max_concepts = 5;
    int max_dims = 3;
    int max_items = 20;
    double nullable_rate = 0.3;
    double local_rate = 0.0;
    double null_value_rate = 0.2;
};

/// Concepts K0..K{n-1} with dimensions d1..d3 whose domains are primitives or
/// earlier concepts; no direct dimensions.
Database random_database(Rng& rng, const RandomDbOptions& options = {});

Value random_primitive(Rng& rng, ConceptId type);
/// A value the dimension accepts, or null when none exists and the dimension
/// is nullable; nullopt when no valid value exists.
std::optional<Value> random_slot(Rng& rng, const Database& db, const Dimension& dim,
                                 double null_rate);

struct PathInfo {
    std::vector<std::string> steps;
    ConceptId target;
};

/// Dimension paths of rank 1..max_rank starting at `c`.
std::vector<PathInfo> paths_from(const Schema& schema, ConceptId c, int max_rank = 3);

/// Boolean predicate over `binder` (an item of `c`): comparisons of paths
/// with constants, arithmetic on numeric paths, `is null` and ref equality,
/// combined with AND, OR and NOT.
query::Expr random_predicate(Rng& rng, const Database& db, ConceptId c,
                             const std::string& binder, int depth);

/// Arbitrary syntactically valid query over the concept names of `schema`;
/// it need not be evaluable.
query::Query random_query_ast(Rng& rng, const Schema& schema, int depth = 2);

} // namespace codm::testing
