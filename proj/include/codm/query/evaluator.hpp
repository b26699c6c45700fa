#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codm::query {

struct Column {
    std::string name;
    ConceptId domain = kTop; // kTop when every value is null

    friend bool operator==(const Column&, const Column&) = default;
};

/// Derived concept produced by a query: named columns and ordered rows.
struct ResultConcept {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::vector<Value>> rows;

    std::optional<std::size_t> column_index(std::string_view column) const;
};

using Params = std::map<std::string, Value, std::less<>>;

ResultConcept evaluate_query(const Database& db, const Query& q, const Params& params = {});
ResultConcept evaluate_query(const Database& db, std::string_view text, const Params& params = {});

/// Evaluates an expression outside any query. When `self` is set, bare
/// identifiers resolve against its dimensions and properties.
Value evaluate_scalar(const Database& db, const Expr& e, std::optional<ItemRef> self = {},
                      const Params& params = {});

/// Same, with extra named bindings visible to the expression.
Value evaluate_with(const Database& db, const Expr& e, const Params& bindings,
                    std::optional<ItemRef> self = {});

/// Aggregate over a collection: nulls are skipped except by size; over no
/// values sum is 0 and avg/min/max are null.
Value aggregate_values(AggFn fn, const std::vector<Value>& items);

/// Rewrites a simple query `{c:C | p} <r>` into its block form
/// `{begin {} over c:C where (p) end {} return <r>}`.
Query to_block_form(const Query& q);

/// Identifier and member-step names used anywhere in the expression,
/// nested queries included.
void collect_names(const Expr& e, std::vector<std::string>& out);
void collect_names(const Query& q, std::vector<std::string>& out);

} // namespace codm::query
