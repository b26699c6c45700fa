#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"
#include "codm/query/evaluator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace codm::analytics {

struct CubeAxis {
    ConceptId concept_id;
    DimPath path; // from the fact concept to concept_id
};

/// Measure and filters are expressions over the fact binder (`t` unless set).
struct CubeSpec {
    ConceptId fact;
    std::vector<CubeAxis> axes;
    std::string binder = "t";
    std::optional<query::Expr> measure;
    query::AggFn agg = query::AggFn::Sum;
    std::vector<query::Expr> filters;
};

/// `value` is empty for a cell without facts, except under size where it is
/// the count.
struct Cell {
    std::vector<ItemRef> coords;
    std::optional<Value> value;
    std::size_t facts = 0;
};

enum class LevelChange { roll_up, drill_down };

/// Axis reached from `fact` by the dotted dimension path `path` (empty = the
/// fact itself).
CubeAxis make_axis(const Database& db, ConceptId fact, const std::vector<std::string>& path);

/// Cells of the full cross product of the axis extents, first axis slowest.
std::vector<Cell> build_cube(const Database& db, const CubeSpec& spec);

CubeSpec change_level(const Database& db, const CubeSpec& spec, std::size_t axis,
                      LevelChange direction, const std::string& via);

/// Equivalent query: `{a1: A1, ...} <a1, ..., agg({t: Fact | t.p1 == a1 AND ...} <m>)>`.
std::string cube_query_text(const Database& db, const CubeSpec& spec);

/// CSV with a header row, one row per non-empty cell (or every cell when
/// `include_empty`), axis item labels then the value.
std::string dump_cube_csv(const Database& db, const CubeSpec& spec,
                          const std::vector<Cell>& cells, bool include_empty);

} // namespace codm::analytics
