#pragma once

#include "codm/database.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codm::io {

/// `concept NAME { dim: Domain [nullable] [direct] [inline], ... } [local] [hidden]`
std::string print_concept(const Schema& schema, ConceptId c);
/// Throws SyntaxError with the column of the offending token.
ConceptSpec parse_concept(std::string_view line);
bool is_concept_line(std::string_view line);

/// `view N = query`, `property C.n := expr`, `constraint C.n : expr` or
/// `multi C.n -> Target`.
bool is_definition_line(std::string_view line);
void apply_definition(Database& db, std::string_view line);
std::string definition_text(const Schema& schema, const Definition& def);

/// `Concept <v1, ...>` or, with an explicit id, `Concept#id <v1, ...>`.
struct DataLine {
    std::string concept_name;
    std::optional<std::uint64_t> id;
    std::vector<Value> values;
};

std::string print_item(const Schema& schema, const ItemStore& store, ItemRef item,
                       bool with_id);
/// References name their concept; unknown names raise UnknownConcept.
DataLine parse_data_line(std::string_view line, const Schema& schema);
bool is_data_line(std::string_view line);

/// Deterministic text form: `#schema` (concepts in topological order),
/// `#defs` (definitions in definition order), `#data` (items per concept in
/// topological order, insertion order within a concept).
std::string save_snapshot(const Database& db);
/// Errors carry `line N:` in their message: ParseError for malformed lines and
/// DanglingReference for references to missing items.
Database load_snapshot(std::string_view text);

void save_snapshot_file(const Database& db, const std::filesystem::path& path);
Database load_snapshot_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

} // namespace codm::io
