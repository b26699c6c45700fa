#pragma once

#include "codm/database.hpp"
#include "codm/query/ast.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace codm::analytics {

/// `via` links this level to the previous one and is tried in order as a
/// dimension path from this concept up to the previous concept, a dimension
/// path from the previous concept up to this one, a multi-valued property of
/// the previous concept, and a virtual property of the previous concept. The
/// first level takes the whole extent and ignores `via`.
struct TreeLevel {
    ConceptId concept_id;
    std::string via;
    std::vector<std::string> shown;
    std::optional<query::Expr> filter; // bare identifiers refer to the node item
};

struct TreeSpec {
    std::vector<TreeLevel> levels;
};

/// The root has no item and level 0; level-k nodes hold items of levels[k-1].
struct TreeNode {
    std::size_t level = 0;
    std::optional<ItemRef> item;
    std::vector<std::pair<std::string, Value>> shown;
    std::vector<TreeNode> children;
};

enum class Expansion { subitems, superitem, multi_valued, virtual_property };

/// Rule connecting level k (k >= 1) to level k-1; throws InvalidTreeSpec.
Expansion expansion_rule(const Database& db, const TreeSpec& spec, std::size_t k);

/// Items of level k related to `parent` (an item of level k-1), before filtering.
std::vector<ItemRef> expand_item(const Database& db, const TreeSpec& spec, std::size_t k,
                                 ItemRef parent);

/// `depth_limit` counts levels below the root; 0 means every level.
TreeNode hierarchy_tree(const Database& db, const TreeSpec& spec, std::size_t depth_limit = 0);

/// Two spaces per depth, `label [name=value ...]` per node, root first.
std::string dump_tree(const Database& db, const TreeNode& root);

} // namespace codm::analytics
