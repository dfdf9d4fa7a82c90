#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "funcol/schema.hpp"

namespace funcol {

/// A dependency node: a column, or a table. Primary tables appear only as
/// sources of change; the evaluation graph keeps columns and derived tables.
using Node = std::variant<Table*, Column*>;

struct NodeHash {
    std::size_t operator()(const Node& n) const noexcept {
        return std::visit([](auto* p) { return std::hash<const void*>{}(p); }, n);
    }
};

std::string node_name(const Node& n);
std::uint64_t node_seq(const Node& n);
bool node_dirty(const Node& n);
void set_node_dirty(const Node& n, bool dirty);

/// True when the node takes part in evaluation: every column, plus product
/// and projected tables.
bool is_evaluatable(const Node& n);

/// The full prerequisite set of a node, derived from its definition. Includes
/// primary tables (population prerequisites); callers filter as needed.
std::vector<Node> direct_dependencies(const Node& n);

} // namespace funcol
