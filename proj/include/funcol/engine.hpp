#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "funcol/deps.hpp"
#include "funcol/kernels.hpp"
#include "funcol/schema.hpp"

namespace funcol {

struct EvalOptions {
    bool parallel = true;     // use the OpenMP kernels where rows are independent
    bool strict_links = false; // raise AmbiguousLink when a key matches >1 row
};

struct NodeReport {
    std::string name;
    std::string kind;
    std::uint64_t rows = 0;
    std::uint64_t nulls = 0;
    std::uint64_t skipped = 0;
    double seconds = 0.0;
};

struct EvalReport {
    std::vector<NodeReport> nodes;
};

struct DepGraph {
    std::vector<Node> nodes; // creation order
    std::unordered_map<Node, std::vector<Node>, NodeHash> edges; // node -> prerequisites
};

/// Extracts the dependency graph of every column and derived table.
DepGraph build_graph(const Schema& schema);

/// Topological order, ties broken by creation order. Throws Error(CycleError)
/// naming one cycle.
std::vector<Node> validate(const DepGraph& graph);

/// Evaluates one column, assuming its prerequisites are clean.
kernels::NodeStats evaluate_column(Column& column, const EvalOptions& options = {});

/// Evaluates every dirty node in topological order. On error the nodes already
/// evaluated stay clean and the rest stay dirty.
EvalReport evaluate_all(Schema& schema, const EvalOptions& options = {});

} // namespace funcol
