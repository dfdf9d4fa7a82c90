#include "funcol/engine.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_set>

#include "funcol/error.hpp"

namespace funcol {

DepGraph build_graph(const Schema& schema) {
    DepGraph g;
    std::unordered_set<Node, NodeHash> known;
    for (Table* t : schema.tables()) {
        if (t->kind() == TableKind::Primitive)
            continue;
        g.nodes.emplace_back(t);
        known.insert(Node(t));
    }
    for (Column* c : schema.columns()) {
        g.nodes.emplace_back(c);
        known.insert(Node(c));
    }
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const Node& a, const Node& b) { return node_seq(a) < node_seq(b); });
    for (const Node& n : g.nodes) {
        auto* tp = std::get_if<Table*>(&n);
        bool is_product_table = tp && (*tp)->product_def();
        std::vector<Node> deps;
        for (const Node& d : direct_dependencies(n)) {
            if (!known.contains(d))
                continue;
            // Primary tables are populated before evaluation, so they impose
            // no ordering; product tables keep them as explicit sources.
            if (auto* dt = std::get_if<Table*>(&d))
                if (!(*dt)->is_derived() && !is_product_table)
                    continue;
            deps.push_back(d);
        }
        std::sort(deps.begin(), deps.end(),
                  [](const Node& a, const Node& b) { return node_seq(a) < node_seq(b); });
        g.edges.emplace(n, std::move(deps));
    }
    return g;
}

namespace {

std::string find_cycle(const DepGraph& graph, const std::vector<Node>& stuck) {
    // Walk prerequisites inside the stuck set until a node repeats.
    std::unordered_set<Node, NodeHash> stuck_set(stuck.begin(), stuck.end());
    std::vector<Node> trail;
    std::unordered_set<Node, NodeHash> on_trail;
    Node at = stuck.front();
    while (!on_trail.contains(at)) {
        trail.push_back(at);
        on_trail.insert(at);
        for (const Node& d : graph.edges.at(at)) {
            if (stuck_set.contains(d)) {
                at = d;
                break;
            }
        }
    }
    // Trim the lead-in before the first repeated node.
    auto begin = std::find(trail.begin(), trail.end(), at);
    std::string out;
    for (auto it = begin; it != trail.end(); ++it) {
        if (!out.empty())
            out += " -> ";
        out += node_name(*it);
    }
    out += " -> " + node_name(at);
    return out;
}

} // namespace

std::vector<Node> validate(const DepGraph& graph) {
    std::unordered_map<Node, std::size_t, NodeHash> missing;
    std::unordered_map<Node, std::vector<Node>, NodeHash> dependents;
    for (const Node& n : graph.nodes) {
        const auto& deps = graph.edges.at(n);
        missing[n] = deps.size();
        for (const Node& d : deps)
            dependents[d].push_back(n);
    }
    auto by_seq = [](const Node& a, const Node& b) { return node_seq(a) > node_seq(b); };
    std::priority_queue<Node, std::vector<Node>, decltype(by_seq)> ready(by_seq);
    for (const Node& n : graph.nodes)
        if (missing[n] == 0)
            ready.push(n);

    std::vector<Node> order;
    order.reserve(graph.nodes.size());
    while (!ready.empty()) {
        Node n = ready.top();
        ready.pop();
        order.push_back(n);
        for (const Node& dep : dependents[n])
            if (--missing[dep] == 0)
                ready.push(dep);
    }
    if (order.size() != graph.nodes.size()) {
        std::vector<Node> stuck;
        for (const Node& n : graph.nodes)
            if (missing[n] > 0)
                stuck.push_back(n);
        throw Error(Errc::CycleError, "cycle detected: " + find_cycle(graph, stuck));
    }
    return order;
}

namespace {

kernels::NodeStats run_column_kernel(Column& column, const EvalOptions& options) {
    switch (column.kind()) {
    case ColumnKind::Calculate:
        return options.parallel ? kernels::calculate_parallel(column)
                                : kernels::calculate_serial(column);
    case ColumnKind::Link:
        return options.parallel ? kernels::link_parallel(column, options.strict_links)
                                : kernels::link_serial(column, options.strict_links);
    case ColumnKind::Accumulate:
        return kernels::accumulate_run(column);
    case ColumnKind::Project:
        return kernels::project_run(column);
    default:
        return {}; // stored and product-attribute columns carry data, not logic
    }
}

// Project evaluation fills the projected table, its key columns and the
// project column in one sweep; mark all of them clean.
void finish_project(Column& column) {
    column.set_dirty(false);
    column.output().set_dirty(false);
    for (Column* k : column.project_def()->output_keys)
        k->set_dirty(false);
}

kernels::NodeStats run_table_kernel(Table& table, const EvalOptions& options) {
    if (table.product_def()) {
        kernels::NodeStats stats = options.parallel ? kernels::product_parallel(table)
                                                    : kernels::product_serial(table);
        table.set_dirty(false);
        for (Column* dim : table.product_def()->dimensions)
            dim->set_dirty(false);
        return stats;
    }
    if (Column* via = table.populated_by()) {
        kernels::NodeStats stats = kernels::project_run(*via);
        finish_project(*via);
        return stats;
    }
    table.set_dirty(false); // projected table with no populating column yet
    return {};
}

} // namespace

kernels::NodeStats evaluate_column(Column& column, const EvalOptions& options) {
    kernels::NodeStats stats = run_column_kernel(column, options);
    if (column.kind() == ColumnKind::Project)
        finish_project(column);
    else
        column.set_dirty(false);
    return stats;
}

EvalReport evaluate_all(Schema& schema, const EvalOptions& options) {
    DepGraph graph = build_graph(schema);
    std::vector<Node> order = validate(graph);

    EvalReport report;
    for (const Node& n : order) {
        if (!node_dirty(n))
            continue;
        if (auto* cp = std::get_if<Column*>(&n)) {
            Column* c = *cp;
            bool undefined = std::holds_alternative<std::monostate>(c->definition());
            if (c->kind() == ColumnKind::Stored || c->kind() == ColumnKind::ProductAttribute ||
                undefined) {
                c->set_dirty(false); // data columns have nothing to run
                continue;
            }
        }
        auto t0 = std::chrono::steady_clock::now();
        kernels::NodeStats stats;
        std::string kind;
        if (auto* tp = std::get_if<Table*>(&n)) {
            kind = (*tp)->product_def() ? "product" : "project";
            stats = run_table_kernel(**tp, options);
        } else {
            Column* c = std::get<Column*>(n);
            kind = column_kind_name(c->kind());
            stats = evaluate_column(*c, options);
        }
        auto t1 = std::chrono::steady_clock::now();
        report.nodes.push_back({node_name(n), kind, stats.rows, stats.nulls, stats.skipped,
                                std::chrono::duration<double>(t1 - t0).count()});
    }
    return report;
}

} // namespace funcol
