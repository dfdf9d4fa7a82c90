#include <algorithm>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "funcol/csv.hpp"
#include "funcol/engine.hpp"
#include "funcol/error.hpp"
#include "funcol/workflow.hpp"

namespace {

using namespace funcol;

void print_report(const EvalReport& report) {
    if (report.nodes.empty()) {
        std::cerr << "nothing to evaluate\n";
        return;
    }
    std::size_t name_w = 4, kind_w = 4;
    for (const NodeReport& n : report.nodes) {
        name_w = std::max(name_w, n.name.size());
        kind_w = std::max(kind_w, n.kind.size());
    }
    std::cerr << std::left << std::setw(static_cast<int>(name_w) + 2) << "node"
              << std::setw(static_cast<int>(kind_w) + 2) << "kind" << std::right
              << std::setw(10) << "rows" << std::setw(10) << "nulls" << std::setw(10) << "skipped"
              << std::setw(12) << "ms" << "\n";
    for (const NodeReport& n : report.nodes) {
        std::cerr << std::left << std::setw(static_cast<int>(name_w) + 2) << n.name
                  << std::setw(static_cast<int>(kind_w) + 2) << n.kind << std::right
                  << std::setw(10) << n.rows << std::setw(10) << n.nulls << std::setw(10)
                  << n.skipped << std::setw(12) << std::fixed << std::setprecision(3)
                  << n.seconds * 1e3 << "\n";
    }
}

void print_grid(const Table& table, std::size_t limit) {
    const auto& cols = table.columns();
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header;
    header.reserve(cols.size() + 1);
    header.push_back("row");
    for (Column* c : cols)
        header.push_back(c->name());
    grid.push_back(std::move(header));

    std::size_t shown = 0;
    for (RowId row : table.rows()) {
        if (shown++ == limit)
            break;
        std::vector<std::string> line;
        line.reserve(cols.size() + 1);
        line.push_back(std::to_string(row));
        for (Column* c : cols)
            line.push_back(render_value(c->get(row)));
        grid.push_back(std::move(line));
    }

    std::vector<std::size_t> widths(grid.front().size(), 0);
    for (const auto& line : grid)
        for (std::size_t i = 0; i < line.size(); ++i)
            widths[i] = std::max(widths[i], line[i].size());
    for (const auto& line : grid) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i)
                std::cout << "  ";
            std::cout << std::left << std::setw(static_cast<int>(widths[i])) << line[i];
        }
        std::cout << "\n";
    }
}

int cmd_run(const std::string& workflow_path, bool strict_links) {
    Workflow wf = load_workflow_file(workflow_path);
    EvalOptions options;
    options.strict_links = strict_links;
    EvalReport report = evaluate_all(*wf.schema, options);
    print_report(report);
    for (const ExportSpec& spec : wf.exports) {
        std::size_t rows = export_csv(*spec.table, spec.columns, spec.path);
        std::cout << "wrote " << spec.path.string() << " (" << rows << " rows)\n";
    }
    return 0;
}

int cmd_validate(const std::string& workflow_path) {
    Workflow wf = load_workflow_file(workflow_path);
    DepGraph graph = build_graph(*wf.schema);
    for (const Node& n : validate(graph))
        std::cout << node_name(n) << "\n";
    return 0;
}

int cmd_show(const std::string& workflow_path, const std::string& table_name, std::size_t limit,
             bool strict_links) {
    Workflow wf = load_workflow_file(workflow_path);
    Table& table = wf.schema->table(table_name); // UnknownTable before any work
    EvalOptions options;
    options.strict_links = strict_links;
    evaluate_all(*wf.schema, options);
    print_grid(table, limit);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workflow-driven columnar derivation engine"};
    app.require_subcommand(1);

    std::string workflow_path;
    std::string table_name;
    std::size_t limit = 20;
    bool strict_links = false;

    CLI::App* run = app.add_subcommand("run", "evaluate a workflow and write its exports");
    run->add_option("workflow", workflow_path, "workflow file")->required();
    run->add_flag("--strict-links", strict_links, "fail when a link key matches several rows");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a workflow and print the evaluation order");
    validate_cmd->add_option("workflow", workflow_path, "workflow file")->required();

    CLI::App* show = app.add_subcommand("show", "evaluate a workflow and print one table");
    show->add_option("workflow", workflow_path, "workflow file")->required();
    show->add_option("--table", table_name, "table to print")->required();
    show->add_option("--limit", limit, "rows to print")->check(CLI::PositiveNumber);
    show->add_flag("--strict-links", strict_links, "fail when a link key matches several rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(run))
            return cmd_run(workflow_path, strict_links);
        if (app.got_subcommand(validate_cmd))
            return cmd_validate(workflow_path);
        return cmd_show(workflow_path, table_name, limit, strict_links);
    } catch (const funcol::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
