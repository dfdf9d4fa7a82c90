#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "funcol/schema.hpp"

namespace funcol {

struct ExportSpec {
    Table* table;
    std::vector<Column*> columns;
    std::filesystem::path path; // resolved against the workflow directory
};

struct Workflow {
    std::unique_ptr<Schema> schema;
    std::vector<ExportSpec> exports;
};

/// Loads a declarative workflow document (JSON: top-level keys `tables`,
/// `columns`, `exports`). Creates tables, loads their CSVs, installs the
/// definitions; evaluates nothing. Relative file paths resolve against
/// `base_dir`. Structural problems raise Error(SchemaError) carrying the
/// entry path; problems from the underlying operations are prefixed with it.
Workflow load_workflow(std::string_view document,
                       const std::filesystem::path& base_dir = ".");

Workflow load_workflow_file(const std::filesystem::path& path);

} // namespace funcol
