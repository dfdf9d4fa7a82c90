#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "funcol/schema.hpp"

namespace funcol {

/// Loads an RFC-4180-style CSV (comma separated, double-quote quoting, header
/// row mandatory) into a primary table. Every header must name a stored
/// column; fields parse per the column's type; unquoted empty fields load as
/// NULL. Returns the number of data records.
std::size_t load_csv(Schema& schema, std::string_view table_name, std::istream& in,
                     std::string_view origin = "<stream>");
std::size_t load_csv(Schema& schema, std::string_view table_name,
                     const std::filesystem::path& path);

/// Writes the given columns of a table as CSV: header of column names, live
/// rows in population order, NULL as an empty field, row refs rendered as
/// "Table:ordinal", floats in shortest round-trip form. Columns that are
/// still dirty are flagged in a leading comment line. Returns the data row
/// count.
std::size_t export_csv(const Table& table, std::span<Column* const> columns,
                       std::ostream& out);
std::size_t export_csv(const Table& table, std::span<Column* const> columns,
                       const std::filesystem::path& path);

/// Cell rendering shared by CSV export and the CLI grid (no quoting).
std::string render_value(const Value& value);

std::string format_float(double v); // shortest round-trip

} // namespace funcol
