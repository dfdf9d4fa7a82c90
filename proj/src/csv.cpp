#include "funcol/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "funcol/error.hpp"

namespace funcol {

std::string format_float(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string render_value(const Value& value) {
    switch (value.kind()) {
    case Value::Kind::Null: return "";
    case Value::Kind::Integer: return std::to_string(value.as_int());
    case Value::Kind::Float: return format_float(value.as_float());
    case Value::Kind::Text: return value.as_text();
    case Value::Kind::Boolean: return value.as_bool() ? "true" : "false";
    case Value::Kind::Ref:
        return value.as_ref().table->name() + ":" + std::to_string(value.as_ref().row);
    }
    return "";
}

// ---------------------------------------------------------------------------
// Reader

namespace {

struct CsvField {
    std::string text;
    bool quoted = false;
};

using CsvRecord = std::vector<CsvField>;

// RFC-4180 subset: comma separated, CRLF or LF records, double-quote quoting
// with "" escapes. Quoted fields may span lines.
std::vector<CsvRecord> parse_csv(std::istream& in, std::string_view origin) {
    std::string text(std::istreambuf_iterator<char>(in), {});
    std::vector<CsvRecord> records;
    CsvRecord record;
    CsvField field;
    std::size_t line = 1;
    bool in_quotes = false;
    bool started = false; // the current record has consumed something

    auto end_field = [&] {
        record.push_back(std::move(field));
        field = {};
    };
    auto end_record = [&] {
        if (started) {
            end_field();
            records.push_back(std::move(record));
            record = {};
            started = false;
        }
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.text += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field.text += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.text.empty())
                throw Error(Errc::ParseError, std::string(origin) + " line " +
                                                  std::to_string(line) +
                                                  ": quote inside unquoted field");
            in_quotes = true;
            field.quoted = true;
            started = true;
            break;
        case ',':
            end_field();
            started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            break;
        default:
            field.text += c;
            started = true;
        }
    }
    if (in_quotes)
        throw Error(Errc::ParseError,
                    std::string(origin) + ": unterminated quoted field at end of input");
    end_record(); // final record without a trailing newline
    return records;
}

Value parse_typed(const CsvField& field, PrimType type, std::string_view origin,
                  std::size_t line, const std::string& column) {
    if (field.text.empty() && !field.quoted)
        return {}; // empty field loads as NULL
    auto fail = [&](std::string_view what) -> Value {
        throw Error(Errc::ParseError, std::string(origin) + " line " + std::to_string(line) +
                                          ", column '" + column + "': " + std::string(what) +
                                          " '" + field.text + "'");
    };
    switch (type) {
    case PrimType::Integer: {
        std::int64_t v = 0;
        const char* b = field.text.data();
        const char* e = b + field.text.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e)
            return fail("not an integer");
        return Value(v);
    }
    case PrimType::Float: {
        double v = 0;
        const char* b = field.text.data();
        const char* e = b + field.text.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e)
            return fail("not a number");
        return Value(v);
    }
    case PrimType::Boolean:
        if (field.text == "true")
            return Value(true);
        if (field.text == "false")
            return Value(false);
        return fail("not a boolean");
    case PrimType::Text:
        return Value(field.text);
    }
    return {};
}

} // namespace

std::size_t load_csv(Schema& schema, std::string_view table_name, std::istream& in,
                     std::string_view origin) {
    Table& table = schema.table(table_name);
    if (table.kind() != TableKind::Primary)
        throw Error(Errc::NotPrimaryTable,
                    "CSV can only load into primary tables, not '" + table.name() + "'");
    std::vector<CsvRecord> records = parse_csv(in, origin);
    if (records.empty())
        throw Error(Errc::HeaderMismatch, std::string(origin) + ": missing header row");

    std::vector<Column*> cols;
    std::vector<PrimType> types;
    for (const CsvField& h : records.front()) {
        Column* c = table.find_column(h.text);
        if (!c || c->kind() != ColumnKind::Stored)
            throw Error(Errc::HeaderMismatch, std::string(origin) + ": header '" + h.text +
                                                  "' is not a stored column of table '" +
                                                  table.name() + "'");
        auto prim = c->output().primitive_type();
        if (!prim)
            throw Error(Errc::HeaderMismatch, std::string(origin) + ": column '" + h.text +
                                                  "' does not store a primitive type");
        cols.push_back(c);
        types.push_back(*prim);
    }

    std::size_t count = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        if (rec.size() != cols.size())
            throw Error(Errc::ParseError, std::string(origin) + " line " + std::to_string(r + 1) +
                                              ": expected " + std::to_string(cols.size()) +
                                              " fields, found " + std::to_string(rec.size()));
        std::vector<std::pair<Column*, Value>> assignments;
        assignments.reserve(cols.size());
        for (std::size_t f = 0; f < cols.size(); ++f)
            assignments.emplace_back(cols[f],
                                     parse_typed(rec[f], types[f], origin, r + 1, cols[f]->name()));
        table.add_row_values(assignments);
        ++count;
    }
    return count;
}

std::size_t load_csv(Schema& schema, std::string_view table_name,
                     const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
    return load_csv(schema, table_name, in, path.string());
}

// ---------------------------------------------------------------------------
// Writer

namespace {

std::string quote_csv(const std::string& s, bool force_quotes) {
    bool needs = force_quotes || s.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string cell(const Value& v) {
    if (v.is_null())
        return ""; // NULL exports as an empty field
    // Quoted empty text stays distinguishable from NULL on reload.
    bool force = v.kind() == Value::Kind::Text && v.as_text().empty();
    return quote_csv(render_value(v), force);
}

} // namespace

std::size_t export_csv(const Table& table, std::span<Column* const> columns, std::ostream& out) {
    for (Column* c : columns)
        if (&c->input() != &table)
            throw Error(Errc::UnknownColumn, "column '" + c->qualified_name() +
                                                 "' does not belong to table '" + table.name() +
                                                 "'");
    std::string dirty_names;
    for (Column* c : columns)
        if (c->dirty() && c->kind() != ColumnKind::Stored)
            dirty_names += (dirty_names.empty() ? "" : ", ") + c->qualified_name();
    if (!dirty_names.empty())
        out << "# not evaluated: " << dirty_names << "\n";

    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << quote_csv(columns[i]->name(), false);
    out << "\n";

    std::size_t count = 0;
    for (RowId row : table.rows()) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << cell(columns[i]->get(row));
        out << "\n";
        ++count;
    }
    return count;
}

std::size_t export_csv(const Table& table, std::span<Column* const> columns,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for writing");
    std::size_t n = export_csv(table, columns, out);
    out.flush();
    if (!out)
        throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
    return n;
}

} // namespace funcol
