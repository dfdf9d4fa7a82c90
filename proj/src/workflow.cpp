#include "funcol/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "funcol/csv.hpp"
#include "funcol/error.hpp"

namespace funcol {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw Error(Errc::SchemaError, where + ": " + what);
}

// Underlying-operation errors surface with the entry location prefixed.
template <typename Fn>
auto at_entry(const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == Errc::SchemaError)
            throw;
        throw Error(e.code(), where + ": " + e.what());
    }
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!obj.is_object())
        schema_fail(where, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            schema_fail(where, "unknown key '" + key + "'");
}

std::string need_string(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key))
        schema_fail(where, "missing key '" + key + "'");
    if (!obj[key].is_string())
        schema_fail(where, "key '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

std::vector<std::string> need_string_list(const json& obj, const std::string& where,
                                          const std::string& key) {
    if (!obj.contains(key))
        schema_fail(where, "missing key '" + key + "'");
    if (!obj[key].is_array())
        schema_fail(where, "key '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& item : obj[key]) {
        if (!item.is_string())
            schema_fail(where, "key '" + key + "' must be an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void forbid(const json& obj, const std::string& where, std::initializer_list<const char*> keys,
            const std::string& kind) {
    for (const char* key : keys)
        if (obj.contains(key))
            schema_fail(where, "key '" + std::string(key) + "' is not allowed for kind '" +
                                   kind + "'");
}

PrimType parse_prim(const std::string& name, const std::string& where) {
    if (name == "Integer") return PrimType::Integer;
    if (name == "Float") return PrimType::Float;
    if (name == "Text") return PrimType::Text;
    if (name == "Boolean") return PrimType::Boolean;
    schema_fail(where, "unknown type '" + name + "'");
}

Value parse_initial(const json& v, PrimType type, const std::string& where) {
    switch (type) {
    case PrimType::Integer:
        if (v.is_number_integer())
            return Value(v.get<std::int64_t>());
        break;
    case PrimType::Float:
        if (v.is_number())
            return Value(v.get<double>());
        break;
    case PrimType::Boolean:
        if (v.is_boolean())
            return Value(v.get<bool>());
        break;
    case PrimType::Text:
        if (v.is_string())
            return Value(v.get<std::string>());
        break;
    }
    schema_fail(where, "key 'initial' does not match the column type");
}

// Group paths are table-qualified: "Items.Product" names the fact table and
// the path from it.
ColumnPath parse_group(Schema& schema, const std::string& text, const std::string& where) {
    std::size_t dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= text.size())
        schema_fail(where, "key 'group' must be '<FactTable>.<column path>', got '" + text + "'");
    Table* fact = schema.find_table(text.substr(0, dot));
    if (!fact)
        schema_fail(where, "group fact table '" + text.substr(0, dot) + "' does not exist");
    return schema.resolve_path(*fact, std::string_view(text).substr(dot + 1));
}

struct ProductPlan {
    Table* table;
    std::vector<Column*> dimensions; // declaration order
    std::optional<std::string> predicate;
    std::string predicate_where;
    std::optional<std::vector<std::string>> explicit_order;
    std::string where; // first dimension entry, for error messages
};

} // namespace

Workflow load_workflow(std::string_view document, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw Error(Errc::SchemaError, std::string("workflow is not valid JSON: ") + e.what());
    }
    check_keys(doc, "workflow", {"tables", "columns", "exports"});

    Workflow wf;
    wf.schema = std::make_unique<Schema>();
    Schema& schema = *wf.schema;

    // -- pass 1: tables -------------------------------------------------------
    std::vector<std::pair<Table*, std::filesystem::path>> csv_loads;
    if (doc.contains("tables")) {
        if (!doc["tables"].is_array())
            schema_fail("workflow", "'tables' must be an array");
        std::size_t i = 0;
        for (const json& entry : doc["tables"]) {
            std::string where = "tables[" + std::to_string(i++) + "]";
            check_keys(entry, where, {"name", "kind", "csv"});
            std::string name = need_string(entry, where, "name");
            std::string kind_text = need_string(entry, where, "kind");
            TableKind kind;
            if (kind_text == "primary") kind = TableKind::Primary;
            else if (kind_text == "product") kind = TableKind::Product;
            else if (kind_text == "projected") kind = TableKind::Projected;
            else schema_fail(where, "unknown table kind '" + kind_text + "'");
            Table* table =
                at_entry(where, [&]() -> Table* { return &schema.create_table(name, kind); });
            if (entry.contains("csv")) {
                if (kind != TableKind::Primary)
                    schema_fail(where, "only primary tables load from CSV");
                csv_loads.emplace_back(table, base_dir / need_string(entry, where, "csv"));
            }
        }
    }

    // -- pass 2: create all columns (definitions install later, so formulas
    // may reference columns declared in any order) ---------------------------
    struct PendingDef {
        const json* entry;
        std::string where;
        Column* column;
        std::string kind;
    };
    std::vector<PendingDef> pending;
    std::vector<ProductPlan> products;

    static const std::set<std::string> column_keys = {
        "table", "name",  "kind",        "type",   "target",     "formula", "output_keys",
        "input_keys", "group", "update", "initial", "dimensions", "predicate"};

    if (doc.contains("columns")) {
        if (!doc["columns"].is_array())
            schema_fail("workflow", "'columns' must be an array");
        std::size_t i = 0;
        for (const json& entry : doc["columns"]) {
            std::string where = "columns[" + std::to_string(i++) + "]";
            check_keys(entry, where, column_keys);
            std::string table_name = need_string(entry, where, "table");
            std::string name = need_string(entry, where, "name");
            std::string kind = need_string(entry, where, "kind");
            Table* input = schema.find_table(table_name);
            if (!input)
                schema_fail(where, "table '" + table_name + "' does not exist");

            Table* output = nullptr;
            ColumnKind ckind;
            if (kind == "stored" || kind == "calculate" || kind == "accumulate") {
                ckind = kind == "stored"      ? ColumnKind::Stored
                        : kind == "calculate" ? ColumnKind::Calculate
                                              : ColumnKind::Accumulate;
                std::string type = need_string(entry, where, "type");
                forbid(entry, where, {"target", "output_keys", "input_keys", "dimensions",
                                      "predicate"}, kind);
                output = &schema.primitive(parse_prim(type, where));
            } else if (kind == "link" || kind == "project" || kind == "product-attribute") {
                ckind = kind == "link"      ? ColumnKind::Link
                        : kind == "project" ? ColumnKind::Project
                                            : ColumnKind::ProductAttribute;
                std::string target = need_string(entry, where, "target");
                forbid(entry, where, {"type", "formula", "group", "update", "initial"}, kind);
                output = schema.find_table(target);
                if (!output)
                    schema_fail(where, "target table '" + target + "' does not exist");
            } else {
                schema_fail(where, "unknown column kind '" + kind + "'");
            }

            // Creation kind: stored until a definition installs; dimensions
            // keep their declared kind for define_product.
            ColumnKind created_kind =
                ckind == ColumnKind::ProductAttribute ? ckind : ColumnKind::Stored;
            Column* column = at_entry(where, [&]() -> Column* {
                return &schema.create_column(name, *input, *output, created_kind);
            });

            if (kind == "product-attribute") {
                forbid(entry, where, {"formula", "group", "update", "initial"}, kind);
                auto plan = std::find_if(products.begin(), products.end(),
                                         [&](const ProductPlan& p) { return p.table == input; });
                if (plan == products.end()) {
                    products.push_back(ProductPlan{input, {}, std::nullopt, "", std::nullopt, where});
                    plan = products.end() - 1;
                }
                plan->dimensions.push_back(column);
                if (entry.contains("predicate")) {
                    if (plan->predicate)
                        schema_fail(where, "table '" + table_name +
                                               "' already has a predicate entry");
                    plan->predicate = need_string(entry, where, "predicate");
                    plan->predicate_where = where;
                }
                if (entry.contains("dimensions")) {
                    if (plan->explicit_order)
                        schema_fail(where, "table '" + table_name +
                                               "' already has a dimension order entry");
                    plan->explicit_order = need_string_list(entry, where, "dimensions");
                }
            } else if (kind == "stored") {
                forbid(entry, where, {"formula", "group", "update", "initial"}, kind);
            } else {
                forbid(entry, where, {"dimensions", "predicate"}, kind);
                if (kind == "calculate")
                    forbid(entry, where, {"group", "update", "initial"}, kind);
                else if (kind == "accumulate")
                    forbid(entry, where, {"formula"}, kind);
                else
                    forbid(entry, where, {"formula", "group", "update", "initial"}, kind);
                pending.push_back(PendingDef{&entry, where, column, kind});
            }
        }
    }

    // -- pass 3: CSV loads ----------------------------------------------------
    for (const auto& [table, path] : csv_loads)
        load_csv(schema, table->name(), path);

    // -- pass 4: definitions, in declaration order ----------------------------
    for (const PendingDef& def : pending) {
        const json& entry = *def.entry;
        const std::string& where = def.where;
        Column& column = *def.column;
        at_entry(where, [&] {
            if (def.kind == "calculate") {
                schema.define_calculate(column, need_string(entry, where, "formula"));
            } else if (def.kind == "link" || def.kind == "project") {
                std::vector<std::string> out_names = need_string_list(entry, where, "output_keys");
                std::vector<std::string> in_paths = need_string_list(entry, where, "input_keys");
                std::vector<Column*> output_keys;
                for (const std::string& n : out_names) {
                    Column* k = column.output().find_column(n);
                    if (!k)
                        schema_fail(where, "target table '" + column.output().name() +
                                               "' has no column '" + n + "'");
                    output_keys.push_back(k);
                }
                std::vector<ColumnPath> input_keys;
                for (const std::string& p : in_paths)
                    input_keys.push_back(schema.resolve_path(column.input(), p));
                if (def.kind == "link")
                    schema.define_link(column, std::move(output_keys), std::move(input_keys));
                else
                    schema.define_project(column, std::move(output_keys), std::move(input_keys));
            } else { // accumulate
                ColumnPath group = parse_group(schema, need_string(entry, where, "group"), where);
                if (!entry.contains("initial"))
                    schema_fail(where, "missing key 'initial'");
                Value initial = parse_initial(entry["initial"],
                                              *column.output().primitive_type(), where);
                schema.define_accumulate(column, std::move(group),
                                         need_string(entry, where, "update"), initial);
            }
        });
    }

    // -- pass 5: product definitions ------------------------------------------
    for (ProductPlan& plan : products) {
        std::vector<Column*> dims = plan.dimensions;
        if (plan.explicit_order) {
            dims.clear();
            for (const std::string& n : *plan.explicit_order) {
                Column* c = plan.table->find_column(n);
                if (!c)
                    schema_fail(plan.where, "dimension order names unknown column '" + n + "'");
                dims.push_back(c);
            }
            if (dims.size() != plan.dimensions.size())
                schema_fail(plan.where, "dimension order must list every product-attribute column");
        }
        at_entry(plan.predicate.has_value() ? plan.predicate_where : plan.where,
                 [&] { schema.define_product(*plan.table, std::move(dims), plan.predicate); });
    }
    for (Table* t : schema.tables())
        if (t->kind() == TableKind::Product && !t->product_def())
            throw Error(Errc::NoDimensions,
                        "product table '" + t->name() + "' has no product-attribute columns");

    // -- pass 6: exports --------------------------------------------------------
    if (doc.contains("exports")) {
        if (!doc["exports"].is_array())
            schema_fail("workflow", "'exports' must be an array");
        std::size_t i = 0;
        for (const json& entry : doc["exports"]) {
            std::string where = "exports[" + std::to_string(i++) + "]";
            check_keys(entry, where, {"table", "columns", "path"});
            std::string table_name = need_string(entry, where, "table");
            Table* table = schema.find_table(table_name);
            if (!table)
                schema_fail(where, "table '" + table_name + "' does not exist");
            ExportSpec spec;
            spec.table = table;
            for (const std::string& n : need_string_list(entry, where, "columns")) {
                Column* c = table->find_column(n);
                if (!c)
                    schema_fail(where, "table '" + table_name + "' has no column '" + n + "'");
                spec.columns.push_back(c);
            }
            spec.path = base_dir / need_string(entry, where, "path");
            wf.exports.push_back(std::move(spec));
        }
    }

    return wf;
}

Workflow load_workflow_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_workflow(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

} // namespace funcol
