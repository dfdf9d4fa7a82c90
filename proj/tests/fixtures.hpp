#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "funcol/csv.hpp"
#include "funcol/engine.hpp"
#include "funcol/error.hpp"
#include "funcol/schema.hpp"

namespace testsup {

using namespace funcol;

/// The canonical order-items fixture: Items[(p1,2),(p2,1),(p1,3)] linked to
/// Products[p1:10.0, p2:100.0], with Amount = Quantity * Product.Price and
/// Total = sum of Amount per product.
struct OrdersFixture {
    Schema schema;
    Table* items;
    Table* products;
    Column* product_id;
    Column* quantity;
    Column* id;
    Column* price;
    Column* product = nullptr;
    Column* amount = nullptr;
    Column* total = nullptr;

    explicit OrdersFixture(bool with_definitions = true) {
        items = &schema.create_table("Items", TableKind::Primary);
        products = &schema.create_table("Products", TableKind::Primary);
        Table& text = schema.primitive(PrimType::Text);
        Table& real = schema.primitive(PrimType::Float);
        product_id = &schema.create_column("ProductId", *items, text);
        quantity = &schema.create_column("Quantity", *items, real);
        id = &schema.create_column("Id", *products, text);
        price = &schema.create_column("Price", *products, real);

        items->add_row({{"ProductId", Value("p1")}, {"Quantity", Value(2.0)}});
        items->add_row({{"ProductId", Value("p2")}, {"Quantity", Value(1.0)}});
        items->add_row({{"ProductId", Value("p1")}, {"Quantity", Value(3.0)}});
        products->add_row({{"Id", Value("p1")}, {"Price", Value(10.0)}});
        products->add_row({{"Id", Value("p2")}, {"Price", Value(100.0)}});

        if (with_definitions)
            define();
    }

    void define() {
        product = &schema.create_column("Product", *items, *products, ColumnKind::Link);
        amount = &schema.create_column("Amount", *items, schema.primitive(PrimType::Float));
        total = &schema.create_column("Total", *products, schema.primitive(PrimType::Float));
        schema.define_link(*product, {id}, {schema.resolve_path(*items, "ProductId")});
        schema.define_calculate(*amount, "Quantity * Product.Price");
        schema.define_accumulate(*total, schema.resolve_path(*items, "Product"), "out + Amount",
                                 Value(0.0));
    }
};

/// Runs `fn` and reports the error code it threw, if any.
template <class Fn>
std::optional<Errc> thrown(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

/// Textual dump of all column data, normalized so that two schemas built or
/// repopulated independently compare equal: rows and row refs are identified
/// by their position within the current population, not by raw ordinals.
inline std::string snapshot(const Schema& schema) {
    std::ostringstream out;
    for (Table* t : schema.tables()) {
        if (t->kind() == TableKind::Primitive)
            continue;
        out << "table " << t->name() << " rows=" << t->row_count() << "\n";
        for (Column* c : t->columns()) {
            out << "  column " << c->name() << ":";
            for (RowId row : t->rows()) {
                Value v = c->get(row);
                if (v.kind() == Value::Kind::Ref)
                    out << " " << v.as_ref().table->name() << "#"
                        << (v.as_ref().row - v.as_ref().table->base());
                else if (v.is_null())
                    out << " _";
                else
                    out << " " << render_value(v);
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace testsup
