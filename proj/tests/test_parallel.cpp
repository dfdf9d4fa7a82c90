#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

// The OpenMP kernels must be observationally identical to the serial
// reference: same column data, same counters, same first error.

using namespace funcol;
using testsup::snapshot;
using testsup::thrown;

namespace {

/// Randomized pipeline: two primary tables, a link, two calculates, an
/// accumulate and a filtered one-dimension product.
Schema build_random_schema(unsigned seed) {
    std::mt19937 rng(seed);
    auto pick = [&rng](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    Schema schema;
    Table& items = schema.create_table("Items", TableKind::Primary);
    Table& products = schema.create_table("Products", TableKind::Primary);
    schema.create_column("K", items, schema.primitive(PrimType::Integer));
    schema.create_column("Qty", items, schema.primitive(PrimType::Float));
    Column& pk = schema.create_column("K", products, schema.primitive(PrimType::Integer));
    schema.create_column("Price", products, schema.primitive(PrimType::Float));

    int nproducts = pick(1, 60);
    for (int i = 0; i < nproducts; ++i)
        products.add_row({{"K", Value(pick(0, 40))}, {"Price", Value(pick(1, 400) / 4.0)}});
    int nitems = pick(0, 500);
    for (int i = 0; i < nitems; ++i) {
        if (pick(0, 9) == 0)
            items.add_row({{"Qty", Value(pick(0, 20) / 2.0)}});
        else
            items.add_row({{"K", Value(pick(0, 50))}, {"Qty", Value(pick(0, 20) / 2.0)}});
    }

    Column& link = schema.create_column("P", items, products);
    schema.define_link(link, {&pk}, {schema.resolve_path(items, "K")});
    Column& amount = schema.create_column("Amount", items, schema.primitive(PrimType::Float));
    schema.define_calculate(amount, "Qty * P.Price");
    Column& banded = schema.create_column("Banded", items, schema.primitive(PrimType::Integer));
    schema.define_calculate(banded, "K % 7 + K / 3");
    Column& total = schema.create_column("Total", products, schema.primitive(PrimType::Float));
    schema.define_accumulate(total, schema.resolve_path(items, "P"), "out + Amount", Value(0.0));

    Table& flt = schema.create_table("Pricey", TableKind::Product);
    Column& dim = schema.create_column("Product", flt, products, ColumnKind::ProductAttribute);
    schema.define_product(flt, {&dim},
                          std::optional<std::string>("Product.Price >= 25.0"));
    return schema;
}

} // namespace

TEST_SUITE_BEGIN("parallel");

TEST_CASE("parallel evaluation reproduces the serial reference bit for bit") {
    for (unsigned seed = 1; seed <= 12; ++seed) {
        CAPTURE(seed);
        Schema serial_schema = build_random_schema(seed);
        Schema parallel_schema = build_random_schema(seed);
        EvalOptions serial;
        serial.parallel = false;
        EvalOptions parallel;
        parallel.parallel = true;
        evaluate_all(serial_schema, serial);
        evaluate_all(parallel_schema, parallel);
        CHECK(snapshot(serial_schema) == snapshot(parallel_schema));
    }
}

TEST_CASE("kernel counters agree between backends") {
    Schema a = build_random_schema(99);
    Schema b = build_random_schema(99);
    EvalOptions serial;
    serial.parallel = false;
    EvalReport ra = evaluate_all(a, serial);
    EvalReport rb = evaluate_all(b);
    REQUIRE(ra.nodes.size() == rb.nodes.size());
    for (std::size_t i = 0; i < ra.nodes.size(); ++i) {
        CHECK(ra.nodes[i].name == rb.nodes[i].name);
        CHECK(ra.nodes[i].rows == rb.nodes[i].rows);
        CHECK(ra.nodes[i].nulls == rb.nodes[i].nulls);
        CHECK(ra.nodes[i].skipped == rb.nodes[i].skipped);
    }
}

TEST_CASE("both backends report the same failing row") {
    auto build = [] {
        Schema schema;
        Table& t = schema.create_table("T", TableKind::Primary);
        schema.create_column("N", t, schema.primitive(PrimType::Integer));
        Column& bad = schema.create_column("Bad", t, schema.primitive(PrimType::Integer));
        schema.define_calculate(bad, "10 / N");
        for (int i = 0; i < 200; ++i)
            t.add_row({{"N", Value(i % 31 == 17 ? 0 : i + 1)}});
        return schema;
    };
    auto message = [](Schema schema, bool parallel) {
        EvalOptions options;
        options.parallel = parallel;
        try {
            evaluate_all(schema, options);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    std::string serial_msg = message(build(), false);
    std::string parallel_msg = message(build(), true);
    CHECK(!serial_msg.empty());
    CHECK(serial_msg == parallel_msg);
    CHECK(serial_msg.find("row 17") != std::string::npos);
}

TEST_CASE("strict link ambiguity raises identically in both backends") {
    auto build = [] {
        Schema schema;
        Table& items = schema.create_table("Items", TableKind::Primary);
        Table& products = schema.create_table("Products", TableKind::Primary);
        schema.create_column("K", items, schema.primitive(PrimType::Integer));
        Column& pk = schema.create_column("K", products, schema.primitive(PrimType::Integer));
        Column& link = schema.create_column("P", items, products);
        schema.define_link(link, {&pk}, {schema.resolve_path(items, "K")});
        products.add_row({{"K", Value(7)}});
        products.add_row({{"K", Value(7)}});
        items.add_row({{"K", Value(1)}});
        items.add_row({{"K", Value(7)}});
        return schema;
    };
    for (bool parallel : {false, true}) {
        Schema schema = build();
        EvalOptions options;
        options.parallel = parallel;
        options.strict_links = true;
        CHECK(thrown([&] { evaluate_all(schema, options); }) == Errc::AmbiguousLink);
    }
}

TEST_CASE("multi-dimension products agree across backends") {
    for (unsigned seed : {3u, 4u}) {
        auto build = [seed] {
            std::mt19937 rng(seed);
            Schema schema;
            Table& a = schema.create_table("A", TableKind::Primary);
            Table& b = schema.create_table("B", TableKind::Primary);
            Table& c = schema.create_table("C", TableKind::Primary);
            schema.create_column("V", a, schema.primitive(PrimType::Integer));
            schema.create_column("V", b, schema.primitive(PrimType::Integer));
            schema.create_column("V", c, schema.primitive(PrimType::Integer));
            for (Table* t : {&a, &b, &c}) {
                int n = std::uniform_int_distribution<int>(0, 12)(rng);
                for (int i = 0; i < n; ++i)
                    t->add_row({{"V", Value(i)}});
            }
            Table& cube = schema.create_table("Cube", TableKind::Product);
            Column& da = schema.create_column("DA", cube, a, ColumnKind::ProductAttribute);
            Column& db = schema.create_column("DB", cube, b, ColumnKind::ProductAttribute);
            Column& dc = schema.create_column("DC", cube, c, ColumnKind::ProductAttribute);
            schema.define_product(cube, {&da, &db, &dc},
                                  std::optional<std::string>("(DA.V + DB.V + DC.V) % 3 == 0"));
            return schema;
        };
        Schema serial_schema = build();
        Schema parallel_schema = build();
        EvalOptions serial;
        serial.parallel = false;
        evaluate_all(serial_schema, serial);
        evaluate_all(parallel_schema);
        CHECK(snapshot(serial_schema) == snapshot(parallel_schema));
    }
}

TEST_SUITE_END();
