// Serial reference vs OpenMP kernels over the row-independent derivation
// kinds. Schemas are built once per benchmark; each iteration re-runs just
// the kernel. Control the thread count with OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "funcol/engine.hpp"
#include "funcol/kernels.hpp"

using namespace funcol;

namespace {

struct CalcBench {
    std::unique_ptr<Schema> schema;
    Column* amount;

    explicit CalcBench(std::int64_t rows) : schema(std::make_unique<Schema>()) {
        std::mt19937 rng(9);
        Table& items = schema->create_table("Items", TableKind::Primary);
        schema->create_column("Quantity", items, schema->primitive(PrimType::Float));
        schema->create_column("Price", items, schema->primitive(PrimType::Float));
        schema->create_column("Tax", items, schema->primitive(PrimType::Float));
        for (std::int64_t i = 0; i < rows; ++i)
            items.add_row({{"Quantity", Value(rng() % 100 / 4.0)},
                           {"Price", Value(rng() % 4000 / 8.0)},
                           {"Tax", Value(rng() % 25 / 100.0)}});
        amount = &schema->create_column("Amount", items, schema->primitive(PrimType::Float));
        schema->define_calculate(*amount, "Quantity * Price * (1.0 + Tax) - Quantity / 2.0");
    }
};

struct LinkBench {
    std::unique_ptr<Schema> schema;
    Column* link;

    LinkBench(std::int64_t items_n, std::int64_t products_n)
        : schema(std::make_unique<Schema>()) {
        std::mt19937 rng(10);
        Table& items = schema->create_table("Items", TableKind::Primary);
        Table& products = schema->create_table("Products", TableKind::Primary);
        schema->create_column("K", items, schema->primitive(PrimType::Integer));
        Column& pk = schema->create_column("K", products, schema->primitive(PrimType::Integer));
        for (std::int64_t j = 0; j < products_n; ++j)
            products.add_row({{"K", Value(static_cast<std::int64_t>(j))}});
        for (std::int64_t i = 0; i < items_n; ++i)
            items.add_row(
                {{"K", Value(static_cast<std::int64_t>(rng() % (products_n + products_n / 8 + 1)))}});
        link = &schema->create_column("P", items, products);
        schema->define_link(*link, {&pk}, {schema->resolve_path(items, "K")});
    }
};

struct FilterBench {
    std::unique_ptr<Schema> schema;
    Table* filtered;

    explicit FilterBench(std::int64_t rows) : schema(std::make_unique<Schema>()) {
        std::mt19937 rng(11);
        Table& src = schema->create_table("Src", TableKind::Primary);
        schema->create_column("V", src, schema->primitive(PrimType::Float));
        for (std::int64_t i = 0; i < rows; ++i)
            src.add_row({{"V", Value(rng() % 10000 / 10.0)}});
        filtered = &schema->create_table("Kept", TableKind::Product);
        Column& dim = schema->create_column("S", *filtered, src, ColumnKind::ProductAttribute);
        schema->define_product(*filtered, {&dim},
                               std::optional<std::string>("S.V < 500.0 || S.V > 900.0"));
    }
};

void bm_calculate_serial(benchmark::State& state) {
    CalcBench fx(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::calculate_serial(*fx.amount));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_calculate_parallel(benchmark::State& state) {
    CalcBench fx(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::calculate_parallel(*fx.amount));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_link_serial(benchmark::State& state) {
    LinkBench fx(state.range(0), state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::link_serial(*fx.link, false));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_link_parallel(benchmark::State& state) {
    LinkBench fx(state.range(0), state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::link_parallel(*fx.link, false));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_filter_serial(benchmark::State& state) {
    FilterBench fx(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::product_serial(*fx.filtered));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_filter_parallel(benchmark::State& state) {
    FilterBench fx(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::product_parallel(*fx.filtered));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(bm_calculate_serial)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(bm_calculate_parallel)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(bm_link_serial)->Args({1 << 14, 1 << 10})->Args({1 << 18, 1 << 12});
BENCHMARK(bm_link_parallel)->Args({1 << 14, 1 << 10})->Args({1 << 18, 1 << 12});
BENCHMARK(bm_filter_serial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(bm_filter_parallel)->Arg(1 << 14)->Arg(1 << 18);

BENCHMARK_MAIN();
