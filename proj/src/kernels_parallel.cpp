#include <omp.h>

#include "funcol/kernels.hpp"
#include "kernel_support.hpp"

// OpenMP kernels for the row-independent derivation kinds. Rows write
// disjoint slots, reads are over clean prerequisites, so the result is
// identical to the serial reference; errors are reported for the smallest
// failing row, which is what the serial loop reports too.

namespace funcol::kernels {

using detail::ErrorSlot;
using detail::KeyTuple;
using detail::LinkIndex;

namespace {

// Pre-sizes the dense storage so concurrent eval_store calls never resize.
void reserve_slots(Column& column, const std::vector<RowId>& rows) {
    if (!rows.empty())
        column.eval_store(rows.back(), Value{});
}

} // namespace

NodeStats calculate_parallel(Column& column) {
    const CalculateDef& def = *column.calculate_def();
    const std::vector<RowId> rows = column.input().rows();
    reserve_slots(column, rows);

    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    std::uint64_t nulls = 0;
    ErrorSlot first_error;

#pragma omp parallel
    {
        std::vector<Value> slots(def.params.size());
#pragma omp for schedule(static) reduction(+ : nulls)
        for (std::int64_t i = 0; i < n; ++i) {
            RowId row = rows[static_cast<std::size_t>(i)];
            try {
                for (std::size_t p = 0; p < def.params.size(); ++p)
                    slots[p] = read_path(def.params[p], row);
                Value out = detail::evaluate_definition(def.expr, def.native, Bindings{slots});
                out = adapt_for_output(out, column.output());
                if (out.is_null())
                    ++nulls;
                column.eval_store(row, std::move(out));
            } catch (const Error& e) {
                first_error.offer(row, e);
            }
        }
    }
    if (first_error.armed())
        detail::rethrow_as_eval_error("calculate '" + column.qualified_name() + "'",
                                      first_error.row(), first_error.error());
    NodeStats stats;
    stats.rows = rows.size();
    stats.nulls = nulls;
    return stats;
}

NodeStats link_parallel(Column& column, bool strict) {
    const LinkDef& def = *column.link_def();
    const LinkIndex index = detail::build_link_index(def.output_keys, column.output());
    const std::vector<RowId> rows = column.input().rows();
    reserve_slots(column, rows);

    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    std::uint64_t nulls = 0, misses = 0;
    ErrorSlot first_error;

#pragma omp parallel for schedule(static) reduction(+ : nulls, misses)
    for (std::int64_t i = 0; i < n; ++i) {
        RowId row = rows[static_cast<std::size_t>(i)];
        try {
            KeyTuple key;
            key.parts.reserve(def.input_keys.size());
            bool complete = true;
            for (const ColumnPath& p : def.input_keys) {
                Value v = read_path(p, row);
                if (v.is_null()) {
                    complete = false;
                    break;
                }
                key.parts.push_back(std::move(v));
            }
            Value out;
            if (complete) {
                auto it = index.find(key);
                if (it == index.end()) {
                    ++misses;
                } else {
                    if (strict && it->second.count > 1)
                        throw Error(Errc::AmbiguousLink,
                                    "link '" + column.qualified_name() + "' row " +
                                        std::to_string(row) + " matches " +
                                        std::to_string(it->second.count) + " rows of '" +
                                        column.output().name() + "'");
                    out = Value(RowRef{&column.output(), it->second.first});
                }
            }
            if (out.is_null())
                ++nulls;
            column.eval_store(row, std::move(out));
        } catch (const Error& e) {
            first_error.offer(row, e);
        }
    }
    first_error.rethrow_if_armed();

    NodeStats stats;
    stats.rows = rows.size();
    stats.nulls = nulls;
    stats.skipped = misses;
    return stats;
}

namespace {

struct Enumeration {
    std::vector<std::vector<RowId>> axis_rows;
    std::uint64_t total = 1;

    explicit Enumeration(const ProductDef& def) {
        for (Column* dim : def.dimensions) {
            axis_rows.push_back(dim->output().rows());
            total *= axis_rows.back().size();
        }
    }

    void decode(std::uint64_t rank, std::vector<std::size_t>& idx) const {
        for (std::size_t d = axis_rows.size(); d-- > 0;) {
            idx[d] = rank % axis_rows[d].size();
            rank /= axis_rows[d].size();
        }
    }
};

void emit_combination(const ProductDef& def, const Enumeration& en,
                      const std::vector<std::size_t>& idx, RowId row) {
    for (std::size_t d = 0; d < def.dimensions.size(); ++d) {
        RowRef ref{&def.dimensions[d]->output(), en.axis_rows[d][idx[d]]};
        def.dimensions[d]->eval_store(row, Value(ref));
    }
}

void reserve_dimension_slots(const ProductDef& def, Table& table) {
    if (table.row_count() == 0)
        return;
    RowId last = table.end_ordinal() - 1;
    for (Column* dim : def.dimensions)
        dim->eval_store(last, Value{});
}

} // namespace

NodeStats product_parallel(Table& table) {
    const ProductDef& def = *table.product_def();
    Enumeration en(def);
    NodeStats stats;

    if (!def.predicate && !def.native_predicate) {
        RowId base = table.replace_population(en.total);
        reserve_dimension_slots(def, table);
        const std::int64_t n = static_cast<std::int64_t>(en.total);
#pragma omp parallel
        {
            std::vector<std::size_t> idx(def.dimensions.size());
#pragma omp for schedule(static)
            for (std::int64_t rank = 0; rank < n; ++rank) {
                en.decode(static_cast<std::uint64_t>(rank), idx);
                emit_combination(def, en, idx, base + static_cast<RowId>(rank));
            }
        }
        stats.rows = en.total;
        return stats;
    }

    // Pass 1: evaluate the predicate over the rank space in parallel.
    std::vector<char> keep(en.total, 0);
    std::uint64_t retained = 0;
    ErrorSlot first_error;
    const std::int64_t n = static_cast<std::int64_t>(en.total);
#pragma omp parallel
    {
        std::vector<std::size_t> idx(def.dimensions.size());
        std::vector<Value> slots(def.predicate_params.size());
#pragma omp for schedule(static) reduction(+ : retained)
        for (std::int64_t rank = 0; rank < n; ++rank) {
            en.decode(static_cast<std::uint64_t>(rank), idx);
            try {
                for (std::size_t s = 0; s < def.predicate_params.size(); ++s) {
                    const auto& param = def.predicate_params[s];
                    RowId source_row = en.axis_rows[param.dimension][idx[param.dimension]];
                    if (param.tail.empty())
                        slots[s] = Value(
                            RowRef{&def.dimensions[param.dimension]->output(), source_row});
                    else
                        slots[s] = read_path(param.tail, source_row);
                }
                Value v = detail::evaluate_definition(def.predicate, def.native_predicate,
                                                      Bindings{slots});
                char k = v.kind() == Value::Kind::Boolean && v.as_bool();
                keep[static_cast<std::size_t>(rank)] = k;
                retained += static_cast<std::uint64_t>(k);
            } catch (const Error& e) {
                first_error.offer(static_cast<RowId>(rank), e);
            }
        }
    }
    if (first_error.armed())
        detail::rethrow_as_eval_error("product '" + table.name() + "' combination",
                                      first_error.row(), first_error.error());

    // Pass 2: emit retained combinations in canonical (rank) order.
    RowId base = table.replace_population(retained);
    std::vector<std::size_t> idx(def.dimensions.size());
    RowId row = base;
    for (std::uint64_t rank = 0; rank < en.total; ++rank) {
        if (!keep[rank])
            continue;
        en.decode(rank, idx);
        emit_combination(def, en, idx, row++);
    }
    stats.rows = retained;
    stats.skipped = en.total - retained;
    return stats;
}

} // namespace funcol::kernels
