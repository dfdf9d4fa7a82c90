#include "funcol/kernels.hpp"

#include "kernel_support.hpp"

// Straight-line reference kernels. The OpenMP variants in
// kernels_parallel.cpp must produce byte-identical column data.

namespace funcol::kernels {

using detail::KeyTuple;
using detail::LinkIndex;

namespace detail {

LinkIndex build_link_index(const std::vector<Column*>& output_keys, const Table& target) {
    LinkIndex index;
    for (RowId y : target.rows()) {
        KeyTuple key;
        key.parts.reserve(output_keys.size());
        bool usable = true;
        for (Column* k : output_keys) {
            Value v = k->get(y);
            if (v.is_null()) {
                usable = false;
                break;
            }
            key.parts.push_back(std::move(v));
        }
        if (!usable)
            continue;
        auto [it, inserted] = index.try_emplace(std::move(key), LinkIndexEntry{y, 1});
        if (!inserted)
            ++it->second.count;
    }
    return index;
}

} // namespace detail

NodeStats calculate_serial(Column& column) {
    const CalculateDef& def = *column.calculate_def();
    NodeStats stats;
    std::vector<Value> slots(def.params.size());
    for (RowId row : column.input().rows()) {
        try {
            for (std::size_t i = 0; i < def.params.size(); ++i)
                slots[i] = read_path(def.params[i], row);
            Value out = detail::evaluate_definition(def.expr, def.native, Bindings{slots});
            out = adapt_for_output(out, column.output());
            if (out.is_null())
                ++stats.nulls;
            column.eval_store(row, std::move(out));
            ++stats.rows;
        } catch (const Error& e) {
            detail::rethrow_as_eval_error("calculate '" + column.qualified_name() + "'", row, e);
        }
    }
    return stats;
}

NodeStats link_serial(Column& column, bool strict) {
    const LinkDef& def = *column.link_def();
    LinkIndex index = detail::build_link_index(def.output_keys, column.output());
    NodeStats stats;
    for (RowId row : column.input().rows()) {
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
                ++stats.skipped; // miss
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
            ++stats.nulls;
        column.eval_store(row, std::move(out));
        ++stats.rows;
    }
    return stats;
}

namespace {

// Row-major enumeration state over per-dimension live-row lists; the last
// dimension varies fastest.
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

bool predicate_keeps(const ProductDef& def, const Enumeration& en,
                     const std::vector<std::size_t>& idx, std::vector<Value>& slots) {
    for (std::size_t s = 0; s < def.predicate_params.size(); ++s) {
        const auto& param = def.predicate_params[s];
        RowId source_row = en.axis_rows[param.dimension][idx[param.dimension]];
        if (param.tail.empty())
            slots[s] = Value(RowRef{&def.dimensions[param.dimension]->output(), source_row});
        else
            slots[s] = read_path(param.tail, source_row);
    }
    Value v = detail::evaluate_definition(def.predicate, def.native_predicate, Bindings{slots});
    return v.kind() == Value::Kind::Boolean && v.as_bool(); // NULL and false drop
}

void emit_combination(const ProductDef& def, const Enumeration& en,
                      const std::vector<std::size_t>& idx, RowId row) {
    for (std::size_t d = 0; d < def.dimensions.size(); ++d) {
        RowRef ref{&def.dimensions[d]->output(), en.axis_rows[d][idx[d]]};
        def.dimensions[d]->eval_store(row, Value(ref));
    }
}

} // namespace

NodeStats product_serial(Table& table) {
    const ProductDef& def = *table.product_def();
    Enumeration en(def);
    NodeStats stats;

    if (!def.predicate && !def.native_predicate) {
        RowId base = table.replace_population(en.total);
        std::vector<std::size_t> idx(def.dimensions.size());
        for (std::uint64_t rank = 0; rank < en.total; ++rank) {
            en.decode(rank, idx);
            emit_combination(def, en, idx, base + rank);
        }
        stats.rows = en.total;
        return stats;
    }

    std::vector<char> keep(en.total, 0);
    std::uint64_t retained = 0;
    {
        std::vector<std::size_t> idx(def.dimensions.size());
        std::vector<Value> slots(def.predicate_params.size());
        for (std::uint64_t rank = 0; rank < en.total; ++rank) {
            en.decode(rank, idx);
            try {
                keep[rank] = predicate_keeps(def, en, idx, slots);
            } catch (const Error& e) {
                detail::rethrow_as_eval_error("product '" + table.name() + "' combination", rank,
                                              e);
            }
            retained += keep[rank];
        }
    }

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

NodeStats accumulate_run(Column& column) {
    const AccumulateDef& def = *column.accumulate_def();
    NodeStats stats;

    // Every group starts at the initial value, including empty groups.
    for (RowId row : column.input().rows())
        column.eval_store(row, def.initial);

    // Fold facts in population order; the order is part of the contract.
    std::vector<Value> slots(def.fact_params.size());
    for (RowId fact : def.group.input().rows()) {
        try {
            Value target = read_path(def.group, fact);
            if (target.is_null()) {
                ++stats.skipped;
                continue;
            }
            RowId group_row = target.as_ref().row;
            if (!column.input().is_live(group_row)) {
                ++stats.skipped;
                continue;
            }
            for (std::size_t i = 0; i < def.fact_params.size(); ++i)
                slots[i] = read_path(def.fact_params[i], fact);
            Value current = column.get(group_row);
            Value next = detail::evaluate_definition(def.update, def.native,
                                                     Bindings{slots, &current});
            if (next.is_null()) {
                ++stats.skipped; // NULL update leaves the value unchanged
                continue;
            }
            column.eval_store(group_row, adapt_for_output(next, column.output()));
            ++stats.rows;
        } catch (const Error& e) {
            detail::rethrow_as_eval_error("accumulate '" + column.qualified_name() + "'", fact, e);
        }
    }
    return stats;
}

NodeStats project_run(Column& column) {
    const ProjectDef& def = *column.project_def();
    Table& target = column.output();
    NodeStats stats;

    std::vector<RowId> inputs = column.input().rows();
    // -1 marks a NULL-keyed input; otherwise the index of its key tuple in
    // first-occurrence order.
    std::vector<std::int64_t> key_of(inputs.size(), -1);
    std::vector<KeyTuple> uniques;
    std::unordered_map<KeyTuple, std::size_t, detail::KeyTupleHash> seen;

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        KeyTuple key;
        key.parts.reserve(def.input_keys.size());
        bool complete = true;
        for (const ColumnPath& p : def.input_keys) {
            Value v = read_path(p, inputs[i]);
            if (v.is_null()) {
                complete = false;
                break;
            }
            key.parts.push_back(std::move(v));
        }
        if (!complete) {
            ++stats.skipped;
            continue;
        }
        auto [it, inserted] = seen.try_emplace(key, uniques.size());
        if (inserted)
            uniques.push_back(std::move(key));
        key_of[i] = static_cast<std::int64_t>(it->second);
    }

    RowId base = target.replace_population(uniques.size());
    for (std::size_t u = 0; u < uniques.size(); ++u)
        for (std::size_t k = 0; k < def.output_keys.size(); ++k)
            def.output_keys[k]->eval_store(base + u, uniques[u].parts[k]);

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Value out;
        if (key_of[i] >= 0)
            out = Value(RowRef{&target, base + static_cast<RowId>(key_of[i])});
        else
            ++stats.nulls;
        column.eval_store(inputs[i], std::move(out));
    }
    stats.rows = uniques.size();
    return stats;
}

} // namespace funcol::kernels
