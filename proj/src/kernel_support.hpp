#pragma once

// Shared machinery for the serial and OpenMP evaluation kernels.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "funcol/error.hpp"
#include "funcol/expr.hpp"
#include "funcol/schema.hpp"

namespace funcol::kernels::detail {

// Key tuples for link/project matching, under storage equality.
struct KeyTuple {
    std::vector<Value> parts;

    friend bool operator==(const KeyTuple& a, const KeyTuple& b) {
        if (a.parts.size() != b.parts.size())
            return false;
        for (std::size_t i = 0; i < a.parts.size(); ++i)
            if (!storage_equal(a.parts[i], b.parts[i]))
                return false;
        return true;
    }
};

struct KeyTupleHash {
    std::size_t operator()(const KeyTuple& k) const {
        std::size_t seed = k.parts.size();
        for (const Value& v : k.parts)
            seed ^= storage_hash(v) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
        return seed;
    }
};

struct LinkIndexEntry {
    RowId first;         // smallest matching ordinal
    std::uint32_t count; // matches seen, for strict mode
};

using LinkIndex = std::unordered_map<KeyTuple, LinkIndexEntry, KeyTupleHash>;

// Index over the live rows of the link target; rows with a NULL key
// component can never match and are left out.
LinkIndex build_link_index(const std::vector<Column*>& output_keys, const Table& target);

inline Value evaluate_definition(const ExprPtr& expr, const RowEvaluator& native,
                                 const Bindings& bindings) {
    return expr ? eval_expr(*expr, bindings) : native(bindings);
}

[[noreturn]] inline void rethrow_as_eval_error(const std::string& where, RowId row,
                                               const Error& cause) {
    if (cause.code() == Errc::EvalError)
        throw cause;
    throw Error(Errc::EvalError,
                where + " row " + std::to_string(row) + ": " + cause.what());
}

// First-error capture for parallel loops: the smallest row wins, matching
// what the serial kernels report.
class ErrorSlot {
public:
    bool armed() const noexcept { return armed_; }

    void offer(RowId row, const Error& e) {
#pragma omp critical(funcol_error_slot)
        {
            if (!armed_ || row < row_) {
                row_ = row;
                error_ = e;
                armed_ = true;
            }
        }
    }

    void rethrow_if_armed() const {
        if (armed_)
            throw error_;
    }

    RowId row() const noexcept { return row_; }
    const Error& error() const noexcept { return error_; }

private:
    bool armed_ = false;
    RowId row_ = 0;
    Error error_{Errc::EvalError, ""};
};

} // namespace funcol::kernels::detail
