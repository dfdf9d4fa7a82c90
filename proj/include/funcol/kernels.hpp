#pragma once

#include <cstdint>

#include "funcol/schema.hpp"

namespace funcol::kernels {

struct NodeStats {
    std::uint64_t rows = 0;    // outputs produced / rows retained
    std::uint64_t nulls = 0;   // NULL outputs
    std::uint64_t skipped = 0; // link misses, NULL-group facts, dropped combinations
};

// Serial reference implementations. These are the semantic baseline the
// OpenMP kernels are tested against.
NodeStats calculate_serial(Column& column);
NodeStats link_serial(Column& column, bool strict);
NodeStats product_serial(Table& table);

// OpenMP row-parallel kernels. Output is identical to the serial kernels,
// including which error is reported (smallest failing row wins).
NodeStats calculate_parallel(Column& column);
NodeStats link_parallel(Column& column, bool strict);
NodeStats product_parallel(Table& table);

// Inherently ordered: the fold order of accumulate and the first-occurrence
// order of projection are part of the contract.
NodeStats accumulate_run(Column& column);
NodeStats project_run(Column& column);

} // namespace funcol::kernels
