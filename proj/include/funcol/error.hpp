#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace funcol {

enum class Errc {
    // naming / registration
    DuplicateName,
    ReservedName,
    UnknownTable,
    UnknownColumn,
    UnknownRow,
    // storage writes
    NotPrimaryTable,
    TypeMismatch,
    DerivedColumnWrite,
    // formula front end
    LexError,
    ParseError,
    // expression evaluation
    DivideByZero,
    UnboundPath,
    // definitions
    UnresolvedPath,
    TypeError,
    KeyArityMismatch,
    GroupPathError,
    MissingAccumulator,
    NoDimensions,
    NotProjectedTable,
    // evaluation
    AmbiguousLink,
    CycleError,
    EvalError,
    // io
    HeaderMismatch,
    IoError,
    SchemaError,
};

std::string_view errc_name(Errc code);

/// Single exception type for the whole engine; the code tells callers what
/// went wrong, the message tells humans where.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace funcol
