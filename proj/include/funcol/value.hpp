#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>

#include "funcol/error.hpp"

namespace funcol {

class Table;

/// Row identity: a table-scoped ordinal, monotonically increasing, never reused.
using RowId = std::uint64_t;

struct RowRef {
    const Table* table = nullptr;
    RowId row = 0;

    friend bool operator==(const RowRef&, const RowRef&) = default;
};

enum class PrimType { Integer, Float, Text, Boolean };

std::string_view prim_name(PrimType t);

/// A single datum: primitive, row reference, or NULL (the empty tuple).
class Value {
public:
    enum class Kind { Null, Integer, Float, Text, Boolean, Ref };

    Value() = default;
    Value(std::int64_t v) : v_(v) {}
    Value(int v) : v_(static_cast<std::int64_t>(v)) {}
    Value(double v) : v_(v) {}
    Value(bool v) : v_(v) {}
    Value(std::string v) : v_(std::move(v)) {}
    Value(const char* v) : v_(std::string(v)) {}
    Value(RowRef v) : v_(v) {}

    Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
    bool is_null() const noexcept { return kind() == Kind::Null; }

    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_float() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }
    RowRef as_ref() const { return std::get<RowRef>(v_); }

    bool is_numeric() const noexcept {
        return kind() == Kind::Integer || kind() == Kind::Float;
    }
    /// Numeric reading with Integer -> Float promotion.
    double numeric() const {
        return kind() == Kind::Integer ? static_cast<double>(as_int()) : as_float();
    }

private:
    std::variant<std::monostate, std::int64_t, double, std::string, bool, RowRef> v_;
};

/// Equality as used by column storage, de-projection and link matching:
/// exact per kind, bitwise for floats (no epsilon), NULL equal only to NULL.
/// Distinct kinds never compare equal.
bool storage_equal(const Value& a, const Value& b);
std::size_t storage_hash(const Value& v);

std::string_view kind_name(Value::Kind k);

} // namespace funcol
