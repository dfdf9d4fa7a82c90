#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "funcol/value.hpp"

namespace funcol {

// ---------------------------------------------------------------------------
// Tokens

enum class TokKind { Number, String, Ident, Op, Punct };

struct Token {
    TokKind kind;
    std::string_view text; // slice of the source
    std::size_t pos;       // byte offset
};

/// Maximal-munch tokenizer. Throws Error(LexError) with the byte offset for
/// unterminated strings, bad escapes and illegal characters.
std::vector<Token> tokenize(std::string_view source);

// ---------------------------------------------------------------------------
// AST

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view op_text(UnOp op);
std::string_view op_text(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind { Literal, Path, Accumulator, Unary, Binary };

    Kind kind;
    std::size_t pos = 0;

    Value literal;                  // Literal
    std::vector<std::string> path;  // Path: dotted identifier segments
    int slot = -1;                  // Path: binding slot, set at resolution time
    UnOp un{};                      // Unary
    BinOp bin{};                    // Binary
    ExprPtr lhs, rhs;               // Unary uses lhs only
};

/// Parses the formula DSL. Precedence, highest to lowest:
/// unary - !; * / %; + -; == != < <= > >=; &&; ||. Binaries are
/// left-associative; parentheses override. `out` names the accumulator;
/// `true`/`false` are boolean literals. Throws Error(ParseError).
ExprPtr parse_expr(std::string_view source);

/// Fully parenthesized rendering; parse_expr(print_expr(e)) reproduces e.
std::string print_expr(const Expr& e);

/// Structural equality, ignoring positions and binding slots.
bool expr_equal(const Expr& a, const Expr& b);

bool contains_accumulator(const Expr& e);

/// Visits every Path node (mutable, so resolution can assign slots).
void visit_paths(Expr& e, const std::function<void(Expr&)>& fn);
void visit_paths(const Expr& e, const std::function<void(const Expr&)>& fn);

// ---------------------------------------------------------------------------
// Evaluation

/// Per-row inputs for one evaluation: resolved path slots plus the optional
/// accumulator (`out`).
struct Bindings {
    std::span<const Value> slots;
    const Value* accumulator = nullptr;
};

/// Pure row-wise interpreter. NULL propagates through arithmetic and
/// comparisons; && and || are three-valued (NULL && false == false,
/// NULL || true == true, otherwise NULL) and short-circuit left to right.
/// Integer / or % by zero throws DivideByZero; float division follows IEEE.
Value eval_expr(const Expr& e, const Bindings& bindings);

/// User-supplied single-row evaluator, accepted wherever a formula is.
using RowEvaluator = std::function<Value(const Bindings&)>;

// ---------------------------------------------------------------------------
// Static types

enum class StaticType { Integer, Float, Text, Boolean, Row };

std::string_view static_type_name(StaticType t);

/// Infers the result type, consulting `path_type` for Path nodes. Throws
/// Error(TypeError) on operand type misuse (e.g. arithmetic on Text,
/// ordering on non-numerics, logic on non-booleans). `accumulator_type`
/// must be set when the expression may contain `out`.
StaticType infer_type(const Expr& e,
                      const std::function<StaticType(const Expr&)>& path_type,
                      std::optional<StaticType> accumulator_type = std::nullopt);

} // namespace funcol
