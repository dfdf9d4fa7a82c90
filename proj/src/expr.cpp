#include "funcol/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "funcol/error.hpp"

namespace funcol {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

} // namespace

std::string_view op_text(UnOp op) {
    switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::Not: return "!";
    }
    return "?";
}

std::string_view op_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_digit(c)) {
            ++i;
            while (i < n && is_digit(src[i])) ++i;
            if (i + 1 < n && src[i] == '.' && is_digit(src[i + 1])) {
                ++i;
                while (i < n && is_digit(src[i])) ++i;
            }
            out.push_back({TokKind::Number, src.substr(start, i - start), start});
            continue;
        }
        if (is_ident_start(c)) {
            ++i;
            while (i < n && is_ident_char(src[i])) ++i;
            out.push_back({TokKind::Ident, src.substr(start, i - start), start});
            continue;
        }
        if (c == '"') {
            ++i;
            while (true) {
                if (i >= n)
                    throw Error(Errc::LexError,
                                "unterminated string at offset " + std::to_string(start));
                if (src[i] == '\\') {
                    if (i + 1 >= n)
                        throw Error(Errc::LexError,
                                    "unterminated string at offset " + std::to_string(start));
                    char esc = src[i + 1];
                    if (esc != '"' && esc != '\\' && esc != 'n' && esc != 't' && esc != 'r')
                        throw Error(Errc::LexError,
                                    "bad escape at offset " + std::to_string(i));
                    i += 2;
                    continue;
                }
                if (src[i] == '"') {
                    ++i;
                    break;
                }
                ++i;
            }
            out.push_back({TokKind::String, src.substr(start, i - start), start});
            continue;
        }
        // two-character operators first
        if (i + 1 < n) {
            std::string_view two = src.substr(i, 2);
            if (two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "&&" ||
                two == "||") {
                out.push_back({TokKind::Op, two, start});
                i += 2;
                continue;
            }
        }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '%' || c == '<' || c == '>' ||
            c == '!') {
            out.push_back({TokKind::Op, src.substr(i, 1), start});
            ++i;
            continue;
        }
        if (c == '(' || c == ')' || c == '.' || c == ',') {
            out.push_back({TokKind::Punct, src.substr(i, 1), start});
            ++i;
            continue;
        }
        throw Error(Errc::LexError, "illegal character '" + std::string(1, c) + "' at offset " +
                                        std::to_string(i));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parser (precedence climbing)

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), toks_(tokenize(src)) {}

    ExprPtr run() {
        ExprPtr e = parse_or();
        if (pos_ < toks_.size())
            fail(toks_[pos_].pos, "end of input");
        return e;
    }

private:
    [[noreturn]] void fail(std::size_t offset, const std::string& expected) const {
        throw Error(Errc::ParseError,
                    "expected " + expected + " at offset " + std::to_string(offset));
    }

    const Token* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }

    bool at_op(std::string_view text) const {
        const Token* t = peek();
        return t && t->kind == TokKind::Op && t->text == text;
    }
    bool at_punct(char c) const {
        const Token* t = peek();
        return t && t->kind == TokKind::Punct && t->text.size() == 1 && t->text[0] == c;
    }

    Token take() { return toks_[pos_++]; }

    static ExprPtr make(Expr::Kind kind, std::size_t pos) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->pos = pos;
        return e;
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (at_op("||")) {
            std::size_t p = take().pos;
            ExprPtr rhs = parse_and();
            lhs = binary(BinOp::Or, p, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_cmp();
        while (at_op("&&")) {
            std::size_t p = take().pos;
            ExprPtr rhs = parse_cmp();
            lhs = binary(BinOp::And, p, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_add();
        while (true) {
            BinOp op;
            if (at_op("==")) op = BinOp::Eq;
            else if (at_op("!=")) op = BinOp::Ne;
            else if (at_op("<=")) op = BinOp::Le;
            else if (at_op(">=")) op = BinOp::Ge;
            else if (at_op("<")) op = BinOp::Lt;
            else if (at_op(">")) op = BinOp::Gt;
            else break;
            std::size_t p = take().pos;
            ExprPtr rhs = parse_add();
            lhs = binary(op, p, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        while (at_op("+") || at_op("-")) {
            Token t = take();
            BinOp op = t.text == "+" ? BinOp::Add : BinOp::Sub;
            ExprPtr rhs = parse_mul();
            lhs = binary(op, t.pos, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        while (at_op("*") || at_op("/") || at_op("%")) {
            Token t = take();
            BinOp op = t.text == "*" ? BinOp::Mul : t.text == "/" ? BinOp::Div : BinOp::Mod;
            ExprPtr rhs = parse_unary();
            lhs = binary(op, t.pos, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at_op("-") || at_op("!")) {
            Token t = take();
            ExprPtr operand = parse_unary();
            ExprPtr e = make(Expr::Kind::Unary, t.pos);
            e->un = t.text == "-" ? UnOp::Neg : UnOp::Not;
            e->lhs = std::move(operand);
            return e;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token* t = peek();
        if (!t)
            fail(src_.size(), "an operand");
        if (t->kind == TokKind::Number)
            return number(take());
        if (t->kind == TokKind::String)
            return string_literal(take());
        if (t->kind == TokKind::Ident) {
            if (t->text == "true" || t->text == "false") {
                Token tok = take();
                ExprPtr e = make(Expr::Kind::Literal, tok.pos);
                e->literal = Value(tok.text == "true");
                return e;
            }
            if (t->text == "out") {
                Token tok = take();
                return make(Expr::Kind::Accumulator, tok.pos);
            }
            return path(take());
        }
        if (at_punct('(')) {
            take();
            ExprPtr e = parse_or();
            if (!at_punct(')'))
                fail(peek() ? peek()->pos : src_.size(), "')'");
            take();
            return e;
        }
        fail(t->pos, "an operand");
    }

    ExprPtr number(const Token& t) {
        ExprPtr e = make(Expr::Kind::Literal, t.pos);
        if (t.text.find('.') != std::string_view::npos) {
            double v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc())
                fail(t.pos, "a number");
            e->literal = Value(v);
        } else {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc())
                fail(t.pos, "a number in range");
            e->literal = Value(v);
        }
        return e;
    }

    ExprPtr string_literal(const Token& t) {
        std::string s;
        s.reserve(t.text.size());
        for (std::size_t i = 1; i + 1 < t.text.size(); ++i) {
            char c = t.text[i];
            if (c == '\\') {
                char esc = t.text[++i];
                switch (esc) {
                case 'n': s += '\n'; break;
                case 't': s += '\t'; break;
                case 'r': s += '\r'; break;
                default: s += esc; break; // '"' and '\\'
                }
            } else {
                s += c;
            }
        }
        ExprPtr e = make(Expr::Kind::Literal, t.pos);
        e->literal = Value(std::move(s));
        return e;
    }

    ExprPtr path(const Token& first) {
        ExprPtr e = make(Expr::Kind::Path, first.pos);
        e->path.emplace_back(first.text);
        while (at_punct('.')) {
            take();
            const Token* seg = peek();
            if (!seg || seg->kind != TokKind::Ident)
                fail(seg ? seg->pos : src_.size(), "an identifier after '.'");
            e->path.emplace_back(take().text);
        }
        return e;
    }

    static ExprPtr binary(BinOp op, std::size_t pos, ExprPtr lhs, ExprPtr rhs) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Binary;
        e->pos = pos;
        e->bin = op;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

ExprPtr parse_expr(std::string_view source) { return Parser(source).run(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string print_literal(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Integer: return std::to_string(v.as_int());
    case Value::Kind::Float: {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v.as_float());
        std::string s(buf, p);
        if (s.find_first_of(".eE") == std::string::npos) // stay a Float on reparse
            s += ".0";
        return s;
    }
    case Value::Kind::Boolean: return v.as_bool() ? "true" : "false";
    case Value::Kind::Text: {
        std::string out = "\"";
        for (char c : v.as_text()) {
            switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
            }
        }
        out += '"';
        return out;
    }
    default: return "<null>"; // not representable in the grammar
    }
}

} // namespace

std::string print_expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal: return print_literal(e.literal);
    case Expr::Kind::Accumulator: return "out";
    case Expr::Kind::Path: {
        std::string out;
        for (std::size_t i = 0; i < e.path.size(); ++i) {
            if (i) out += '.';
            out += e.path[i];
        }
        return out;
    }
    case Expr::Kind::Unary:
        return "(" + std::string(op_text(e.un)) + print_expr(*e.lhs) + ")";
    case Expr::Kind::Binary:
        return "(" + print_expr(*e.lhs) + " " + std::string(op_text(e.bin)) + " " +
               print_expr(*e.rhs) + ")";
    }
    return "";
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Expr::Kind::Literal: return storage_equal(a.literal, b.literal);
    case Expr::Kind::Accumulator: return true;
    case Expr::Kind::Path: return a.path == b.path;
    case Expr::Kind::Unary: return a.un == b.un && expr_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Binary:
        return a.bin == b.bin && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    }
    return false;
}

bool contains_accumulator(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Accumulator: return true;
    case Expr::Kind::Unary: return contains_accumulator(*e.lhs);
    case Expr::Kind::Binary:
        return contains_accumulator(*e.lhs) || contains_accumulator(*e.rhs);
    default: return false;
    }
}

void visit_paths(Expr& e, const std::function<void(Expr&)>& fn) {
    switch (e.kind) {
    case Expr::Kind::Path: fn(e); break;
    case Expr::Kind::Unary: visit_paths(*e.lhs, fn); break;
    case Expr::Kind::Binary:
        visit_paths(*e.lhs, fn);
        visit_paths(*e.rhs, fn);
        break;
    default: break;
    }
}

void visit_paths(const Expr& e, const std::function<void(const Expr&)>& fn) {
    visit_paths(const_cast<Expr&>(e), [&fn](Expr& n) { fn(n); });
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void type_fault(std::string_view what, const Expr& e) {
    throw Error(Errc::TypeError,
                std::string(what) + " at offset " + std::to_string(e.pos));
}

Value eval_arith(const Expr& e, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null())
        return {};
    if (!a.is_numeric() || !b.is_numeric())
        type_fault("arithmetic needs numeric operands", e);
    if (a.kind() == Value::Kind::Integer && b.kind() == Value::Kind::Integer) {
        std::int64_t x = a.as_int(), y = b.as_int();
        switch (e.bin) {
        case BinOp::Add: return Value(x + y);
        case BinOp::Sub: return Value(x - y);
        case BinOp::Mul: return Value(x * y);
        case BinOp::Div:
            if (y == 0)
                throw Error(Errc::DivideByZero,
                            "integer division by zero at offset " + std::to_string(e.pos));
            return Value(x / y);
        case BinOp::Mod:
            if (y == 0)
                throw Error(Errc::DivideByZero,
                            "integer modulo by zero at offset " + std::to_string(e.pos));
            return Value(x % y);
        default: break;
        }
    }
    double x = a.numeric(), y = b.numeric();
    switch (e.bin) {
    case BinOp::Add: return Value(x + y);
    case BinOp::Sub: return Value(x - y);
    case BinOp::Mul: return Value(x * y);
    case BinOp::Div: return Value(x / y); // IEEE: /0 yields inf or nan
    case BinOp::Mod: return Value(std::fmod(x, y));
    default: break;
    }
    return {};
}

Value eval_compare(const Expr& e, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null())
        return {};
    const bool equality = e.bin == BinOp::Eq || e.bin == BinOp::Ne;
    if (a.is_numeric() && b.is_numeric()) {
        double x = a.numeric(), y = b.numeric();
        switch (e.bin) {
        case BinOp::Eq: return Value(x == y);
        case BinOp::Ne: return Value(x != y);
        case BinOp::Lt: return Value(x < y);
        case BinOp::Le: return Value(x <= y);
        case BinOp::Gt: return Value(x > y);
        case BinOp::Ge: return Value(x >= y);
        default: break;
        }
    }
    if (equality && a.kind() == b.kind()) {
        switch (a.kind()) {
        case Value::Kind::Text: {
            bool eq = a.as_text() == b.as_text();
            return Value(e.bin == BinOp::Eq ? eq : !eq);
        }
        case Value::Kind::Boolean: {
            bool eq = a.as_bool() == b.as_bool();
            return Value(e.bin == BinOp::Eq ? eq : !eq);
        }
        case Value::Kind::Ref: {
            bool eq = a.as_ref() == b.as_ref();
            return Value(e.bin == BinOp::Eq ? eq : !eq);
        }
        default: break;
        }
    }
    type_fault(equality ? "incomparable operand types" : "ordering needs numeric operands", e);
}

// Three-valued logic; lhs is already evaluated, rhs on demand.
Value eval_logic(const Expr& e, const Value& lhs, const std::function<Value()>& rhs_fn) {
    auto as_tri = [&](const Value& v) -> int { // 0=false, 1=true, 2=null
        if (v.is_null())
            return 2;
        if (v.kind() != Value::Kind::Boolean)
            type_fault("logic needs boolean operands", e);
        return v.as_bool() ? 1 : 0;
    };
    int l = as_tri(lhs);
    if (e.bin == BinOp::And) {
        if (l == 0)
            return Value(false);
        int r = as_tri(rhs_fn());
        if (r == 0)
            return Value(false);
        if (l == 1 && r == 1)
            return Value(true);
        return {};
    }
    // Or
    if (l == 1)
        return Value(true);
    int r = as_tri(rhs_fn());
    if (r == 1)
        return Value(true);
    if (l == 0 && r == 0)
        return Value(false);
    return {};
}

} // namespace

Value eval_expr(const Expr& e, const Bindings& bindings) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return e.literal;
    case Expr::Kind::Accumulator:
        if (!bindings.accumulator)
            throw Error(Errc::UnboundPath, "'out' is not bound at offset " + std::to_string(e.pos));
        return *bindings.accumulator;
    case Expr::Kind::Path: {
        if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= bindings.slots.size())
            throw Error(Errc::UnboundPath,
                        "unbound path '" + print_expr(e) + "' at offset " + std::to_string(e.pos));
        return bindings.slots[static_cast<std::size_t>(e.slot)];
    }
    case Expr::Kind::Unary: {
        Value v = eval_expr(*e.lhs, bindings);
        if (v.is_null())
            return {};
        if (e.un == UnOp::Neg) {
            if (v.kind() == Value::Kind::Integer)
                return Value(-v.as_int());
            if (v.kind() == Value::Kind::Float)
                return Value(-v.as_float());
            type_fault("negation needs a numeric operand", e);
        }
        if (v.kind() != Value::Kind::Boolean)
            type_fault("'!' needs a boolean operand", e);
        return Value(!v.as_bool());
    }
    case Expr::Kind::Binary: {
        switch (e.bin) {
        case BinOp::And:
        case BinOp::Or: {
            Value lhs = eval_expr(*e.lhs, bindings);
            return eval_logic(e, lhs, [&] { return eval_expr(*e.rhs, bindings); });
        }
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod:
            return eval_arith(e, eval_expr(*e.lhs, bindings), eval_expr(*e.rhs, bindings));
        default:
            return eval_compare(e, eval_expr(*e.lhs, bindings), eval_expr(*e.rhs, bindings));
        }
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Type inference

std::string_view static_type_name(StaticType t) {
    switch (t) {
    case StaticType::Integer: return "Integer";
    case StaticType::Float: return "Float";
    case StaticType::Text: return "Text";
    case StaticType::Boolean: return "Boolean";
    case StaticType::Row: return "Row";
    }
    return "?";
}

StaticType infer_type(const Expr& e, const std::function<StaticType(const Expr&)>& path_type,
                      std::optional<StaticType> accumulator_type) {
    auto numeric = [](StaticType t) {
        return t == StaticType::Integer || t == StaticType::Float;
    };
    switch (e.kind) {
    case Expr::Kind::Literal:
        switch (e.literal.kind()) {
        case Value::Kind::Integer: return StaticType::Integer;
        case Value::Kind::Float: return StaticType::Float;
        case Value::Kind::Text: return StaticType::Text;
        case Value::Kind::Boolean: return StaticType::Boolean;
        default: type_fault("literal has no static type", e);
        }
    case Expr::Kind::Accumulator:
        if (!accumulator_type)
            type_fault("'out' is not valid here", e);
        return *accumulator_type;
    case Expr::Kind::Path:
        return path_type(e);
    case Expr::Kind::Unary: {
        StaticType t = infer_type(*e.lhs, path_type, accumulator_type);
        if (e.un == UnOp::Neg) {
            if (!numeric(t))
                type_fault("negation needs a numeric operand", e);
            return t;
        }
        if (t != StaticType::Boolean)
            type_fault("'!' needs a boolean operand", e);
        return StaticType::Boolean;
    }
    case Expr::Kind::Binary: {
        StaticType l = infer_type(*e.lhs, path_type, accumulator_type);
        StaticType r = infer_type(*e.rhs, path_type, accumulator_type);
        switch (e.bin) {
        case BinOp::Add:
        case BinOp::Sub:
        case BinOp::Mul:
        case BinOp::Div:
        case BinOp::Mod:
            if (!numeric(l) || !numeric(r))
                type_fault("arithmetic needs numeric operands", e);
            return (l == StaticType::Float || r == StaticType::Float) ? StaticType::Float
                                                                      : StaticType::Integer;
        case BinOp::Eq:
        case BinOp::Ne:
            if (numeric(l) && numeric(r))
                return StaticType::Boolean;
            if (l != r)
                type_fault("incomparable operand types", e);
            return StaticType::Boolean;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
            if (!numeric(l) || !numeric(r))
                type_fault("ordering needs numeric operands", e);
            return StaticType::Boolean;
        case BinOp::And:
        case BinOp::Or:
            if (l != StaticType::Boolean || r != StaticType::Boolean)
                type_fault("logic needs boolean operands", e);
            return StaticType::Boolean;
        }
    }
    }
    type_fault("unreachable expression kind", e);
}

} // namespace funcol
