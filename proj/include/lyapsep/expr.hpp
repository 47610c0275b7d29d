#pragma once

// Scalar expressions of the time variable `t`.
//
// Grammar (whitespace-insensitive):
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary (('^' | '**') unary)?
//   primary := number | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | tan | exp | log | sqrt | abs
//
// so '^' binds tighter than unary minus and is right associative.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "lyapsep/errors.hpp"

namespace lyapsep {

enum class ExprKind : std::uint8_t {
    Constant,
    Variable,
    Pi,
    Euler,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

inline constexpr bool is_unary(ExprKind k) noexcept {
    return k >= ExprKind::Neg && k <= ExprKind::Abs;
}
inline constexpr bool is_binary(ExprKind k) noexcept { return k >= ExprKind::Add; }

inline constexpr std::string_view function_name(ExprKind k) noexcept {
    switch (k) {
        case ExprKind::Sin: return "sin";
        case ExprKind::Cos: return "cos";
        case ExprKind::Tan: return "tan";
        case ExprKind::Exp: return "exp";
        case ExprKind::Log: return "log";
        case ExprKind::Sqrt: return "sqrt";
        case ExprKind::Abs: return "abs";
        default: return "";
    }
}

/// Immutable expression tree. Copies share nodes; safe to evaluate from several threads.
class Expr {
public:
    struct Node {
        ExprKind kind;
        double value = 0.0;  // Constant only, always finite and >= 0
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    /// Literal zero.
    Expr() : Expr(make(ExprKind::Constant, 0.0)) {}

    static Expr parse(std::string_view text);

    /// Numeric literal; negative values become Neg(|v|) so that printing round-trips.
    static Expr constant(double v) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite constant");
        if (std::signbit(v) && v != 0.0) return unary(ExprKind::Neg, Expr(make(ExprKind::Constant, -v)));
        return Expr(make(ExprKind::Constant, v == 0.0 ? 0.0 : v));
    }
    static Expr variable() { return Expr(make(ExprKind::Variable, 0.0)); }
    static Expr pi() { return Expr(make(ExprKind::Pi, 0.0)); }
    static Expr euler() { return Expr(make(ExprKind::Euler, 0.0)); }

    static Expr unary(ExprKind k, const Expr& operand) {
        if (!is_unary(k)) throw InvalidArgument("not a unary operator");
        return Expr(make(k, 0.0, operand.root_));
    }
    static Expr binary(ExprKind k, const Expr& lhs, const Expr& rhs) {
        if (!is_binary(k)) throw InvalidArgument("not a binary operator");
        return Expr(make(k, 0.0, lhs.root_, rhs.root_));
    }

    ExprKind kind() const noexcept { return root_->kind; }
    double value() const noexcept { return root_->value; }
    Expr lhs() const { return Expr(root_->lhs); }
    Expr rhs() const { return Expr(root_->rhs); }

    /// True iff the expression is the literal 0 (the off-diagonal test for systems).
    bool is_zero_literal() const noexcept {
        return root_->kind == ExprKind::Constant && root_->value == 0.0;
    }
    /// True iff the tree does not reference `t`.
    bool is_time_independent() const noexcept { return !mentions_t(*root_); }

    /// Value at time t. Throws DomainError instead of returning NaN or infinity.
    double eval(double t) const {
        if (!std::isfinite(t)) throw DomainError(to_string(), t, "non-finite time");
        return eval_node(*root_, t);
    }

    std::string to_string() const {
        std::string out;
        print(*root_, out);
        return out;
    }

    friend bool operator==(const Expr& a, const Expr& b) noexcept { return same(a.root_.get(), b.root_.get()); }
    friend bool operator!=(const Expr& a, const Expr& b) noexcept { return !(a == b); }

    /// Node count, used by the random-expression tests.
    std::size_t size() const noexcept { return count(*root_); }

private:
    explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    static std::shared_ptr<const Node> make(ExprKind k, double v, std::shared_ptr<const Node> l = nullptr,
                                            std::shared_ptr<const Node> r = nullptr) {
        return std::make_shared<const Node>(Node{k, v, std::move(l), std::move(r)});
    }

    static bool mentions_t(const Node& n) noexcept {
        if (n.kind == ExprKind::Variable) return true;
        if (n.lhs && mentions_t(*n.lhs)) return true;
        return n.rhs && mentions_t(*n.rhs);
    }

    static std::size_t count(const Node& n) noexcept {
        return 1 + (n.lhs ? count(*n.lhs) : 0) + (n.rhs ? count(*n.rhs) : 0);
    }

    static bool same(const Node* a, const Node* b) noexcept {
        if (a == b) return true;
        if (!a || !b) return false;
        if (a->kind != b->kind) return false;
        if (a->kind == ExprKind::Constant && a->value != b->value) return false;
        return same(a->lhs.get(), b->lhs.get()) && same(a->rhs.get(), b->rhs.get());
    }

    static std::string node_text(const Node& n) {
        std::string out;
        print(n, out);
        return out;
    }

    static double checked(const Node& n, double t, double v) {
        if (!std::isfinite(v)) throw DomainError(node_text(n), t, "result is not finite");
        return v;
    }

    static double eval_node(const Node& n, double t) {
        switch (n.kind) {
            case ExprKind::Constant: return n.value;
            case ExprKind::Variable: return t;
            case ExprKind::Pi: return std::numbers::pi;
            case ExprKind::Euler: return std::numbers::e;
            case ExprKind::Neg: return -eval_node(*n.lhs, t);
            case ExprKind::Sin: return std::sin(eval_node(*n.lhs, t));
            case ExprKind::Cos: return std::cos(eval_node(*n.lhs, t));
            case ExprKind::Tan: return checked(n, t, std::tan(eval_node(*n.lhs, t)));
            case ExprKind::Exp: return checked(n, t, std::exp(eval_node(*n.lhs, t)));
            case ExprKind::Abs: return std::abs(eval_node(*n.lhs, t));
            case ExprKind::Log: {
                const double x = eval_node(*n.lhs, t);
                if (!(x > 0.0)) throw DomainError(node_text(n), t, "log of non-positive value");
                return std::log(x);
            }
            case ExprKind::Sqrt: {
                const double x = eval_node(*n.lhs, t);
                if (x < 0.0) throw DomainError(node_text(n), t, "sqrt of negative value");
                return std::sqrt(x);
            }
            case ExprKind::Add: return checked(n, t, eval_node(*n.lhs, t) + eval_node(*n.rhs, t));
            case ExprKind::Sub: return checked(n, t, eval_node(*n.lhs, t) - eval_node(*n.rhs, t));
            case ExprKind::Mul: return checked(n, t, eval_node(*n.lhs, t) * eval_node(*n.rhs, t));
            case ExprKind::Div: {
                const double num = eval_node(*n.lhs, t);
                const double den = eval_node(*n.rhs, t);
                if (den == 0.0) throw DomainError(node_text(n), t, "division by zero");
                return checked(n, t, num / den);
            }
            case ExprKind::Pow: {
                const double base = eval_node(*n.lhs, t);
                const double ex = eval_node(*n.rhs, t);
                if (base < 0.0 && ex != std::trunc(ex))
                    throw DomainError(node_text(n), t, "negative base with non-integer exponent");
                if (base == 0.0 && ex < 0.0) throw DomainError(node_text(n), t, "zero to a negative power");
                return checked(n, t, std::pow(base, ex));
            }
        }
        return 0.0;
    }

    // Binding strength used by the printer; higher binds tighter.
    static int level(const Node& n) noexcept {
        switch (n.kind) {
            case ExprKind::Add:
            case ExprKind::Sub: return 1;
            case ExprKind::Mul:
            case ExprKind::Div: return 2;
            case ExprKind::Neg: return 3;
            case ExprKind::Pow: return 4;
            default: return 5;
        }
    }

    static void print_at(const Node& n, int min_level, std::string& out) {
        const bool paren = level(n) < min_level;
        if (paren) out += '(';
        print(n, out);
        if (paren) out += ')';
    }

    static void print(const Node& n, std::string& out) {
        switch (n.kind) {
            case ExprKind::Constant: {
                std::array<char, 64> buf{};
                auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
                out.append(buf.data(), ptr);
                return;
            }
            case ExprKind::Variable: out += 't'; return;
            case ExprKind::Pi: out += "pi"; return;
            case ExprKind::Euler: out += 'e'; return;
            case ExprKind::Neg:
                out += '-';
                print_at(*n.lhs, 3, out);
                return;
            case ExprKind::Add:
            case ExprKind::Sub:
                print_at(*n.lhs, 1, out);
                out += n.kind == ExprKind::Add ? " + " : " - ";
                print_at(*n.rhs, 2, out);
                return;
            case ExprKind::Mul:
            case ExprKind::Div:
                print_at(*n.lhs, 2, out);
                out += n.kind == ExprKind::Mul ? "*" : "/";
                print_at(*n.rhs, 3, out);
                return;
            case ExprKind::Pow:
                print_at(*n.lhs, 5, out);
                out += '^';
                print_at(*n.rhs, 3, out);
                return;
            default:
                out += function_name(n.kind);
                out += '(';
                print(*n.lhs, out);
                out += ')';
                return;
        }
    }

    friend class ExprParser;

    std::shared_ptr<const Node> root_;
};

/// Recursive-descent parser for the grammar documented at the top of this header.
class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    Expr parse() {
        skip_ws();
        if (pos_ >= text_.size()) fail({"expression"}, "empty input");
        Expr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) fail({"operator", "end of input"}, "unexpected character");
        return e;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
        throw ParseError(pos_, std::move(expected), detail);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool accept_power() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            ++pos_;
            return true;
        }
        if (pos_ + 1 < text_.size() && text_[pos_] == '*' && text_[pos_ + 1] == '*') {
            pos_ += 2;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = Expr::binary(ExprKind::Add, lhs, parse_term());
            else if (accept('-'))
                lhs = Expr::binary(ExprKind::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (pos_ + 1 < text_.size() && text_[pos_] == '*' && text_[pos_ + 1] == '*') return lhs;
            if (accept('*'))
                lhs = Expr::binary(ExprKind::Mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = Expr::binary(ExprKind::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::unary(ExprKind::Neg, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept_power()) return Expr::binary(ExprKind::Pow, base, parse_unary());
        return base;
    }

    static bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && is_digit(text_[p])) {
                pos_ = p;
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(v)) {
            pos_ = start;
            fail({"number"}, "malformed number");
        }
        return Expr::constant(v);
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail({"number", "t", "pi", "e", "function", "("}, "unexpected end of input");
        const char c = text_[pos_];
        if (is_digit(c) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            if (!accept(')')) fail({")"}, "unbalanced parenthesis");
            return inner;
        }
        if (is_alpha(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (is_alpha(text_[pos_]) || is_digit(text_[pos_]))) ++pos_;
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "t") return Expr::variable();
            if (name == "pi") return Expr::pi();
            if (name == "e") return Expr::euler();
            static constexpr std::array kFuncs{ExprKind::Sin, ExprKind::Cos, ExprKind::Tan, ExprKind::Exp,
                                               ExprKind::Log, ExprKind::Sqrt, ExprKind::Abs};
            for (ExprKind k : kFuncs) {
                if (name == function_name(k)) {
                    if (!accept('(')) fail({"("}, "function name must be followed by '('");
                    Expr arg = parse_expr();
                    if (!accept(')')) fail({")"}, "unbalanced parenthesis");
                    return Expr::unary(k, arg);
                }
            }
            pos_ = start;
            fail({"t", "pi", "e", "sin", "cos", "tan", "exp", "log", "sqrt", "abs"},
                 "unknown identifier '" + std::string(name) + "'");
        }
        fail({"number", "t", "pi", "e", "function", "("}, std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline Expr Expr::parse(std::string_view text) { return ExprParser(text).parse(); }

// Small construction helpers used by the catalog and system transformations.
inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Div, a, b); }

}  // namespace lyapsep
