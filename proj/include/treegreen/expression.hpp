#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "treegreen/errors.hpp"

namespace treegreen {

/// Parsed arithmetic expression in one variable x.
///
/// Grammar (usual precedence, ^ binds tightest and associates right):
///
///   expr    = term   { ("+" | "-") term }
///   term    = factor { ("*" | "/") factor }
///   factor  = "-" factor | power
///   power   = primary [ "^" factor ]
///   primary = number | "x" | "pi" | "e"
///           | name "(" expr ")"
///           | "(" expr ")"
///
/// Supported functions: exp, ln, sqrt, abs, sin, cos, sinh, cosh.
///
/// Nodes are immutable after parsing, so trees can be shared freely and
/// evaluated concurrently.
class Expression {
public:
    static Expression parse(std::string_view text) {
        Parser p{text, 0};
        NodePtr root = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ParseError("unexpected trailing input", p.pos);
        return Expression(std::move(root));
    }

    /// Evaluates at the given coordinate.  Division by zero follows IEEE
    /// semantics; domain violations (ln/sqrt of a negative number, fractional
    /// power of a negative base) throw CoefficientEvaluationError.
    double operator()(double x) const { return eval(*root_, x); }

private:
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Fn { Exp, Ln, Sqrt, Abs, Sin, Cos, Sinh, Cosh };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Kind kind;
        double value = 0.0;
        Fn fn = Fn::Exp;
        NodePtr lhs;
        NodePtr rhs;
    };

    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    static double eval(const Node& n, double x) {
        switch (n.kind) {
            case Kind::Number: return n.value;
            case Kind::Var: return x;
            case Kind::Neg: return -eval(*n.lhs, x);
            case Kind::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
            case Kind::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
            case Kind::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
            case Kind::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
            case Kind::Pow: {
                double a = eval(*n.lhs, x);
                double b = eval(*n.rhs, x);
                if (a > 0.0) return std::pow(a, b);
                if (b == std::nearbyint(b)) return std::pow(a, b);
                throw CoefficientEvaluationError(
                    "non-integer power of a non-positive base");
            }
            case Kind::Call: {
                double a = eval(*n.lhs, x);
                switch (n.fn) {
                    case Fn::Exp: return std::exp(a);
                    case Fn::Ln:
                        if (!(a > 0.0))
                            throw CoefficientEvaluationError("ln of a non-positive value");
                        return std::log(a);
                    case Fn::Sqrt:
                        if (a < 0.0)
                            throw CoefficientEvaluationError("sqrt of a negative value");
                        return std::sqrt(a);
                    case Fn::Abs: return std::fabs(a);
                    case Fn::Sin: return std::sin(a);
                    case Fn::Cos: return std::cos(a);
                    case Fn::Sinh: return std::sinh(a);
                    case Fn::Cosh: return std::cosh(a);
                }
                break;
            }
        }
        throw CoefficientEvaluationError("corrupt expression tree");
    }

    struct Parser {
        std::string_view text;
        std::size_t pos;

        void skip_ws() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
        }

        bool accept(char c) {
            skip_ws();
            if (pos < text.size() && text[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        void expect(char c) {
            skip_ws();
            if (pos >= text.size() || text[pos] != c)
                throw ParseError(std::string("expected '") + c + "'", pos);
            ++pos;
        }

        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (accept('+'))
                    lhs = binary(Kind::Add, lhs, parse_term());
                else if (accept('-'))
                    lhs = binary(Kind::Sub, lhs, parse_term());
                else
                    return lhs;
            }
        }

        NodePtr parse_term() {
            NodePtr lhs = parse_factor();
            for (;;) {
                if (accept('*'))
                    lhs = binary(Kind::Mul, lhs, parse_factor());
                else if (accept('/'))
                    lhs = binary(Kind::Div, lhs, parse_factor());
                else
                    return lhs;
            }
        }

        NodePtr parse_factor() {
            // Exponentiation binds tighter than unary minus: -x^2 == -(x^2).
            if (accept('-')) {
                auto n = std::make_shared<Node>();
                n->kind = Kind::Neg;
                n->lhs = parse_factor();
                return n;
            }
            NodePtr base = parse_primary();
            if (accept('^'))
                return binary(Kind::Pow, base, parse_factor());
            return base;
        }

        NodePtr parse_primary() {
            skip_ws();
            if (pos >= text.size())
                throw ParseError("unexpected end of expression", pos);
            char c = text[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)))
                return parse_name();
            if (c == '(') {
                ++pos;
                NodePtr inner = parse_expr();
                expect(')');
                return inner;
            }
            throw ParseError(std::string("unexpected character '") + c + "'", pos);
        }

        NodePtr parse_number() {
            std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
                ++pos;
            if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
                std::size_t mark = pos;
                ++pos;
                if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
                if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                    while (pos < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[pos])))
                        ++pos;
                } else {
                    pos = mark; // bare "e" after a number is not an exponent
                }
            }
            std::string token(text.substr(start, pos - start));
            try {
                std::size_t used = 0;
                double v = std::stod(token, &used);
                if (used != token.size())
                    throw ParseError("malformed number '" + token + "'", start);
                return number(v);
            } catch (const std::logic_error&) {
                throw ParseError("malformed number '" + token + "'", start);
            }
        }

        NodePtr parse_name() {
            std::size_t start = pos;
            while (pos < text.size() &&
                   std::isalpha(static_cast<unsigned char>(text[pos])))
                ++pos;
            std::string_view name = text.substr(start, pos - start);
            if (name == "x") {
                auto n = std::make_shared<Node>();
                n->kind = Kind::Var;
                return n;
            }
            if (name == "pi") return number(3.14159265358979323846);
            if (name == "e") return number(2.71828182845904523536);
            Fn fn;
            if (name == "exp") fn = Fn::Exp;
            else if (name == "ln") fn = Fn::Ln;
            else if (name == "sqrt") fn = Fn::Sqrt;
            else if (name == "abs") fn = Fn::Abs;
            else if (name == "sin") fn = Fn::Sin;
            else if (name == "cos") fn = Fn::Cos;
            else if (name == "sinh") fn = Fn::Sinh;
            else if (name == "cosh") fn = Fn::Cosh;
            else
                throw UnknownIdentifier("unknown identifier '" + std::string(name) + "'",
                                        start);
            expect('(');
            NodePtr arg = parse_expr();
            expect(')');
            auto n = std::make_shared<Node>();
            n->kind = Kind::Call;
            n->fn = fn;
            n->lhs = std::move(arg);
            return n;
        }

        static NodePtr number(double v) {
            auto n = std::make_shared<Node>();
            n->kind = Kind::Number;
            n->value = v;
            return n;
        }

        static NodePtr binary(Kind k, NodePtr lhs, NodePtr rhs) {
            auto n = std::make_shared<Node>();
            n->kind = k;
            n->lhs = std::move(lhs);
            n->rhs = std::move(rhs);
            return n;
        }
    };

    NodePtr root_;
};

} // namespace treegreen
