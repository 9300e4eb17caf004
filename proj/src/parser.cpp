#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "mvsr/expr.hpp"

namespace mvsr {
namespace {

// Recursive descent over the grammar
//   expr    := term (("+" | "-") term)*
//   term    := unary (("*" | "/") unary)*
//   unary   := "-" unary | primary
//   primary := number | ident | func "(" expr ("," expr)? ")" | "(" expr ")"
// with func in {exp, sqrt, sin, log, abs, square, pow}; ident is x<digits>
// or p<digits>; numbers are unsigned decimal literals with optional exponent.
struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& message, std::size_t at) const {
        throw ParseError(message, at);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_end() const { return pos >= text.size(); }

    char peek() const { return at_end() ? '\0' : text[pos]; }

    bool consume(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    Expression parse_expr() {
        Expression lhs = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) {
                lhs = Expression::binary(NodeKind::kAdd, std::move(lhs), parse_term());
            } else if (consume('-')) {
                lhs = Expression::binary(NodeKind::kSub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expression parse_term() {
        Expression lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (consume('*')) {
                lhs = Expression::binary(NodeKind::kMul, std::move(lhs), parse_unary());
            } else if (consume('/')) {
                lhs = Expression::binary(NodeKind::kDiv, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expression parse_unary() {
        skip_ws();
        if (consume('-')) return Expression::unary(NodeKind::kNeg, parse_unary());
        return parse_primary();
    }

    Expression parse_primary() {
        skip_ws();
        if (at_end()) fail("unexpected end of input", pos);
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (consume('(')) {
            Expression inner = parse_expr();
            skip_ws();
            if (!consume(')')) fail("expected ')'", pos);
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    Expression parse_number() {
        std::size_t start = pos;
        bool digits = false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            ++pos;
            digits = true;
        }
        if (consume('.')) {
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                ++pos;
                digits = true;
            }
        }
        if (!digits) fail("malformed number", start);
        bool negative_exponent = false;
        if (peek() == 'e' || peek() == 'E') {
            // Only take the exponent if it is well formed; otherwise the 'e'
            // belongs to whatever follows.
            std::size_t mark = pos;
            ++pos;
            if (peek() == '-') negative_exponent = true;
            if (peek() == '+' || peek() == '-') ++pos;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
            } else {
                pos = mark;
                negative_exponent = false;
            }
        }
        std::string_view token = text.substr(start, pos - start);
        double value = 0.0;
        auto res = std::from_chars(token.data(), token.data() + token.size(), value);
        if (res.ec == std::errc::result_out_of_range) {
            // Underflow collapses to zero; overflow has no finite reading.
            if (negative_exponent) return Expression::constant(0.0);
            fail("non-finite literal", start);
        }
        if (res.ec != std::errc() || res.ptr != token.data() + token.size())
            fail("malformed number", start);
        if (!std::isfinite(value)) fail("non-finite literal", start);
        return Expression::constant(value);
    }

    Expression parse_ident() {
        std::size_t start = pos;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos;
        std::string_view name = text.substr(start, pos - start);

        NodeKind func;
        bool is_func = true;
        if (name == "exp") func = NodeKind::kExp;
        else if (name == "sqrt") func = NodeKind::kSqrt;
        else if (name == "sin") func = NodeKind::kSin;
        else if (name == "log") func = NodeKind::kLog;
        else if (name == "abs") func = NodeKind::kAbs;
        else if (name == "square") func = NodeKind::kSquare;
        else if (name == "pow") func = NodeKind::kPow;
        else is_func = false;

        if (is_func) {
            skip_ws();
            if (!consume('(')) fail("expected '(' after '" + std::string(name) + "'", pos);
            Expression first = parse_expr();
            skip_ws();
            if (func == NodeKind::kPow) {
                if (!consume(',')) fail("pow expects two arguments", pos);
                Expression second = parse_expr();
                skip_ws();
                if (!consume(')')) fail("expected ')'", pos);
                return Expression::binary(NodeKind::kPow, std::move(first), std::move(second));
            }
            if (consume(','))
                fail("'" + std::string(name) + "' expects one argument", pos - 1);
            if (!consume(')')) fail("expected ')'", pos);
            return Expression::unary(func, std::move(first));
        }

        if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'p')) {
            bool all_digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) all_digits = false;
            if (all_digits) {
                int index = 0;
                auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
                if (res.ec != std::errc()) fail("index out of range", start);
                return name[0] == 'x' ? Expression::variable(index) : Expression::parameter(index);
            }
        }
        fail("unknown identifier '" + std::string(name) + "'", start);
    }
};

} // namespace

Expression parse(std::string_view text) {
    Parser p{text};
    p.skip_ws();
    if (p.at_end()) p.fail("empty expression", p.pos);
    Expression e = p.parse_expr();
    p.skip_ws();
    if (!p.at_end()) p.fail("unexpected trailing input", p.pos);
    return e;
}

} // namespace mvsr
