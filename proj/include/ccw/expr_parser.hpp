#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "ccw/errors.hpp"
#include "ccw/poly.hpp"

namespace ccw {

// Recursive-descent parser for polynomial expressions over declared
// coordinates: rationals, coordinates, +, -, *, integer powers, parentheses.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' natural)?
//   atom   := rational | coordinate | '(' expr ')' | ('-'|'+') atom
//   rational := integer ['/' integer] | decimal
class ExprParser {
public:
    ExprParser(const std::string& text, const std::vector<std::string>& var_names,
               int line_offset = 1, int col_offset = 1)
        : text_(text), vars_(var_names), line_(line_offset), col0_(col_offset) {}

    RPoly parse() {
        RPoly p = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return p;
    }

private:
    RPoly parse_expr() {
        RPoly acc = parse_term();
        for (;;) {
            skip_ws();
            if (peek() == '+') {
                ++pos_;
                acc += parse_term();
            } else if (peek() == '-') {
                ++pos_;
                acc -= parse_term();
            } else {
                return acc;
            }
        }
    }

    RPoly parse_term() {
        RPoly acc = parse_factor();
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                ++pos_;
                acc = acc * parse_factor();
            } else {
                return acc;
            }
        }
    }

    RPoly parse_factor() {
        RPoly base = parse_atom();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            size_t mark = pos_;
            if (!std::isdigit(peek())) fail("exponent must be a nonnegative integer");
            long e = 0;
            while (std::isdigit(peek())) {
                e = e * 10 + (text_[pos_] - '0');
                ++pos_;
                if (e > 1000) fail("exponent too large");
            }
            if (peek() == '.' || peek() == '/') {
                pos_ = mark;
                fail("exponent must be a nonnegative integer");
            }
            RPoly acc = RPoly::constant(base.nvars(), Rational(1));
            for (long i = 0; i < e; ++i) acc = acc * base;
            return acc;
        }
        return base;
    }

    RPoly parse_atom() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            RPoly p = parse_expr();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return p;
        }
        if (c == '-') {
            ++pos_;
            return -parse_atom();
        }
        if (c == '+') {
            ++pos_;
            return parse_atom();
        }
        if (std::isdigit(c) || c == '.') return parse_number();
        if (std::isalpha(c) || c == '_') return parse_coordinate();
        fail(c == '\0' ? "unexpected end of expression" : std::string("unexpected character '") + c + "'");
        return RPoly();  // unreachable
    }

    RPoly parse_number() {
        size_t start = pos_;
        while (std::isdigit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            if (!std::isdigit(peek())) fail("malformed decimal literal");
            while (std::isdigit(peek())) ++pos_;
            return RPoly::constant(nvars(), parse_rational(text_.substr(start, pos_ - start)));
        }
        if (peek() == '/') {
            size_t slash = pos_;
            ++pos_;
            skip_ws();
            bool neg = false;
            if (peek() == '-') {
                neg = true;
                ++pos_;
            }
            if (!std::isdigit(peek())) {
                pos_ = slash;
                fail("'/' is only allowed between integer literals");
            }
            size_t dstart = pos_;
            while (std::isdigit(peek())) ++pos_;
            if (peek() == '.') {
                pos_ = slash;
                fail("'/' is only allowed between integer literals");
            }
            Rational num = parse_rational(text_.substr(start, slash - start));
            Rational den = parse_rational(text_.substr(dstart, pos_ - dstart));
            if (den == 0) {
                pos_ = slash;
                fail("zero denominator");
            }
            return RPoly::constant(nvars(), (neg ? -num : num) / den);
        }
        return RPoly::constant(nvars(), parse_rational(text_.substr(start, pos_ - start)));
    }

    RPoly parse_coordinate() {
        size_t start = pos_;
        while (std::isalnum(peek()) || peek() == '_') ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        for (size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return RPoly::variable(nvars(), static_cast<int>(i));
        pos_ = start;
        fail("undeclared coordinate '" + name + "'");
        return RPoly();  // unreachable
    }

    int nvars() const { return static_cast<int>(vars_.size()); }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, col0_ + static_cast<int>(pos_));
    }

    const std::string& text_;
    const std::vector<std::string>& vars_;
    size_t pos_ = 0;
    int line_;
    int col0_;
};

inline RPoly parse_poly(const std::string& text, const std::vector<std::string>& vars,
                        int line = 1, int col = 1) {
    ExprParser p(text, vars, line, col);
    return p.parse();
}

}  // namespace ccw
