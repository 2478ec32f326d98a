#pragma once

// Small closed-form expression grammar for scalar fields, used by scenario
// files and the CLI:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := NUMBER | xK | func '(' args ')' | '(' expr ')'
//   func    := exp | log | pow | bump | dist
//
// xK is the ambient coordinate x0..xn restricted to the sphere. pow(e, c)
// takes a numeric literal exponent. bump(e) is the C^inf cutoff chi with
// chi(0)=1 and support |e|<1. dist(c0,...,cn) is the geodesic distance to the
// (normalized) fixed point with those components. All constructs carry
// closed-form gradients.

#include <cctype>
#include <string>
#include <string_view>

#include "confsphere/field.hpp"

namespace confsphere {

namespace detail {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, int n) : text_(text), n_(n) {}

    ScalarField parse() {
        ScalarField f = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return f;
    }

private:
    ScalarField parse_expr() {
        ScalarField f = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+'))
                f = add(std::move(f), parse_term());
            else if (consume('-'))
                f = subtract(std::move(f), parse_term());
            else
                return f;
        }
    }

    ScalarField parse_term() {
        ScalarField f = parse_unary();
        for (;;) {
            skip_ws();
            if (consume('*'))
                f = multiply(std::move(f), parse_unary());
            else if (consume('/'))
                f = divide(std::move(f), parse_unary());
            else
                return f;
        }
    }

    ScalarField parse_unary() {
        skip_ws();
        if (consume('-')) return scale(parse_unary(), -1.0);
        return parse_primary();
    }

    ScalarField parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return constant_field(n_, parse_number());
        }
        if (consume('(')) {
            ScalarField f = parse_expr();
            expect(')');
            return f;
        }
        const std::string name = parse_ident();
        if (name.empty()) fail("expected a number, coordinate, or function");
        if (name[0] == 'x' && name.size() > 1 &&
            std::all_of(name.begin() + 1, name.end(),
                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            const int i = std::stoi(name.substr(1));
            if (i < 0 || i > n_) fail("coordinate index out of range: " + name);
            return coordinate_field(n_, i);
        }
        expect('(');
        if (name == "exp") {
            ScalarField a = parse_expr();
            expect(')');
            return exp_field(std::move(a));
        }
        if (name == "log") {
            ScalarField a = parse_expr();
            expect(')');
            return log_field(std::move(a));
        }
        if (name == "pow") {
            ScalarField a = parse_expr();
            expect(',');
            skip_ws();
            double sign = 1.0;
            if (consume('-')) sign = -1.0;
            const double k = sign * parse_number();
            expect(')');
            return power_field(std::move(a), k);
        }
        if (name == "bump") {
            ScalarField a = parse_expr();
            expect(')');
            return chain_unary(std::move(a), [](double s) { return smooth_bump(s); },
                               [](double s) { return smooth_bump_derivative(s); });
        }
        if (name == "dist") {
            Vec center;
            for (;;) {
                skip_ws();
                double sign = 1.0;
                if (consume('-')) sign = -1.0;
                center.push_back(sign * parse_number());
                skip_ws();
                if (!consume(',')) break;
            }
            expect(')');
            if (static_cast<int>(center.size()) != n_ + 1)
                fail("dist() needs n+1 components");
            normalize_in_place(center);
            return distance_field(n_, std::move(center));
        }
        fail("unknown function: " + name);
        return {};  // unreachable
    }

    double parse_number() {
        skip_ws();
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                text_[end] == 'e' || text_[end] == 'E' ||
                ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
                 (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
            ++end;
        if (end == pos_) fail("expected a number");
        const double v = std::stod(std::string(text_.substr(pos_, end - pos_)));
        pos_ = end;
        return v;
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end]))))
            ++end;
        std::string s(text_.substr(pos_, end - pos_));
        pos_ = end;
        return s;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        skip_ws();
        if (!consume(c)) fail(std::string("expected '") + c + "'");
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("expression error at offset " + std::to_string(pos_) + ": " + msg);
    }

    std::string_view text_;
    int n_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ScalarField parse_field(std::string_view expression, int n) {
    return detail::ExpressionParser(expression, n).parse();
}

}  // namespace confsphere
