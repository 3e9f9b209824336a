#ifndef KAMTOOL_POLYNOMIAL_HPP
#define KAMTOOL_POLYNOMIAL_HPP

#include <cctype>
#include <string>

#include <kam/errors.hpp>
#include <kam/jet.hpp>
#include <kam/poisson.hpp>
#include <kam/scalar.hpp>

namespace kamtool {

// Sums of monomials in q1..qn, p1..pn (q, p when n = 1) with rational or
// decimal coefficients, e.g. "1/2*p1^2 + 1/2*q1^2 - 0.05*q1^2*q2^2".
template <class C>
kam::Jet<C> parse_polynomial(const std::string &text, const kam::poisson::SymplecticLayout &layout, int trunc)
{
    auto shape = layout.shape(trunc);
    kam::Jet<C> out(shape);
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    };
    auto fail = [&](const std::string &why) {
        throw kam::ParseError("polynomial '" + text + "' at position " + std::to_string(pos) + ": " + why);
    };
    auto read_int = [&] {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (start == pos) {
            fail("expected an integer");
        }
        return std::stoi(text.substr(start, pos - start));
    };
    skip();
    if (pos == text.size()) {
        return out;
    }
    bool first = true;
    while (true) {
        skip();
        int sign = 1;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            sign = text[pos] == '-' ? -1 : 1;
            ++pos;
            skip();
        } else if (!first) {
            fail("expected + or -");
        }
        first = false;
        kam::Rational coef(sign);
        kam::MultiIndex m(layout.num_vars());
        bool any = false;
        while (true) {
            skip();
            if (pos >= text.size()) {
                break;
            }
            char ch = text[pos];
            if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
                std::size_t start = pos;
                while (pos < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '.' || text[pos] == '/' ||
                        ((text[pos] == '-' || text[pos] == '+') && pos > start &&
                         (text[pos - 1] == 'e' || text[pos - 1] == 'E')))) {
                    ++pos;
                }
                coef *= kam::parse_rational(text.substr(start, pos - start));
            } else if (ch == 'q' || ch == 'p') {
                ++pos;
                int k = 1;
                if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                    k = read_int();
                } else if (layout.n != 1) {
                    fail("variable index required when n > 1");
                }
                if (k < 1 || k > layout.n) {
                    fail("variable index out of range");
                }
                int e = 1;
                skip();
                if (pos < text.size() && text[pos] == '^') {
                    ++pos;
                    skip();
                    e = read_int();
                }
                int v = ch == 'q' ? layout.q(k - 1) : layout.p(k - 1);
                m.set(v, m[v] + e);
            } else {
                fail(std::string("unexpected character '") + ch + "'");
            }
            any = true;
            skip();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                continue;
            }
            break;
        }
        if (!any) {
            fail("empty term");
        }
        out.add_term(m, kam::from_rational<C>(coef));
        skip();
        if (pos >= text.size()) {
            break;
        }
    }
    return out;
}

} // namespace kamtool

#endif
