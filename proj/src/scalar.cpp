#include <kam/scalar.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <kam/errors.hpp>

namespace kam {

GaussRational &GaussRational::operator*=(const GaussRational &o)
{
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

GaussRational &GaussRational::operator/=(const GaussRational &o)
{
    Rational den = o.re * o.re + o.im * o.im;
    if (sgn(den) == 0) {
        throw InvalidArgument("division by zero");
    }
    Rational r = (re * o.re + im * o.im) / den;
    Rational i = (im * o.re - re * o.im) / den;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

bool all_digits(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

Rational pow10(long e)
{
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    if (e >= 0) {
        return Rational(p);
    }
    return Rational(mpz_class(1), p);
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string s = trim(text);
    if (s.empty()) {
        throw ParseError("empty number");
    }
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        std::string_view digits = num;
        if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
            digits.remove_prefix(1);
        }
        if (!all_digits(digits) || !all_digits(den)) {
            throw ParseError("malformed rational '" + s + "'");
        }
        if (num[0] == '+') {
            num.erase(0, 1);
        }
        mpz_class d(den);
        if (d == 0) {
            throw ParseError("zero denominator in '" + s + "'");
        }
        Rational q(mpz_class(num), d);
        q.canonicalize();
        return q;
    }
    bool neg = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        pos = 1;
    }
    std::string mant;
    long exp10 = 0;
    auto epos = s.find_first_of("eE", pos);
    std::string body = s.substr(pos, epos == std::string::npos ? std::string::npos : epos - pos);
    if (epos != std::string::npos) {
        std::string ex = s.substr(epos + 1);
        long ev = 0;
        auto res = std::from_chars(ex.data() + (ex.size() && ex[0] == '+' ? 1 : 0), ex.data() + ex.size(), ev);
        if (res.ec != std::errc() || res.ptr != ex.data() + ex.size()) {
            throw ParseError("malformed exponent in '" + s + "'");
        }
        exp10 = ev;
    }
    auto dot = body.find('.');
    std::string ipart = body.substr(0, dot);
    std::string fpart = dot == std::string::npos ? std::string() : body.substr(dot + 1);
    if ((ipart.empty() && fpart.empty()) || (!ipart.empty() && !all_digits(ipart)) ||
        (!fpart.empty() && !all_digits(fpart))) {
        throw ParseError("malformed number '" + s + "'");
    }
    mant = ipart + fpart;
    exp10 -= static_cast<long>(fpart.size());
    Rational q(mpz_class(mant.empty() ? "0" : mant));
    q *= pow10(exp10);
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

std::string format_scalar(const Rational &x) { return x.get_str(); }

std::string format_scalar(const GaussRational &x) { return x.re.get_str() + " " + x.im.get_str(); }

std::string format_scalar(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_scalar(const Complex &x) { return format_scalar(x.real()) + " " + format_scalar(x.imag()); }

namespace {

double parse_double(const std::string &s)
{
    std::string t = trim(s);
    if (t.find('/') != std::string::npos) {
        return parse_rational(t).get_d();
    }
    std::istringstream in(t);
    double v = 0;
    in >> v;
    if (in.fail() || !in.eof()) {
        throw ParseError("malformed number '" + t + "'");
    }
    return v;
}

std::pair<std::string, std::string> split_pair(std::string_view text)
{
    std::string s = trim(text);
    auto sp = s.find_first_of(" \t");
    if (sp == std::string::npos) {
        return {s, "0"};
    }
    return {s.substr(0, sp), trim(std::string_view(s).substr(sp + 1))};
}

} // namespace

template <>
Rational parse_scalar<Rational>(std::string_view text)
{
    return parse_rational(text);
}

template <>
GaussRational parse_scalar<GaussRational>(std::string_view text)
{
    auto [a, b] = split_pair(text);
    return {parse_rational(a), parse_rational(b)};
}

template <>
double parse_scalar<double>(std::string_view text)
{
    return parse_double(std::string(text));
}

template <>
Complex parse_scalar<Complex>(std::string_view text)
{
    auto [a, b] = split_pair(text);
    return {parse_double(a), parse_double(b)};
}

} // namespace kam
