#ifndef KAM_SCALAR_HPP
#define KAM_SCALAR_HPP

#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <type_traits>

#include <gmpxx.h>

namespace kam {

using Rational = mpq_class;
using Complex = std::complex<double>;

// a + b i with exact rational parts
struct GaussRational {
    Rational re;
    Rational im;

    GaussRational() : re(0), im(0) {}
    GaussRational(long v) : re(v), im(0) {} // NOLINT
    GaussRational(Rational r) : re(std::move(r)), im(0) {} // NOLINT
    GaussRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    GaussRational &operator+=(const GaussRational &o)
    {
        re += o.re;
        im += o.im;
        return *this;
    }
    GaussRational &operator-=(const GaussRational &o)
    {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    GaussRational &operator*=(const GaussRational &o);
    GaussRational &operator/=(const GaussRational &o);

    friend GaussRational operator+(GaussRational a, const GaussRational &b) { return a += b; }
    friend GaussRational operator-(GaussRational a, const GaussRational &b) { return a -= b; }
    friend GaussRational operator*(GaussRational a, const GaussRational &b) { return a *= b; }
    friend GaussRational operator/(GaussRational a, const GaussRational &b) { return a /= b; }
    friend GaussRational operator-(const GaussRational &a) { return {-a.re, -a.im}; }
    friend bool operator==(const GaussRational &a, const GaussRational &b)
    {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussRational &a, const GaussRational &b) { return !(a == b); }
};

template <class T>
struct is_complex : std::false_type {};
template <>
struct is_complex<Complex> : std::true_type {};
template <>
struct is_complex<GaussRational> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational> || std::is_same_v<T, GaussRational>;

template <class T>
struct complexify;
template <>
struct complexify<Rational> { using type = GaussRational; };
template <>
struct complexify<GaussRational> { using type = GaussRational; };
template <>
struct complexify<double> { using type = Complex; };
template <>
struct complexify<Complex> { using type = Complex; };
template <class T>
using complexify_t = typename complexify<T>::type;

inline bool is_zero(const Rational &x) { return sgn(x) == 0; }
inline bool is_zero(const GaussRational &x) { return sgn(x.re) == 0 && sgn(x.im) == 0; }
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Complex &x) { return x.real() == 0.0 && x.imag() == 0.0; }

template <class C>
bool is_zero_value(const C &x)
{
    return is_zero(x);
}

inline double magnitude(const Rational &x) { return std::fabs(x.get_d()); }
inline double magnitude(const GaussRational &x) { return std::hypot(x.re.get_d(), x.im.get_d()); }
inline double magnitude(double x) { return std::fabs(x); }
inline double magnitude(const Complex &x) { return std::abs(x); }

inline Complex to_complex(const Rational &x) { return {x.get_d(), 0.0}; }
inline Complex to_complex(const GaussRational &x) { return {x.re.get_d(), x.im.get_d()}; }
inline Complex to_complex(double x) { return {x, 0.0}; }
inline Complex to_complex(const Complex &x) { return x; }

// Exact conversion of a rational into any coefficient type.
template <class C>
C from_rational(const Rational &r)
{
    if constexpr (std::is_same_v<C, Rational> || std::is_same_v<C, GaussRational>) {
        return C(r);
    } else {
        return C(r.get_d());
    }
}

template <class C>
C from_int(long v)
{
    return from_rational<C>(Rational(v));
}

// The imaginary unit; only meaningful for complex coefficient types.
template <class C>
C imaginary_unit()
{
    if constexpr (std::is_same_v<C, GaussRational>) {
        return GaussRational(Rational(0), Rational(1));
    } else {
        static_assert(std::is_same_v<C, Complex>, "imaginary unit needs a complex type");
        return Complex(0.0, 1.0);
    }
}

// Embeds a real scalar into its complexified type.
inline GaussRational to_complexified(const Rational &x) { return GaussRational(x); }
inline GaussRational to_complexified(const GaussRational &x) { return x; }
inline Complex to_complexified(double x) { return {x, 0.0}; }
inline Complex to_complexified(const Complex &x) { return x; }

// Parses "3/4", "-1.25", "2e-3" exactly.
Rational parse_rational(std::string_view text);

std::string format_scalar(const Rational &x);
std::string format_scalar(const GaussRational &x);
std::string format_scalar(double x);
std::string format_scalar(const Complex &x);

// Parses the textual forms produced by format_scalar. Complex forms are "re im".
template <class C>
C parse_scalar(std::string_view text);
template <>
Rational parse_scalar<Rational>(std::string_view text);
template <>
GaussRational parse_scalar<GaussRational>(std::string_view text);
template <>
double parse_scalar<double>(std::string_view text);
template <>
Complex parse_scalar<Complex>(std::string_view text);

} // namespace kam

#endif
