#ifndef KAM_TEST_SUPPORT_HPP
#define KAM_TEST_SUPPORT_HPP

// Hand-rolled generators and independent oracles shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include <kam/arithmetic.hpp>
#include <kam/jet.hpp>
#include <kam/poisson.hpp>
#include <kam/scalar.hpp>

namespace testsupport {

using kam::Jet;
using kam::MultiIndex;
using kam::Rational;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin() { return uniform(0, 1) == 1; }

    Rational rational(int num = 9, int den = 6)
    {
        Rational r(uniform(-num, num), uniform(1, den));
        r.canonicalize();
        return r;
    }

    Rational nonzero_rational(int num = 9, int den = 6)
    {
        Rational r;
        do {
            r = rational(num, den);
        } while (r == 0);
        return r;
    }

    // Random exponent of weighted degree in [lo, hi].
    MultiIndex exponent(const kam::JetShape &shape, int lo, int hi)
    {
        const int n = shape.num_vars();
        while (true) {
            int target = uniform(lo, hi);
            MultiIndex m(n);
            int deg = 0;
            for (int guard = 0; guard < 64 && deg < target; ++guard) {
                int v = uniform(0, n - 1);
                if (deg + shape.weight(v) <= target) {
                    m.set(v, m[v] + 1);
                    deg += shape.weight(v);
                }
            }
            if (deg >= lo && deg <= hi) {
                return m;
            }
        }
    }

    Jet<Rational> jet(const kam::ShapePtr &shape, int terms, int lo, int hi)
    {
        Jet<Rational> f(shape);
        for (int t = 0; t < terms; ++t) {
            f.add_term(exponent(*shape, lo, hi), nonzero_rational());
        }
        return f;
    }

    Jet<double> jet_double(const kam::ShapePtr &shape, int terms, int lo, int hi, double scale = 1)
    {
        Jet<double> f(shape);
        for (int t = 0; t < terms; ++t) {
            f.add_term(exponent(*shape, lo, hi), real(-scale, scale));
        }
        return f;
    }

    std::mt19937_64 &engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// sigma_k by enumerating the full box [-2^k, 2^k]^n into a hash set and scanning it.
struct VecHash {
    std::size_t operator()(const std::vector<long> &v) const
    {
        std::size_t h = 1469598103934665603ull;
        for (long x : v) {
            h = (h ^ static_cast<std::size_t>(x + 1000003)) * 1099511628211ull;
        }
        return h;
    }
};

inline std::unordered_set<std::vector<long>, VecHash> box(int n, long R)
{
    std::unordered_set<std::vector<long>, VecHash> out;
    std::vector<long> i(static_cast<std::size_t>(n), -R);
    while (true) {
        out.insert(i);
        int j = 0;
        while (j < n && i[static_cast<std::size_t>(j)] == R) {
            i[static_cast<std::size_t>(j)] = -R;
            ++j;
        }
        if (j == n) {
            break;
        }
        ++i[static_cast<std::size_t>(j)];
    }
    return out;
}

template <class S>
std::vector<S> brute_sigma(const std::vector<S> &alpha, int kmax, kam::arithmetic::IndexNorm norm)
{
    const int n = static_cast<int>(alpha.size());
    std::vector<S> out;
    for (int k = 0; k <= kmax; ++k) {
        const long R = 1L << k;
        bool first = true;
        S best{};
        for (const auto &i : box(n, R)) {
            bool zero = true;
            long n2 = 0, ns = 0;
            for (long x : i) {
                zero = zero && x == 0;
                n2 += x * x;
                ns = std::max(ns, std::labs(x));
            }
            if (zero) {
                continue;
            }
            bool inside = norm == kam::arithmetic::IndexNorm::Euclidean ? n2 <= R * R : ns <= R;
            if (!inside) {
                continue;
            }
            S dot = 0;
            for (int j = 0; j < n; ++j) {
                dot += alpha[static_cast<std::size_t>(j)] * S(static_cast<double>(i[static_cast<std::size_t>(j)]));
            }
            S v = dot < 0 ? S(-dot) : dot;
            if (first || v < best) {
                best = v;
                first = false;
            }
        }
        out.push_back(best);
    }
    return out;
}

// Average of cos^a(t) sin^b(t) over one period, exactly.
inline Rational trig_average(int a, int b)
{
    if (a % 2 || b % 2) {
        return 0;
    }
    auto dfact = [](int m) {
        Rational r = 1;
        for (int x = m; x > 1; x -= 2) {
            r *= x;
        }
        return r;
    };
    Rational r = dfact(a - 1) * dfact(b - 1) / dfact(a + b);
    r.canonicalize();
    return r;
}

// First-order action polynomial of a real perturbation by angle averaging:
// q_k = sqrt(2 I_k) cos t_k, p_k = sqrt(2 I_k) sin t_k. Returns coefficients of
// I^e keyed by e (only monomials with even exponents per pair survive).
inline std::map<std::vector<int>, Rational> angle_average(const Jet<Rational> &R, int n)
{
    std::map<std::vector<int>, Rational> out;
    for (const auto &[m, c] : R.terms()) {
        Rational avg = c;
        std::vector<int> e(static_cast<std::size_t>(n));
        bool ok = true;
        for (int k = 0; k < n && ok; ++k) {
            int a = m[k], b = m[n + k];
            if ((a + b) % 2) {
                ok = false;
                break;
            }
            avg *= trig_average(a, b);
            // (2 I)^{(a+b)/2}
            for (int t = 0; t < (a + b) / 2; ++t) {
                avg *= 2;
            }
            e[static_cast<std::size_t>(k)] = (a + b) / 2;
        }
        if (ok && avg != 0) {
            out[e] += avg;
        }
    }
    return out;
}

// Dense schoolbook product on exponent maps, truncated at total weighted degree.
template <class C>
std::map<MultiIndex, C> dense_product(const Jet<C> &a, const Jet<C> &b)
{
    std::map<MultiIndex, C> out;
    for (const auto &[ma, ca] : a.terms()) {
        for (const auto &[mb, cb] : b.terms()) {
            MultiIndex m = ma + mb;
            if (a.shape().weighted_degree(m) <= a.trunc()) {
                out[m] += ca * cb;
            }
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        it = kam::is_zero(it->second) ? out.erase(it) : std::next(it);
    }
    return out;
}

} // namespace testsupport

#endif
