#include <doctest.h>

#include <cmath>

#include <kam/errors.hpp>
#include <kam/scaled_norms.hpp>

#include "support.hpp"

using namespace kam;
using namespace kam::scalednorms;

namespace {

// max over the grid and degrees m <= D of m s^{m-1} sigma / (s + sigma)^m
double derivative_oracle(double tau, int grid, int D)
{
    double best = 0;
    for (const auto &[s, sg] : log_grid(tau, grid)) {
        for (int m = 1; m <= D; ++m) {
            best = std::max(best, m * std::pow(s, m - 1) * sg / std::pow(s + sg, m));
        }
    }
    return best;
}

} // namespace

TEST_CASE("grid stays inside the strip")
{
    for (const auto &[s, sg] : log_grid(0.4, 7)) {
        CHECK(s > 0);
        CHECK(sg > 0);
        CHECK(s + sg <= 0.4 + 1e-15);
    }
    CHECK(log_grid(1, 5).size() == 25);
    CHECK_THROWS_AS(log_grid(0, 5), InvalidArgument);
}

TEST_CASE("identity has constant one")
{
    auto shape = make_shape(2, 6);
    Operator<Rational> id = [](const Jet<Rational> &f) { return f; };
    auto fit = fit_bounded_constant(id, shape, 0, 0.5, 4, 6);
    CHECK(fit.N_hat == doctest::Approx(1.0));
    CHECK(fit.max_input.degree() == 0);
}

TEST_CASE("derivative against the closed-form ratio")
{
    auto shape = make_shape(1, 10);
    Operator<Rational> d = [](const Jet<Rational> &f) { return f.derivative(0); };
    for (double tau : {0.2, 1.0}) {
        for (int D : {3, 6, 9}) {
            auto fit = fit_bounded_constant(d, shape, 1, tau, D, 9);
            CHECK(fit.N_hat == doctest::Approx(derivative_oracle(tau, 9, D)).epsilon(1e-12));
            // Cauchy: m s^{m-1} sigma / (s+sigma)^m < 1
            CHECK(fit.N_hat < 1.0);
        }
    }
}

TEST_CASE("diagonal operator with a growing multiplier")
{
    // z^m -> m^2 z^m needs k = 2
    auto shape = make_shape(1, 8);
    Operator<double> u = [](const Jet<double> &f) {
        Jet<double> out(f.shape_ptr());
        for (const auto &[m, c] : f.terms()) {
            out.add_term(m, c * m.degree() * m.degree());
        }
        return out;
    };
    auto fit = fit_bounded_constant(u, shape, 2, 0.5, 8, 8);
    double expect = 0;
    for (const auto &[s, sg] : log_grid(0.5, 8)) {
        for (int m = 1; m <= 8; ++m) {
            expect = std::max(expect, m * m * std::pow(s / (s + sg), m) * sg * sg);
        }
    }
    CHECK(fit.N_hat == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("product norm bound holds for compositions of derivatives")
{
    auto shape = make_shape(2, 8);
    Operator<Rational> d0 = [](const Jet<Rational> &f) { return f.derivative(0); };
    Operator<Rational> d1 = [](const Jet<Rational> &f) { return f.derivative(1); };
    auto rep = product_norm_check<Rational>({d0, d1, d0}, {1, 1, 1}, shape, 0.5, 6, 7);
    CHECK(rep.count == 3);
    CHECK(rep.k == 3);
    CHECK(rep.holds);
    CHECK(rep.bound >= rep.composed_N_hat);
    CHECK(rep.margin == doctest::Approx(rep.bound - rep.composed_N_hat));
}

TEST_CASE("moderate growth partial sums and verdicts")
{
    std::vector<double> v;
    for (int n = 0; n < 20; ++n) {
        v.push_back(std::ldexp(1.0, n));
    }
    auto rep = moderate_growth(v, arithmetic::DecayGenerator::geometric(1, 0.5));
    // sum n log 2 / 2^n -> 2 log 2
    CHECK(rep.partial_sums.back() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-4));
    CHECK(rep.verdict == arithmetic::Verdict::Moderate);
    auto bad = moderate_growth(v, arithmetic::DecayGenerator::double_exponential(1, 1, 3));
    CHECK(bad.verdict == arithmetic::Verdict::NotModerate);
    CHECK(moderate_growth(v).verdict == arithmetic::Verdict::Inconclusive);
    CHECK_THROWS_AS(moderate_growth({1.0, -1.0}), InvalidArgument);
}
