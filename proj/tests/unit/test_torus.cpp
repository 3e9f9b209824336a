#include <doctest.h>

#include <cmath>
#include <numbers>

#include <kam/errors.hpp>
#include <kam/torus.hpp>

#include "support.hpp"

using namespace kam;
using namespace kam::torus;
using testsupport::Gen;

namespace {

// sum a_k (p_k^2 + q_k^2) + extra
Jet<double> oscillators(const std::vector<double> &a, int trunc)
{
    const int n = static_cast<int>(a.size());
    poisson::SymplecticLayout L{n, 0};
    auto shape = L.shape(trunc);
    Jet<double> H(shape);
    for (int k = 0; k < n; ++k) {
        MultiIndex mq(2 * n), mp(2 * n);
        mq.set(L.q(k), 2);
        mp.set(L.p(k), 2);
        H.add_term(mq, a[static_cast<std::size_t>(k)]);
        H.add_term(mp, a[static_cast<std::size_t>(k)]);
    }
    return H;
}

Jet<double> quartic_oscillator()
{
    auto H = oscillators({0.5}, 4);
    H.add_term(MultiIndex{4, 0}, 1.0);
    return H;
}

double max_diff(const std::vector<double> &a, const std::vector<double> &b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace

TEST_CASE("field follows Hamilton's equations")
{
    auto H = quartic_oscillator();
    HamiltonianField f(H);
    double x[2] = {0.3, -0.7};
    double v[2];
    f.rhs(x, v);
    // dq/dt = p, dp/dt = -(q + 4 q^3)
    CHECK(v[0] == doctest::Approx(-0.7));
    CHECK(v[1] == doctest::Approx(-(0.3 + 4 * 0.027)));
    CHECK(f.energy(x) == doctest::Approx(0.5 * (0.09 + 0.49) + 0.0081));
}

TEST_CASE("harmonic oscillator: energy drift and exact solution")
{
    auto H = oscillators({0.5}, 2);
    auto tr = integrate(H, {0.6, 0.2}, 1e-3, 10000);
    CHECK(tr.energy_drift <= 1e-10);
    CHECK(tr.steps_done == 10000);
    const double t = 10.0;
    std::vector<double> exact{0.6 * std::cos(t) + 0.2 * std::sin(t), -0.6 * std::sin(t) + 0.2 * std::cos(t)};
    CHECK(max_diff(tr.samples.back(), exact) < 1e-10);
}

TEST_CASE("integrator has order six")
{
    auto H = quartic_oscillator();
    const double T = 2.0;
    auto ref = integrate(H, {0.5, 0.1}, T / 2048, 2048).samples.back();
    auto e1 = max_diff(integrate(H, {0.5, 0.1}, T / 32, 32).samples.back(), ref);
    auto e2 = max_diff(integrate(H, {0.5, 0.1}, T / 64, 64).samples.back(), ref);
    double order = std::log2(e1 / e2);
    CHECK(order > 5.5);
    CHECK(order < 6.5);
}

TEST_CASE("the flow map preserves area")
{
    auto H = quartic_oscillator();
    const double h = 1e-6;
    auto flow = [&](double q, double p) { return integrate(H, {q, p}, 0.01, 300).samples.back(); };
    auto a = flow(0.4 + h, 0.2), b = flow(0.4 - h, 0.2), c = flow(0.4, 0.2 + h), d = flow(0.4, 0.2 - h);
    double J00 = (a[0] - b[0]) / (2 * h), J10 = (a[1] - b[1]) / (2 * h);
    double J01 = (c[0] - d[0]) / (2 * h), J11 = (c[1] - d[1]) / (2 * h);
    CHECK(J00 * J11 - J01 * J10 == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("zero Hamiltonian: every point is fixed")
{
    auto shape = make_shape({{Block::Q, 2}, {Block::P, 2}}, 4);
    Jet<double> H(shape);
    auto tr = integrate(H, {0.1, 0.2, 0.3, 0.4}, 0.1, 100, 10);
    CHECK(tr.samples.size() == 11);
    for (const auto &s : tr.samples) {
        CHECK(s == tr.x0);
    }
    CHECK(tr.energy_drift == 0);
}

TEST_CASE("sampling stride and escape")
{
    auto H = oscillators({0.5}, 4);
    H.add_term(MultiIndex{3, 0}, -1.0);
    // H = (p^2 + q^2)/2 - q^3 escapes for q0 beyond the saddle at 1/3
    auto tr = integrate(H, {0.5, 0.0}, 0.01, 10000, 5, 3.0);
    CHECK(tr.escaped);
    CHECK(tr.steps_done < 10000);
    auto ok = integrate(oscillators({0.5}, 2), {0.5, 0.0}, 0.01, 100, 5, 3.0);
    CHECK_FALSE(ok.escaped);
    CHECK(ok.samples.size() == 21);
    CHECK_THROWS_AS(integrate(oscillators({0.5}, 2), {0.5, 0.0}, 10.0, 10), InvalidArgument);
}

TEST_CASE("synthetic tone is recovered to 1e-6")
{
    Gen gen(61);
    for (int t = 0; t < 10; ++t) {
        double nu = gen.real(0.3, 2.5), A = gen.real(0.1, 2), ph = gen.real(0, 6);
        const double dt = 0.1;
        std::vector<double> re, im;
        for (int s = 0; s < 1024; ++s) {
            re.push_back(A * std::cos(-nu * s * dt + ph));
            im.push_back(A * std::sin(-nu * s * dt + ph));
        }
        double est = 0, amp = 0;
        REQUIRE(dominant_rate(re, im, dt, est, amp));
        CHECK(std::abs(est - nu) < 1e-6);
        CHECK(amp == doctest::Approx(A).epsilon(1e-3));
    }
}

TEST_CASE("two tones: the stronger one dominates")
{
    const double dt = 0.1;
    std::vector<double> re, im;
    for (int s = 0; s < 2048; ++s) {
        double t = s * dt;
        re.push_back(1.0 * std::cos(-1.3 * t) + 0.3 * std::cos(-0.4 * t));
        im.push_back(1.0 * std::sin(-1.3 * t) + 0.3 * std::sin(-0.4 * t));
    }
    double nu = 0, amp = 0;
    REQUIRE(dominant_rate(re, im, dt, nu, amp));
    CHECK(nu == doctest::Approx(1.3).epsilon(1e-4));
}

TEST_CASE("constant signals carry no rate")
{
    std::vector<double> re(256, 0.7), im(256, -0.2);
    double nu = 0, amp = 0;
    CHECK_FALSE(dominant_rate(re, im, 0.1, nu, amp));
    std::vector<double> z(256, 0.0);
    CHECK_FALSE(dominant_rate(z, z, 0.1, nu, amp));
    CHECK_THROWS_AS(dominant_rate({1, 2}, {1, 2}, 0.1, nu, amp), InvalidArgument);
}

TEST_CASE("rates of uncoupled oscillators follow the convention")
{
    auto H = oscillators({0.5, 0.8}, 2);
    HamiltonianField f(H);
    Thresholds th;
    IntegrationPlan plan;
    auto rec = analyse_orbit(f, {0.1, -0.05, 0.02, 0.07}, 0.2, plan, th);
    CHECK(rec.classification == OrbitClass::TorusLike);
    for (const auto &w : rec.window_nu) {
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(w[1] == doctest::Approx(1.6).epsilon(1e-6));
    }
    auto origin = analyse_orbit(f, {0, 0, 0, 0}, 0.2, plan, th);
    CHECK(origin.degenerate);
    CHECK(origin.classification == OrbitClass::Undecided);
}

TEST_CASE("frequency analysis needs two windows")
{
    std::vector<std::vector<double>> samples(512, std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(frequency_analysis(samples, 1, 0.1, 1), InvalidArgument);
    CHECK_THROWS_AS(frequency_analysis(samples, 1, 0.1, 16), InvalidArgument);
}

TEST_CASE("classification rules")
{
    Thresholds th;
    OrbitRecord rec;
    rec.energy_drift = 1e-9;
    rec.stability = 1e-6;
    CHECK(classify(rec, th) == OrbitClass::TorusLike);
    rec.stability = 1e-3;
    CHECK(classify(rec, th) == OrbitClass::ChaoticOrEscaping);
    rec.stability = 1e-6;
    rec.energy_drift = 1e-3;
    CHECK(classify(rec, th) == OrbitClass::ChaoticOrEscaping);
    rec.escaped = true;
    rec.energy_drift = 0;
    CHECK(classify(rec, th) == OrbitClass::ChaoticOrEscaping);
    CHECK(class_name(OrbitClass::TorusLike) != class_name(OrbitClass::Undecided));
}

TEST_CASE("scan: integrable system, determinism across jobs, argument checks")
{
    auto H = oscillators({0.5, 0.8}, 2);
    IntegrationPlan plan;
    plan.window_length = 256;
    auto a = torus_scan(H, 0.3, 12, 99, {}, plan, 1);
    auto b = torus_scan(H, 0.3, 12, 99, {}, plan, 3);
    CHECK(a.fraction == 1.0);
    CHECK(a.torus_like == 12);
    REQUIRE(a.orbits.size() == b.orbits.size());
    for (std::size_t i = 0; i < a.orbits.size(); ++i) {
        CHECK(a.orbits[i].x0 == b.orbits[i].x0);
        CHECK(a.orbits[i].stability == b.orbits[i].stability);
        double r2 = 0;
        for (double v : a.orbits[i].x0) {
            r2 += v * v;
        }
        CHECK(r2 <= 0.09);
    }
    CHECK_THROWS_AS(torus_scan(H, 0.3, 0, 1), InvalidArgument);
    auto lin = H;
    lin.add_term(MultiIndex{1, 0, 0, 0}, 0.1);
    CHECK_THROWS_AS(torus_scan(lin, 0.3, 4, 1), NonElliptic);
}

TEST_CASE("strong coupling at large radius breaks tori, monotonically in the coupling")
{
    const double phi = std::numbers::phi;
    std::vector<double> fractions, errors;
    for (double c : {1.0, 5.0, 20.0}) {
        auto H = oscillators({1.0, phi}, 4);
        H.add_term(MultiIndex{2, 2, 0, 0}, c);
        auto rep = torus_scan(H, 1.0, 40, 11);
        fractions.push_back(rep.fraction);
        errors.push_back(std::max(rep.std_error, 0.5 / std::sqrt(40.0)));
    }
    CHECK(fractions.back() < 1.0);
    for (std::size_t j = 1; j < fractions.size(); ++j) {
        CHECK(fractions[j] <= fractions[j - 1] + 2 * std::hypot(errors[j], errors[j - 1]));
    }
}
