#include <doctest.h>

#include <kam/birkhoff.hpp>
#include <kam/errors.hpp>

#include "support.hpp"

using namespace kam;
using namespace kam::birkhoff;
using testsupport::Gen;

namespace {

using G = GaussRational;

// sum alpha_k (p_k^2 + q_k^2) + R
Jet<Rational> real_hamiltonian(const std::vector<Rational> &alpha, const Jet<Rational> &R)
{
    SymplecticLayout L{static_cast<int>(alpha.size()), 0};
    Jet<Rational> H = R;
    for (int k = 0; k < L.n; ++k) {
        auto q = Jet<Rational>::variable(R.shape_ptr(), L.q(k));
        auto p = Jet<Rational>::variable(R.shape_ptr(), L.p(k));
        H += alpha[static_cast<std::size_t>(k)] * (q * q + p * p);
    }
    return H;
}

BirkhoffResult<G> normalize_real(const std::vector<Rational> &alpha, const Jet<Rational> &R, int l,
                                 BirkhoffOptions opt = {})
{
    EllipticHamiltonian<Rational> E{real_hamiltonian(alpha, R), alpha, CoordinateMode::RealElliptic};
    auto conv = to_complex_morse(E);
    EllipticHamiltonian<G> M{conv.H, conv.alpha, CoordinateMode::ComplexMorse};
    return birkhoff_normalize(M, l, opt);
}

bool is_real(const G &g, Rational &re)
{
    re = g.re;
    return g.im == 0;
}

} // namespace

TEST_CASE("quartic oscillator: action series to fourth order")
{
    // H = (p^2 + q^2)/2 + q^4; I + 3/2 I^2 - 17/4 I^3 + 375/16 I^4
    SymplecticLayout L{1, 0};
    auto shape = L.shape(8);
    auto q = Jet<Rational>::variable(shape, 0);
    auto res = normalize_real({Rational(1, 2)}, q.pow(4), 4);
    auto Ar = real_actions(res.A);
    const Rational expect[] = {Rational(0), Rational(1), Rational(3, 2), Rational(-17, 4), Rational(375, 16)};
    for (int e = 1; e <= 4; ++e) {
        Rational re;
        CHECK(is_real(Ar.coefficient(MultiIndex{e}), re));
        CHECK(re == expect[e]);
    }
    CHECK(res.residual_order == 9);
    CHECK(res.achieved_order == 8);
}

TEST_CASE("first-order actions equal the angle average of the quartic part")
{
    Gen gen(31);
    const std::vector<Rational> alpha{Rational(1, 2), Rational(7, 10)};
    SymplecticLayout L{2, 0};
    auto shape = L.shape(4);
    for (int t = 0; t < 10; ++t) {
        auto R = gen.jet(shape, 6, 4, 4);
        auto res = normalize_real(alpha, R, 2);
        auto Ar = real_actions(res.A);
        auto avg = testsupport::angle_average(R, 2);
        for (int a = 0; a <= 2; ++a) {
            MultiIndex m{a, 2 - a};
            Rational re;
            CHECK(is_real(Ar.coefficient(m), re));
            auto it = avg.find({a, 2 - a});
            CHECK(re == (it == avg.end() ? Rational(0) : it->second));
        }
        // H_2 = sum 2 alpha_k I_k
        Rational re;
        CHECK(is_real(Ar.coefficient(MultiIndex{1, 0}), re));
        CHECK(re == 1);
        CHECK(is_real(Ar.coefficient(MultiIndex{0, 1}), re));
        CHECK(re == Rational(7, 5));
    }
}

TEST_CASE("per-degree and per-monomial strategies agree on the actions")
{
    Gen gen(32);
    SymplecticLayout L{2, 0};
    auto shape = L.shape(6);
    for (int t = 0; t < 5; ++t) {
        auto R = gen.jet(shape, 5, 3, 6);
        BirkhoffOptions mono;
        mono.strategy = Strategy::PerMonomial;
        auto a = normalize_real({Rational(1, 2), Rational(7, 10)}, R, 3);
        auto b = normalize_real({Rational(1, 2), Rational(7, 10)}, R, 3, mono);
        CHECK(a.A == b.A);
        CHECK(a.residual_order > 6);
        CHECK(b.residual_order > 6);
        CHECK(b.generators.size() >= a.generators.size());
    }
}

TEST_CASE("normal form coordinates are symplectic")
{
    Gen gen(33);
    SymplecticLayout L{2, 0};
    auto shape = L.shape(6);
    auto R = gen.jet(shape, 6, 3, 6);
    auto res = normalize_real({Rational(1, 2), Rational(7, 10)}, R, 3);
    auto images = poisson::coordinate_images(res.generators, res.normalized.shape_ptr(), L);
    CHECK(poisson::check_symplectic(images, L) == 0.0);
}

TEST_CASE("complex-Morse conversion is a linear symplectic change")
{
    Gen gen(34);
    SymplecticLayout L{2, 0};
    auto shape = L.shape(5);
    std::vector<Rational> alpha{Rational(3, 2), Rational(-2, 3)};
    auto H = real_hamiltonian(alpha, gen.jet(shape, 6, 3, 5));
    EllipticHamiltonian<Rational> E{H, alpha, CoordinateMode::RealElliptic};
    auto conv = to_complex_morse(E);
    auto Hc = complexified(H);
    // H_new(new(old)) = H_old
    CHECK(compose(conv.H, conv.new_in_old) == Hc);
    for (int v = 0; v < 4; ++v) {
        CHECK(compose(conv.old_in_new[static_cast<std::size_t>(v)], conv.new_in_old) ==
              Jet<G>::variable(Hc.shape_ptr(), v));
    }
    CHECK(poisson::check_symplectic(conv.new_in_old, L) == 0.0);
    for (int k = 0; k < 2; ++k) {
        // -2 i alpha
        CHECK(conv.alpha[static_cast<std::size_t>(k)].re == 0);
        CHECK(conv.alpha[static_cast<std::size_t>(k)].im == -2 * alpha[static_cast<std::size_t>(k)]);
    }
    EllipticHamiltonian<G> M{conv.H, conv.alpha, CoordinateMode::ComplexMorse};
    CHECK_NOTHROW(M.validate());
}

TEST_CASE("validation rejects a mismatched quadratic part")
{
    SymplecticLayout L{1, 0};
    auto shape = L.shape(4);
    auto q = Jet<Rational>::variable(shape, 0);
    auto p = Jet<Rational>::variable(shape, 1);
    EllipticHamiltonian<Rational> bad{q * q + p * p * Rational(2), {Rational(1)}, CoordinateMode::RealElliptic};
    CHECK_THROWS_AS(bad.validate(), NonElliptic);
    EllipticHamiltonian<Rational> lin{q * p + q, {Rational(1)}, CoordinateMode::ComplexMorse};
    CHECK_THROWS_AS(lin.validate(), NonElliptic);
}

TEST_CASE("exact resonance is reported")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(4);
    auto X = [&](int k) {
        return Jet<Rational>::variable(shape, L.q(k)) * Jet<Rational>::variable(shape, L.p(k));
    };
    auto q0 = Jet<Rational>::variable(shape, L.q(0));
    auto p1 = Jet<Rational>::variable(shape, L.p(1));
    // alpha = (1, 1): q1^2 p2^2 has (alpha, i - j) = 0
    EllipticHamiltonian<Rational> H{X(0) + X(1) + q0 * q0 * p1 * p1, {Rational(1), Rational(1)},
                                    CoordinateMode::ComplexMorse};
    CHECK_THROWS_AS(birkhoff_normalize(H, 2), ResonanceError);
    auto Hf = to_float(H.H) + 1e-14 * to_float(X(1));
    EllipticHamiltonian<double> Hd{Hf, {1.0, 1.0 + 1e-14}, CoordinateMode::ComplexMorse};
    CHECK_THROWS_AS(birkhoff_normalize(Hd, 2), SmallDivisor);
}

TEST_CASE("frequency space of action polynomials")
{
    auto shape = make_shape(2, 3);
    auto X1 = Jet<Rational>::variable(shape, 0);
    auto X2 = Jet<Rational>::variable(shape, 1);
    // gradient (1 + 2 X1, 2): a line
    auto fs = frequency_space(X1 + Rational(2) * X2 + X1 * X1);
    CHECK(fs.d == 1);
    CHECK(fs.base == std::vector<Rational>{1, 2});
    CHECK(fs.basis.size() == 1);
    CHECK(fs.basis[0] == std::vector<Rational>{1, 0});
    CHECK(frequency_space(X1 + X2).d == 0);
    CHECK(frequency_space(X1 + X2 + X1 * X2).d == 2);
    // parallel gradients: X1^2 + 2 X1 X2 + X2^2 moves along (1, 1)
    auto par = frequency_space(X1 + (X1 + X2).pow(2));
    CHECK(par.d == 1);
    CHECK(par.basis[0] == std::vector<Rational>{1, 1});
}

TEST_CASE("prenormal form: certificate and approximation order")
{
    Gen gen(35);
    SymplecticLayout L{2, 0};
    for (int t = 0; t < 4; ++t) {
        auto shape = L.shape(8);
        auto R = gen.jet(shape, 6, 3, 8);
        Jet<Rational> H = R;
        std::vector<Rational> alpha{Rational(1), Rational(13, 8)};
        for (int k = 0; k < 2; ++k) {
            H += alpha[static_cast<std::size_t>(k)] * Jet<Rational>::variable(shape, L.q(k)) *
                 Jet<Rational>::variable(shape, L.p(k));
        }
        EllipticHamiltonian<Rational> E{H, alpha, CoordinateMode::ComplexMorse};
        for (int k : {2, 3}) {
            auto pre = prenormal_form(E, k);
            CHECK(pre.certificate.passed);
            CHECK(pre.k == k);
            auto diff = pre.H - actions_to_jet(pre.A, pre.H.shape_ptr(), L);
            CHECK(diff.ord() > 2 * k);
            // conjugacy: pre.H is the image of H
            CHECK(poisson::exp_product(pre.transform, H, L) == pre.H);
        }
        auto autok = prenormal_form(E, 0);
        CHECK(autok.certificate.passed);
        CHECK(autok.k >= 1);
    }
}
