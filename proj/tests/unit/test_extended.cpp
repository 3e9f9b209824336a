#include <doctest.h>

#include <kam/errors.hpp>
#include <kam/extended.hpp>

#include "support.hpp"

using namespace kam;
using namespace kam::engine;
using testsupport::Gen;

namespace {

Jet<Rational> X(const ShapePtr &shape, const SymplecticLayout &L, int k)
{
    return Jet<Rational>::variable(shape, L.q(k)) * Jet<Rational>::variable(shape, L.p(k));
}

birkhoff::EllipticHamiltonian<Rational> with_model(const std::vector<Rational> &alpha, const Jet<Rational> &R)
{
    SymplecticLayout L{static_cast<int>(alpha.size()), 0};
    return {poisson::quadratic_model(alpha, R.shape_ptr(), L) + R, alpha, birkhoff::CoordinateMode::ComplexMorse};
}

} // namespace

TEST_CASE("unperturbed model: corrections vanish")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(6);
    auto H = with_model({Rational(1), Rational(13, 8)}, Jet<Rational>(shape));
    auto rep = extended_scenario(H, {{Rational(1), Rational(0)}}, 6);
    CHECK(rep.certified);
    CHECK(rep.class_residual == 0);
    REQUIRE(rep.corrections.size() == 1);
    CHECK(rep.corrections[0].is_zero());
    CHECK(rep.frequency[0] == Jet<Rational>::constant(rep.frequency[0].shape_ptr(), 1));
    CHECK(rep.matches);
}

TEST_CASE("zero-dimensional frequency space reduces to the fiber case")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(6);
    // a single non-resonant sextic term: its second-order effect is beyond the truncation
    Jet<Rational> R(shape);
    R.add_term(MultiIndex{3, 0, 0, 3}, Rational(1));
    auto H = with_model({Rational(1), Rational(987, 610)}, R);
    auto pre = birkhoff::prenormal_form(H, 3);
    REQUIRE(birkhoff::frequency_space(pre.A).d == 0);
    auto rep = extended_scenario(H, {}, 6);
    CHECK(rep.reduced_to_fiber);
    CHECK(rep.basis.empty());
    CHECK(rep.certified);
    CHECK(rep.shift_steps == 0);
}

TEST_CASE("full-dimensional frequency space: corrections follow the frequency map")
{
    Gen gen(52);
    SymplecticLayout L{2, 0};
    const std::vector<Rational> alpha{Rational(1), Rational(987, 610)};
    for (int t = 0; t < 3; ++t) {
        auto shape = L.shape(8);
        auto R = gen.jet(shape, 4, 3, 6);
        R += X(shape, L, 0) * X(shape, L, 0) + Rational(1, 2) * X(shape, L, 0) * X(shape, L, 1) -
             X(shape, L, 1) * X(shape, L, 1);
        auto H = with_model(alpha, R);
        auto rep = extended_scenario(H, {}, 8);
        CHECK(rep.basis.size() == 2);
        CHECK(rep.certified);
        CHECK(rep.transverse_residual == 0);
        CHECK(rep.compare_order >= 2);
        CHECK(rep.matches);
        CHECK(rep.max_mismatch == 0);
    }
}

TEST_CASE("one-dimensional frequency space")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(8);
    const std::vector<Rational> alpha{Rational(1), Rational(987, 610)};
    // A = alpha.X + (X1 + X2)^2 moves along (1, 1)
    auto s = X(shape, L, 0) + X(shape, L, 1);
    Jet<Rational> R = s * s;
    R.add_term(MultiIndex{2, 1, 0, 0}, Rational(1, 5));
    auto H = with_model(alpha, R);
    auto rep = extended_scenario(H, {}, 8);
    REQUIRE(rep.basis.size() == 1);
    CHECK(rep.basis[0] == std::vector<Rational>{1, 1});
    CHECK(rep.certified);
    CHECK(rep.matches);
}

TEST_CASE("float mode agrees with exact mode")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(7);
    const std::vector<Rational> alpha{Rational(1), Rational(987, 610)};
    auto R = X(shape, L, 0) * X(shape, L, 1) + X(shape, L, 0) * X(shape, L, 0);
    R.add_term(MultiIndex{1, 0, 2, 0}, Rational(1, 3));
    auto H = with_model(alpha, R);
    auto exact = extended_scenario(H, {}, 7);
    birkhoff::EllipticHamiltonian<double> Hf{to_float(H.H), {1.0, Rational(987, 610).get_d()},
                                             birkhoff::CoordinateMode::ComplexMorse};
    auto approx = extended_scenario(Hf, {}, 7);
    CHECK(approx.certified);
    REQUIRE(exact.corrections.size() == approx.corrections.size());
    for (std::size_t i = 0; i < exact.corrections.size(); ++i) {
        auto diff = to_float(exact.corrections[i]) - approx.corrections[i];
        CHECK(diff.max_abs_coefficient() < 1e-9);
    }
}

TEST_CASE("argument checks")
{
    SymplecticLayout L{2, 0};
    auto shape = L.shape(6);
    auto H = with_model({Rational(1), Rational(13, 8)}, Jet<Rational>(shape));
    CHECK_THROWS(extended_scenario(H, {}, 3));
    CHECK_THROWS(extended_scenario(H, {}, 7));
    CHECK_THROWS(extended_scenario(H, {{Rational(1)}}, 6));
}
