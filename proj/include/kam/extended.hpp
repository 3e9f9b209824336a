#ifndef KAM_EXTENDED_HPP
#define KAM_EXTENDED_HPP

#include <vector>

#include <kam/birkhoff.hpp>

namespace kam::engine {

// Parameter-dependent normalization around a prenormal Hamiltonian.
//
// Variables (q, p, lambda, mu) with lambda, mu of weight 2 (the weight of p q).
// With f = (p_1 q_1, ..., p_n q_n) and f0 = sum lambda_i e_i, the model is
//     G_model = sum alpha_k f_k + sum mu_i (f, e_i)
// and F is I_lambda^2 + C[[lambda, mu]], I_lambda generated by f - f0.
// Modulo F a monomial phi(lambda, mu) f^c q^r p^s is replaced by its first
// order Taylor expansion in f at f0. Classes with r != s are solved against the
// mu-dependent divisor (alpha + sum mu_i e_i, r - s); classes with r = s are
// linear in f and their component along span(e) is absorbed by a shift of mu.
template <class C>
struct ExtendedReport {
    SymplecticLayout layout;                // extended layout (n, d, weight 2)
    std::vector<std::vector<C>> basis;      // e_1..e_d
    int k = 0;                              // prenormal order
    Jet<C> A;                               // action polynomial of the prenormal form
    Jet<C> prenormal;                       // prenormal Hamiltonian in (q, p)
    Jet<C> G;                               // initial extended Hamiltonian
    Jet<C> conjugated;                      // exp_product(transform, G)
    std::vector<HamiltonianDerivation<C>> transform;
    std::size_t hamiltonian_steps = 0;
    std::size_t shift_steps = 0;
    double min_divisor = std::numeric_limits<double>::infinity();
    double class_residual = 0;      // largest coefficient of the class of conjugated - model
    double transverse_residual = 0; // resonant part outside span(e), never absorbed
    bool certified = false;         // class residual vanishes (within tolerance in float mode)
    // a_i(lambda): the value of the new mu on the slice mu = 0 of the original G.
    std::vector<Jet<C>> corrections;
    std::vector<Jet<C>> frequency; // alpha + sum a_i(lambda) e_i
    std::vector<Jet<C>> reference; // grad A evaluated at sum lambda_i e_i
    int compare_order = 0;
    double max_mismatch = 0;
    bool matches = false;
    bool reduced_to_fiber = false; // d = 0
};

struct ExtendedOptions {
    int k = 0; // prenormal order, 0 picks it automatically
    int base_degree = 3;
    double divisor_floor = 1e-12;
    double tolerance = 1e-9; // float mode only
};

// basis empty: take the echelon basis of the frequency space of the prenormal form.
template <class C>
ExtendedReport<C> extended_scenario(const birkhoff::EllipticHamiltonian<C> &H, const std::vector<std::vector<C>> &basis,
                                    int N, const ExtendedOptions &options = {});

} // namespace kam::engine

#endif
