#ifndef KAM_KAM_ENGINE_HPP
#define KAM_KAM_ENGINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <kam/jet.hpp>
#include <kam/poisson.hpp>

namespace kam::engine {

using poisson::HamiltonianDerivation;
using poisson::SymplecticLayout;

// Number of p_k q_k factors a monomial contains, counted with multiplicity:
// sum_k min(i_k, j_k). The monomial lies in I^r iff this is >= r.
int action_pair_count(const MultiIndex &m, const SymplecticLayout &layout);

// "q1^2*p2" style name of a monomial.
std::string monomial_name(const MultiIndex &m, const SymplecticLayout &layout);

// Subspace spanned by a set of monomials, given by a membership test.
struct MonomialSubspace {
    std::string name;
    std::function<bool(const MultiIndex &)> contains;

    // I^2 (intersected with order >= 3, automatic since I^2 starts at degree 4).
    static MonomialSubspace ideal_square(const SymplecticLayout &layout);
};

template <class C>
Jet<C> project(const Jet<C> &f, const MonomialSubspace &space);

struct Certificate {
    bool passed = true;
    int truncation = 0;
    std::size_t checked_terms = 0;
    std::optional<MultiIndex> offending;
    std::string offending_name;
};

// Checks every monomial of r for membership in I^2 by exponent inspection.
template <class C>
Certificate certify_ideal_square(const Jet<C> &r, const SymplecticLayout &layout);

struct QuasiInverseStats {
    double min_divisor = std::numeric_limits<double>::infinity();
    std::size_t solved = 0;
};

// Generator h with {h, sum alpha p q + acc} = target modulo I^2 and degree > cutoff,
// where acc lies in I^2. Monomials without a p q pair are solved as a * g, those
// with exactly one pair as b * g, and the bracket of a * g with acc is corrected
// on its single-pair part. Here * g divides each coefficient by (alpha, i - j).
template <class C>
HamiltonianDerivation<C> hadamard_quasi_inverse(const std::vector<C> &alpha, int cutoff, const Jet<C> &target,
                                                const Jet<C> &acc, const SymplecticLayout &layout,
                                                double divisor_floor = 1e-12, QuasiInverseStats *stats = nullptr);

struct NormLedger {
    std::vector<double> s;
    std::vector<double> a, b, alpha, c, u;
};

template <class C>
struct KamProblem {
    SymplecticLayout layout;
    std::vector<C> alpha;
    Jet<C> model;        // sum alpha_k p_k q_k
    Jet<C> perturbation; // order >= 3
    MonomialSubspace F;
    int max_stages = 64;
    // Stage n solves monomials of degree <= max(base_degree + n, ord b_n);
    // a base_degree >= trunc disables the cutoff.
    int base_degree = 3;
    int k_offset = 0;
    double divisor_floor = 1e-12;
    std::vector<double> ledger_s{0.1, 0.25, 0.5};

    static KamProblem fiber(const std::vector<C> &alpha, const Jet<C> &perturbation);
};

template <class C>
struct KamState {
    int stage = 0;
    Jet<C> a, b, alpha, c;
    HamiltonianDerivation<C> u;
    int ord_b = 0;
    int ord_u = 0;
    int cutoff = 0;
    double min_divisor = std::numeric_limits<double>::infinity();
    std::size_t transform_length = 0;
    NormLedger ledger;
};

template <class C>
struct KamRun {
    std::vector<KamState<C>> trace;
    bool converged = false;
    Jet<C> final_model;    // a + sum alpha_n
    Jet<C> final_residual; // b after the last stage
    // Accumulated transform: generators -u_0, -u_1, ... applied in that order.
    std::vector<HamiltonianDerivation<C>> transform;
    Jet<C> conjugated; // exp_product(transform, a + b), recomputed independently
    Certificate certificate;
    bool conjugacy_consistent = false; // conjugated == final_model + final_residual
};

template <class C>
KamRun<C> kam_iterate(const KamProblem<C> &problem);

template <class C>
struct FiberResult {
    KamRun<C> run;
    std::vector<HamiltonianDerivation<C>> transform;
    Jet<C> conjugated;
    Certificate certificate;
};

// Conjugates H = sum alpha p q + R into sum alpha p q + (element of I^2).
template <class C>
FiberResult<C> fiber_normalize(const Jet<C> &H, const std::vector<C> &alpha, int N, int base_degree = 3,
                               double divisor_floor = 1e-12);

struct InequalityCheck {
    double lhs = 0;
    double rhs = 0;
    bool pass = false;
    double margin = 0; // rhs - lhs
};

struct ResteReport {
    double s = 0;
    double tau = 0;
    double N_hat = 0;
    double guard = 0; // 3 N_hat / (tau - s); the lemma assumes guard <= 1/2
    bool guard_ok = false;
    InequalityCheck checks[5];
    bool all_pass() const;
};

// Evaluates both sides of the five remainder estimates with the l1 majorant
// norm and the fitted 1-bounded constant of u.
template <class C>
ResteReport reste_inequalities_check(const HamiltonianDerivation<C> &u, const Jet<C> &x, const SymplecticLayout &layout,
                                     double s, double tau, int grid_size = 12);

} // namespace kam::engine

#endif
