#ifndef KAM_BIRKHOFF_HPP
#define KAM_BIRKHOFF_HPP

#include <vector>

#include <kam/jet.hpp>
#include <kam/kam_engine.hpp>
#include <kam/poisson.hpp>

namespace kam::birkhoff {

using poisson::HamiltonianDerivation;
using poisson::SymplecticLayout;

enum class CoordinateMode {
    RealElliptic, // quadratic part sum alpha_k (p_k^2 + q_k^2)
    ComplexMorse, // quadratic part sum alpha_k p_k q_k
};

template <class C>
struct EllipticHamiltonian {
    Jet<C> H;
    std::vector<C> alpha;
    CoordinateMode mode = CoordinateMode::ComplexMorse;

    SymplecticLayout layout() const;
    Jet<C> quadratic_part() const;
    // Throws NonElliptic when the quadratic part does not match the mode exactly
    // or H has terms of degree < 2.
    void validate() const;
};

// Linear symplectic change Q = q + i p, P = (i/2)(q - i p) per pair, taking
// alpha (p^2 + q^2) to (-2 i alpha) P Q. Inverse: q = Q/2 - i P, p = -i Q/2 + P.
template <class C>
struct MorseConversion {
    Jet<C> H;                       // Hamiltonian in the new coordinates
    std::vector<C> alpha;           // new frequencies
    std::vector<Jet<C>> old_in_new; // q_1..q_n, p_1..p_n as jets in (Q, P)
    std::vector<Jet<C>> new_in_old; // Q_1..Q_n, P_1..P_n as jets in (q, p)
    bool identity = false;
};

template <class R>
MorseConversion<complexify_t<R>> to_complex_morse(const EllipticHamiltonian<R> &H);

enum class Strategy {
    PerDegree,   // one generator per degree solving all non-resonant monomials
    PerMonomial, // one generator per monomial, applied in sequence
};

struct BirkhoffOptions {
    double divisor_floor = 1e-12;
    Strategy strategy = Strategy::PerDegree;
};

template <class C>
struct BirkhoffResult {
    Jet<C> A;                                     // in action variables X_k = p_k q_k, X-degree <= l
    std::vector<HamiltonianDerivation<C>> generators; // applied in order
    Jet<C> normalized;                            // exp_product(generators, H)
    Jet<C> residual;                              // normalized - A(p q)
    int achieved_order = 0;                       // 2l
    int residual_order = 0;                       // ord(residual)
    double min_divisor = 0;
};

// Birkhoff normalization to order 2l of a Hamiltonian in complex-Morse form.
template <class C>
BirkhoffResult<C> birkhoff_normalize(const EllipticHamiltonian<C> &H, int l, const BirkhoffOptions &options = {});

// Substitutes X_k -> p_k q_k in a polynomial of the action variables.
template <class C>
Jet<C> actions_to_jet(const Jet<C> &A, const ShapePtr &shape, const SymplecticLayout &layout);

// Real-elliptic transport of a complex-Morse action polynomial: since
// Q P = i (p^2 + q^2)/2, A_real(I) = A(i I).
template <class C>
Jet<C> real_actions(const Jet<C> &A);

template <class C>
std::vector<Jet<C>> frequency_map(const Jet<C> &A);

template <class C>
struct FrequencySpace {
    std::vector<C> base;              // gradient of A at 0
    std::vector<std::vector<C>> basis; // reduced row echelon form
    int d = 0;
};

// Affine span of the images of the frequency map of A.
template <class C>
FrequencySpace<C> frequency_space(const Jet<C> &A, double tolerance = 1e-10);

template <class C>
FrequencySpace<C> frequency_space(const EllipticHamiltonian<C> &H, int l, const BirkhoffOptions &options = {});

template <class C>
struct PrenormalResult {
    Jet<C> H;       // sum alpha p q + R with R in I^2, and H = A_k(p q) + o(2k)
    Jet<C> A;       // A_k
    int k = 0;
    std::vector<HamiltonianDerivation<C>> transform;
    engine::Certificate certificate;
};

struct PrenormalOptions {
    bool normalize = true; // false: certify the input as given
    int base_degree = 3;
    double divisor_floor = 1e-12;
};

// k <= 0 picks the smallest k whose frequency space already has the dimension
// reached at the largest order the truncation allows.
template <class C>
PrenormalResult<C> prenormal_form(const EllipticHamiltonian<C> &H, int k, const PrenormalOptions &options = {});

} // namespace kam::birkhoff

#endif
