#ifndef KAM_POISSON_HPP
#define KAM_POISSON_HPP

#include <vector>

#include <kam/jet.hpp>

namespace kam::poisson {

// Variables are ordered q_1..q_n, p_1..p_n, then optionally lambda_1..lambda_d
// and mu_1..mu_d. Only q_k and p_k are coupled by the bracket, {q_k, p_k} = 1.
struct SymplecticLayout {
    int n = 1;
    int d = 0;
    int param_weight = 1; // weight of lambda and mu in degree counts

    int num_vars() const { return 2 * n + 2 * d; }
    int q(int k) const { return k; }
    int p(int k) const { return n + k; }
    int lambda(int i) const { return 2 * n + i; }
    int mu(int i) const { return 2 * n + d + i; }

    ShapePtr shape(int trunc) const;
    bool matches(const JetShape &shape) const;
    static SymplecticLayout from_shape(const JetShape &shape);

    // Split of a monomial exponent into its q-part and p-part.
    MultiIndex q_part(const MultiIndex &m) const { return m.slice(0, n); }
    MultiIndex p_part(const MultiIndex &m) const { return m.slice(n, n); }
};

// The derivation f -> {h, f} + sum_i mu_coeffs[i] d f / d mu_i.
template <class C>
struct HamiltonianDerivation {
    Jet<C> h;
    std::vector<Jet<C>> mu_coeffs; // empty, or one jet per mu variable

    HamiltonianDerivation() = default;
    explicit HamiltonianDerivation(Jet<C> generator, std::vector<Jet<C>> mu = {})
        : h(std::move(generator)), mu_coeffs(std::move(mu))
    {
    }

    bool is_zero() const;
    HamiltonianDerivation operator-() const;
    HamiltonianDerivation &operator+=(const HamiltonianDerivation &o);
    Jet<C> apply(const Jet<C> &f, const SymplecticLayout &layout) const;
    // Minimal weighted-degree increase of one application (can be <= 0).
    int raise(const SymplecticLayout &layout) const;
};

template <class C>
Jet<C> bracket(const Jet<C> &f, const Jet<C> &g, const SymplecticLayout &layout);

// (alpha, i - j): the eigenvalue of h -> {h, sum alpha_k p_k q_k} on q^i p^j.
template <class C>
C ad_eigenvalue(const std::vector<C> &alpha, const MultiIndex &i, const MultiIndex &j);

// sum_k alpha_k p_k q_k
template <class C>
Jet<C> quadratic_model(const std::vector<C> &alpha, const ShapePtr &shape, const SymplecticLayout &layout);

// e^u f = sum u^j f / j!, exact on jets.
template <class C>
Jet<C> lie_exp(const HamiltonianDerivation<C> &u, const Jet<C> &f, const SymplecticLayout &layout);

// Applies e^{u_0} first, then e^{u_1}, ... : e^{u_last} ... e^{u_0} f.
template <class C>
Jet<C> exp_product(const std::vector<HamiltonianDerivation<C>> &us, const Jet<C> &f, const SymplecticLayout &layout);

// Reversed list with each generator negated.
template <class C>
std::vector<HamiltonianDerivation<C>> inverse_product(const std::vector<HamiltonianDerivation<C>> &us);

// Images of q_1..q_n, p_1..p_n under exp_product(us, .).
template <class C>
std::vector<Jet<C>> coordinate_images(const std::vector<HamiltonianDerivation<C>> &us, const ShapePtr &shape,
                                      const SymplecticLayout &layout);

// Max coefficient of {Q_i,P_j} - delta_ij, {Q_i,Q_j}, {P_i,P_j}, kept to degree N-1
// (the degree-N part of a bracket of degree-N jets is incomplete).
template <class C>
double check_symplectic(const std::vector<Jet<C>> &images, const SymplecticLayout &layout);

} // namespace kam::poisson

#endif
