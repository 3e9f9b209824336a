#include <kam/extended.hpp>

#include <algorithm>
#include <map>

namespace kam::engine {

namespace {

template <class C>
bool negligible(const C &x, double tol)
{
    if constexpr (is_exact_v<C>) {
        (void)tol;
        return is_zero(x);
    } else {
        return magnitude(x) <= tol;
    }
}

// Row echelon form of the basis together with the change of basis, so that a
// vector v in span(e) has coordinates beta_j = sum_i v[pivot_i] T[i][j].
template <class C>
struct Echelon {
    std::vector<std::vector<C>> rows;
    std::vector<std::vector<C>> T;
    std::vector<int> pivots;
};

template <class C>
Echelon<C> echelon(const std::vector<std::vector<C>> &basis, int n, double tol)
{
    const int d = static_cast<int>(basis.size());
    Echelon<C> E;
    E.rows = basis;
    for (int i = 0; i < d; ++i) {
        E.T.emplace_back(static_cast<std::size_t>(d), C(0));
        E.T[i][i] = from_int<C>(1);
    }
    int r = 0;
    for (int col = 0; col < n && r < d; ++col) {
        int piv = -1;
        double best = 0;
        for (int i = r; i < d; ++i) {
            const C &x = E.rows[i][col];
            if (!negligible(x, tol) && magnitude(x) > best) {
                best = magnitude(x);
                piv = i;
            }
        }
        if (piv < 0) {
            continue;
        }
        std::swap(E.rows[r], E.rows[piv]);
        std::swap(E.T[r], E.T[piv]);
        C inv = from_int<C>(1) / E.rows[r][col];
        for (auto &x : E.rows[r]) {
            x = x * inv;
        }
        for (auto &x : E.T[r]) {
            x = x * inv;
        }
        for (int i = 0; i < d; ++i) {
            if (i == r || is_zero(E.rows[i][col])) {
                continue;
            }
            C f = E.rows[i][col];
            for (int c2 = 0; c2 < n; ++c2) {
                E.rows[i][c2] = E.rows[i][c2] - f * E.rows[r][c2];
            }
            for (int c2 = 0; c2 < d; ++c2) {
                E.T[i][c2] = E.T[i][c2] - f * E.T[r][c2];
            }
        }
        E.pivots.push_back(col);
        ++r;
    }
    if (r < d) {
        throw InvalidArgument("frequency basis vectors are linearly dependent");
    }
    return E;
}

template <class C>
double max_coefficient(const Jet<C> &f)
{
    double m = 0;
    for (const auto &[idx, c] : f.terms()) {
        m = std::max(m, magnitude(c));
    }
    return m;
}

template <class C>
struct Scenario {
    SymplecticLayout lay;
    ShapePtr shape;
    std::vector<C> alpha;
    std::vector<std::vector<C>> basis;
    std::vector<Jet<C>> f0; // sum_i lambda_i e_i, per k
    std::vector<std::vector<Jet<C>>> f0_pow;

    const Jet<C> &f0_power(int k, int e)
    {
        auto &v = f0_pow[static_cast<std::size_t>(k)];
        while (static_cast<int>(v.size()) <= e) {
            v.push_back(v.back() * f0[static_cast<std::size_t>(k)]);
        }
        return v[static_cast<std::size_t>(e)];
    }

    // f0^c as a jet
    Jet<C> f0_monomial(const std::vector<int> &c)
    {
        Jet<C> out = Jet<C>::constant(shape, from_int<C>(1));
        for (int k = 0; k < lay.n; ++k) {
            if (c[static_cast<std::size_t>(k)] > 0) {
                out = out * f0_power(k, c[static_cast<std::size_t>(k)]);
            }
        }
        return out;
    }

    Jet<C> action(int k) const
    {
        MultiIndex m(lay.num_vars());
        m.set(lay.q(k), 1);
        m.set(lay.p(k), 1);
        return Jet<C>::monomial(shape, m, from_int<C>(1));
    }
};

// Class modulo F of the degree-d terms of b: non-resonant classes grouped by
// the pair (q-part, p-part) of their reduced exponent, and psi with the
// resonant class equal to sum_k psi_k f_k.
template <class C>
struct ClassSplit {
    std::map<std::pair<MultiIndex, MultiIndex>, Jet<C>> nonresonant;
    std::vector<Jet<C>> psi;
};

template <class C>
ClassSplit<C> class_of(const Jet<C> &b, Scenario<C> &S)
{
    const auto &lay = S.lay;
    ClassSplit<C> out;
    for (int k = 0; k < lay.n; ++k) {
        out.psi.emplace_back(S.shape);
    }
    for (const auto &[m, coef] : b.terms()) {
        std::vector<int> c(static_cast<std::size_t>(lay.n));
        MultiIndex r(lay.n), s(lay.n), rest(lay.num_vars());
        int pairs = 0;
        for (int k = 0; k < lay.n; ++k) {
            int a = m[lay.q(k)], bq = m[lay.p(k)];
            int ck = std::min(a, bq);
            c[static_cast<std::size_t>(k)] = ck;
            pairs += ck;
            r.set(k, a - ck);
            s.set(k, bq - ck);
            rest.set(lay.q(k), a - ck);
            rest.set(lay.p(k), bq - ck);
        }
        for (int i = 0; i < 2 * lay.d; ++i) {
            rest.set(2 * lay.n + i, m[2 * lay.n + i]);
        }
        const bool resonant = r == s;
        if (resonant && pairs == 0) {
            continue; // function of (lambda, mu) only
        }
        Jet<C> phi = Jet<C>::monomial(S.shape, rest, coef); // phi q^r p^s
        // first order Taylor expansion of f^c at f0
        std::vector<Jet<C>> dfc;
        Jet<C> taylor0 = S.f0_monomial(c);
        for (int k = 0; k < lay.n; ++k) {
            int ck = c[static_cast<std::size_t>(k)];
            if (ck == 0) {
                dfc.emplace_back(S.shape);
                continue;
            }
            auto cm = c;
            cm[static_cast<std::size_t>(k)] -= 1;
            dfc.push_back(S.f0_monomial(cm) * from_int<C>(ck));
        }
        if (resonant) {
            for (int k = 0; k < lay.n; ++k) {
                if (!dfc[static_cast<std::size_t>(k)].is_zero()) {
                    out.psi[static_cast<std::size_t>(k)] += phi * dfc[static_cast<std::size_t>(k)];
                }
            }
            continue;
        }
        Jet<C> lin = taylor0;
        for (int k = 0; k < lay.n; ++k) {
            if (!dfc[static_cast<std::size_t>(k)].is_zero()) {
                lin += dfc[static_cast<std::size_t>(k)] * (S.action(k) - S.f0[static_cast<std::size_t>(k)]);
            }
        }
        Jet<C> cls = phi * lin;
        if (cls.is_zero()) {
            continue;
        }
        auto key = std::make_pair(r, s);
        auto it = out.nonresonant.find(key);
        if (it == out.nonresonant.end()) {
            out.nonresonant.emplace(key, std::move(cls));
        } else {
            it->second += cls;
        }
    }
    return out;
}

} // namespace

template <class C>
ExtendedReport<C> extended_scenario(const birkhoff::EllipticHamiltonian<C> &H, const std::vector<std::vector<C>> &basis_in,
                                    int N, const ExtendedOptions &options)
{
    if (H.mode != birkhoff::CoordinateMode::ComplexMorse) {
        throw InvalidArgument("extended scenario expects complex-Morse coordinates");
    }
    H.validate();
    if (N < 4 || N > H.H.trunc()) {
        throw InvalidArgument("N must lie in [4, trunc]");
    }
    const double tol = is_exact_v<C> ? 0.0 : options.tolerance;
    birkhoff::EllipticHamiltonian<C> Hn{H.H.reshaped(with_trunc(H.H.shape_ptr(), N)), H.alpha, H.mode};
    birkhoff::PrenormalOptions popt;
    popt.base_degree = options.base_degree;
    popt.divisor_floor = options.divisor_floor;
    auto pre = birkhoff::prenormal_form(Hn, options.k, popt);

    ExtendedReport<C> rep;
    rep.k = pre.k;
    rep.A = pre.A;
    rep.prenormal = pre.H;
    const int n = static_cast<int>(H.alpha.size());
    rep.basis = basis_in;
    if (rep.basis.empty()) {
        rep.basis = birkhoff::frequency_space(pre.A, 1e-10).basis;
    }
    for (const auto &e : rep.basis) {
        if (static_cast<int>(e.size()) != n) {
            throw DimensionError("basis vectors must have one entry per degree of freedom");
        }
    }
    const int d = static_cast<int>(rep.basis.size());
    auto E = echelon(rep.basis, n, 1e-12);
    rep.reduced_to_fiber = d == 0;

    Scenario<C> S;
    S.lay = SymplecticLayout{n, d, 2};
    S.shape = S.lay.shape(N);
    S.alpha = H.alpha;
    S.basis = rep.basis;
    rep.layout = S.lay;
    const auto &lay = S.lay;
    for (int k = 0; k < n; ++k) {
        Jet<C> x(S.shape);
        for (int i = 0; i < d; ++i) {
            x += Jet<C>::variable(S.shape, lay.lambda(i)) * rep.basis[i][k];
        }
        S.f0.push_back(x);
        S.f0_pow.push_back({Jet<C>::constant(S.shape, from_int<C>(1))});
    }

    // embed the prenormal form and build the model
    Jet<C> G(S.shape);
    for (const auto &[m, c] : pre.H.terms()) {
        MultiIndex mm(lay.num_vars());
        for (int v = 0; v < 2 * n; ++v) {
            mm.set(v, m[v]);
        }
        G.add_term(mm, c);
    }
    Jet<C> model(S.shape);
    for (int k = 0; k < n; ++k) {
        model += S.action(k) * H.alpha[k];
    }
    for (int i = 0; i < d; ++i) {
        Jet<C> ef(S.shape);
        for (int k = 0; k < n; ++k) {
            ef += S.action(k) * rep.basis[i][k];
        }
        Jet<C> mu = Jet<C>::variable(S.shape, lay.mu(i));
        model += mu * ef;
        G += mu * ef;
    }
    rep.G = G;

    // mu-dependent divisor (alpha + sum mu_i e_i, r - s), inverted as a series in mu
    auto inverse_divisor = [&](const MultiIndex &r, const MultiIndex &s, const MultiIndex &full) {
        C lam0 = poisson::ad_eigenvalue(H.alpha, r, s);
        if (is_zero(lam0)) {
            throw ResonanceError("resonance at monomial " + monomial_name(full, lay));
        }
        const double mag = magnitude(lam0);
        if constexpr (!is_exact_v<C>) {
            if (mag <= options.divisor_floor) {
                throw SmallDivisor("divisor below floor at monomial " + monomial_name(full, lay));
            }
        }
        rep.min_divisor = std::min(rep.min_divisor, mag);
        Jet<C> delta(S.shape);
        for (int i = 0; i < d; ++i) {
            C ei = poisson::ad_eigenvalue(rep.basis[i], r, s);
            if (!is_zero(ei)) {
                delta += Jet<C>::variable(S.shape, lay.mu(i)) * ei;
            }
        }
        C inv0 = from_int<C>(1) / lam0;
        Jet<C> ratio = delta * (-inv0);
        Jet<C> term = Jet<C>::constant(S.shape, inv0);
        Jet<C> sum = term;
        while (true) {
            term = term * ratio;
            if (term.is_zero()) {
                break;
            }
            sum += term;
        }
        return sum;
    };

    auto decompose = [&](const std::vector<Jet<C>> &psi, std::vector<Jet<C>> &beta) {
        beta.assign(static_cast<std::size_t>(d), Jet<C>(S.shape));
        for (std::size_t i = 0; i < E.pivots.size(); ++i) {
            const Jet<C> &g = psi[static_cast<std::size_t>(E.pivots[i])];
            if (g.is_zero()) {
                continue;
            }
            for (int j = 0; j < d; ++j) {
                if (!is_zero(E.T[i][j])) {
                    beta[j] += g * E.T[i][j];
                }
            }
        }
        double transverse = 0;
        for (int k = 0; k < n; ++k) {
            Jet<C> rest = psi[k];
            for (int j = 0; j < d; ++j) {
                if (!is_zero(rep.basis[j][k])) {
                    rest -= beta[j] * rep.basis[j][k];
                }
            }
            transverse = std::max(transverse, max_coefficient(rest));
        }
        return transverse;
    };

    for (int deg = 3; deg <= N; ++deg) {
        auto split = class_of<C>((G - model).homogeneous(deg), S);
        Jet<C> chi(S.shape);
        for (const auto &[key, cls] : split.nonresonant) {
            if (max_coefficient(cls) <= tol) {
                continue;
            }
            auto first = cls.terms().begin()->first;
            chi -= cls * inverse_divisor(key.first, key.second, first);
        }
        if (!chi.is_zero()) {
            HamiltonianDerivation<C> u(chi);
            G = poisson::lie_exp(u, G, lay);
            rep.transform.push_back(std::move(u));
            ++rep.hamiltonian_steps;
        }
        if (d > 0) {
            std::vector<Jet<C>> beta;
            decompose(split.psi, beta);
            bool any = false;
            for (auto &b : beta) {
                b = -b;
                any = any || max_coefficient(b) > tol;
            }
            if (any) {
                HamiltonianDerivation<C> u(Jet<C>(S.shape), beta);
                G = poisson::lie_exp(u, G, lay);
                rep.transform.push_back(std::move(u));
                ++rep.shift_steps;
            }
        }
    }
    rep.conjugated = G;

    // certificate: the class of the conjugated Hamiltonian minus the model vanishes
    {
        auto split = class_of<C>(G - model, S);
        double res = 0;
        for (const auto &[key, cls] : split.nonresonant) {
            res = std::max(res, max_coefficient(cls));
        }
        std::vector<Jet<C>> beta;
        rep.transverse_residual = decompose(split.psi, beta);
        for (const auto &b : beta) {
            res = std::max(res, max_coefficient(b));
        }
        rep.class_residual = std::max(res, rep.transverse_residual);
        rep.certified = rep.class_residual <= tol;
    }

    // mu-component of the transform, then solve Phi_mu(lambda, m) = 0 by fixed point
    std::vector<Jet<C>> rho;
    for (int i = 0; i < d; ++i) {
        Jet<C> mu = Jet<C>::variable(S.shape, lay.mu(i));
        rho.push_back(poisson::exp_product(rep.transform, mu, lay) - mu);
    }
    std::vector<Jet<C>> m(static_cast<std::size_t>(d), Jet<C>(S.shape));
    for (int it = 0; it <= N + 1 && d > 0; ++it) {
        std::vector<Jet<C>> subs;
        for (int v = 0; v < lay.num_vars(); ++v) {
            subs.push_back(Jet<C>::variable(S.shape, v));
        }
        for (int i = 0; i < d; ++i) {
            subs[static_cast<std::size_t>(lay.mu(i))] = m[i];
        }
        std::vector<Jet<C>> next;
        bool same = true;
        for (int i = 0; i < d; ++i) {
            next.push_back(-compose(rho[i], subs));
            same = same && next[i] == m[i];
        }
        m = std::move(next);
        if (same) {
            break;
        }
    }
    rep.corrections = m;

    // alpha + sum a_i e_i against grad A at sum lambda_i e_i
    auto grad = birkhoff::frequency_map(pre.A);
    rep.compare_order = std::min(2 * pre.k - 2, N - 2);
    rep.max_mismatch = 0;
    for (int k = 0; k < n; ++k) {
        Jet<C> fr = Jet<C>::constant(S.shape, H.alpha[k]);
        for (int i = 0; i < d; ++i) {
            if (!is_zero(rep.basis[i][k])) {
                fr += m[i] * rep.basis[i][k];
            }
        }
        Jet<C> ref = compose(grad[k], S.f0);
        rep.frequency.push_back(fr);
        rep.reference.push_back(ref);
        rep.max_mismatch =
            std::max(rep.max_mismatch, max_coefficient((fr - ref).truncated(rep.compare_order)));
    }
    rep.matches = rep.max_mismatch <= tol;
    return rep;
}

template ExtendedReport<Rational> extended_scenario(const birkhoff::EllipticHamiltonian<Rational> &,
                                                    const std::vector<std::vector<Rational>> &, int,
                                                    const ExtendedOptions &);
template ExtendedReport<GaussRational> extended_scenario(const birkhoff::EllipticHamiltonian<GaussRational> &,
                                                         const std::vector<std::vector<GaussRational>> &, int,
                                                         const ExtendedOptions &);
template ExtendedReport<double> extended_scenario(const birkhoff::EllipticHamiltonian<double> &,
                                                  const std::vector<std::vector<double>> &, int,
                                                  const ExtendedOptions &);
template ExtendedReport<Complex> extended_scenario(const birkhoff::EllipticHamiltonian<Complex> &,
                                                   const std::vector<std::vector<Complex>> &, int,
                                                   const ExtendedOptions &);

} // namespace kam::engine
