#include <kam/birkhoff.hpp>

#include <algorithm>
#include <cmath>

namespace kam::birkhoff {

template <class C>
SymplecticLayout EllipticHamiltonian<C>::layout() const
{
    return SymplecticLayout::from_shape(H.shape());
}

template <class C>
Jet<C> EllipticHamiltonian<C>::quadratic_part() const
{
    auto lay = layout();
    if (static_cast<int>(alpha.size()) != lay.n) {
        throw DimensionError("frequency vector length does not match the Hamiltonian");
    }
    if (mode == CoordinateMode::ComplexMorse) {
        return poisson::quadratic_model(alpha, H.shape_ptr(), lay);
    }
    Jet<C> q(H.shape_ptr());
    for (int k = 0; k < lay.n; ++k) {
        MultiIndex mq(lay.num_vars());
        mq.set(lay.q(k), 2);
        MultiIndex mp(lay.num_vars());
        mp.set(lay.p(k), 2);
        q.add_term(mq, alpha[static_cast<std::size_t>(k)]);
        q.add_term(mp, alpha[static_cast<std::size_t>(k)]);
    }
    return q;
}

template <class C>
void EllipticHamiltonian<C>::validate() const
{
    auto lay = layout();
    if (lay.d != 0) {
        throw ShapeMismatch("elliptic Hamiltonians live on (q, p) jets");
    }
    if (H.trunc() < 2) {
        throw InvalidArgument("truncation must be at least 2");
    }
    if (H.truncated(2) != quadratic_part()) {
        throw NonElliptic(std::string("quadratic part is not of the declared ") +
                          (mode == CoordinateMode::RealElliptic ? "real-elliptic" : "complex-Morse") + " form");
    }
}

// ---------------------------------------------------------- Morse conversion

template <class R>
MorseConversion<complexify_t<R>> to_complex_morse(const EllipticHamiltonian<R> &H)
{
    using Cc = complexify_t<R>;
    H.validate();
    auto lay = H.layout();
    MorseConversion<Cc> out;
    Jet<Cc> Hc = complexified(H.H);
    const auto &shape = Hc.shape_ptr();
    if (H.mode == CoordinateMode::ComplexMorse) {
        out.H = Hc;
        for (const auto &a : H.alpha) {
            out.alpha.push_back(to_complexified(a));
        }
        for (int v = 0; v < 2 * lay.n; ++v) {
            out.old_in_new.push_back(Jet<Cc>::variable(shape, v));
        }
        out.new_in_old = out.old_in_new;
        out.identity = true;
        return out;
    }
    for (const auto &a : H.alpha) {
        if (is_zero(a)) {
            throw NonElliptic("real-elliptic frequency components must be nonzero");
        }
    }
    const Cc i = imaginary_unit<Cc>();
    const Cc half = from_rational<Cc>(Rational(1, 2));
    const Cc one = from_int<Cc>(1);
    std::vector<Jet<Cc>> qs(static_cast<std::size_t>(lay.n)), ps(qs.size()), Qs(qs.size()), Ps(qs.size());
    for (int k = 0; k < lay.n; ++k) {
        auto Q = Jet<Cc>::variable(shape, lay.q(k));
        auto P = Jet<Cc>::variable(shape, lay.p(k));
        qs[k] = Q * half - P * i;
        ps[k] = Q * (-(i * half)) + P * one;
        // same formulas read in the old variables give the forward map
        Qs[k] = Q + P * i;
        Ps[k] = Q * (i * half) + P * half;
    }
    for (int k = 0; k < lay.n; ++k) {
        out.old_in_new.push_back(qs[k]);
    }
    for (int k = 0; k < lay.n; ++k) {
        out.old_in_new.push_back(ps[k]);
    }
    for (int k = 0; k < lay.n; ++k) {
        out.new_in_old.push_back(Qs[k]);
    }
    for (int k = 0; k < lay.n; ++k) {
        out.new_in_old.push_back(Ps[k]);
    }
    out.H = compose(Hc, out.old_in_new);
    for (const auto &a : H.alpha) {
        out.alpha.push_back(from_int<Cc>(-2) * i * to_complexified(a));
    }
    return out;
}

// ------------------------------------------------------------- normalization

namespace {

template <class C>
C checked_eigenvalue(const std::vector<C> &alpha, const MultiIndex &m, const SymplecticLayout &lay,
                     const BirkhoffOptions &options, double &min_divisor)
{
    C lam = poisson::ad_eigenvalue(alpha, lay.q_part(m), lay.p_part(m));
    if (is_zero(lam)) {
        throw ResonanceError("resonance (alpha, i-j) = 0 at non-resonant monomial " +
                             engine::monomial_name(m, lay));
    }
    double mag = magnitude(lam);
    if constexpr (!is_exact_v<C>) {
        if (mag <= options.divisor_floor) {
            throw SmallDivisor("divisor |(alpha, i-j)| = " + format_scalar(mag) + " below floor at monomial " +
                               engine::monomial_name(m, lay));
        }
    }
    min_divisor = std::min(min_divisor, mag);
    return lam;
}

bool resonant(const MultiIndex &m, const SymplecticLayout &lay) { return lay.q_part(m) == lay.p_part(m); }

} // namespace

template <class C>
BirkhoffResult<C> birkhoff_normalize(const EllipticHamiltonian<C> &H, int l, const BirkhoffOptions &options)
{
    if (H.mode != CoordinateMode::ComplexMorse) {
        throw InvalidArgument("birkhoff_normalize works in complex-Morse coordinates; convert first");
    }
    H.validate();
    if (l < 1) {
        throw InvalidArgument("order l must be at least 1");
    }
    if (H.H.trunc() < 2 * l) {
        throw InvalidArgument("truncation " + std::to_string(H.H.trunc()) + " is below the requested order " +
                              std::to_string(2 * l));
    }
    auto lay = H.layout();
    BirkhoffResult<C> res;
    res.achieved_order = 2 * l;
    res.min_divisor = std::numeric_limits<double>::infinity();
    Jet<C> cur = H.H;
    for (int d = 3; d <= 2 * l; ++d) {
        Jet<C> part = cur.homogeneous(d);
        if (options.strategy == Strategy::PerDegree) {
            Jet<C> chi(cur.shape_ptr());
            for (const auto &[m, c] : part.terms()) {
                if (resonant(m, lay)) {
                    continue;
                }
                chi.add_term(m, -c / checked_eigenvalue(H.alpha, m, lay, options, res.min_divisor));
            }
            if (!chi.is_zero()) {
                HamiltonianDerivation<C> u(std::move(chi));
                cur = poisson::lie_exp(u, cur, lay);
                res.generators.push_back(std::move(u));
            }
        } else {
            for (const auto &[m, c0] : part.terms()) {
                if (resonant(m, lay)) {
                    continue;
                }
                // coefficients at degree d are untouched by eliminating other degree-d monomials
                C c = cur.coefficient(m);
                if (is_zero(c)) {
                    continue;
                }
                HamiltonianDerivation<C> u(
                    Jet<C>::monomial(cur.shape_ptr(), m, -c / checked_eigenvalue(H.alpha, m, lay, options, res.min_divisor)));
                cur = poisson::lie_exp(u, cur, lay);
                res.generators.push_back(std::move(u));
            }
        }
    }
    res.normalized = cur;
    res.A = Jet<C>(make_shape(lay.n, l));
    for (const auto &[m, c] : cur.terms()) {
        if (m.degree() <= 2 * l && resonant(m, lay)) {
            res.A.add_term(lay.q_part(m), c);
        }
    }
    res.residual = cur - actions_to_jet(res.A, cur.shape_ptr(), lay);
    res.residual_order = res.residual.ord();
    return res;
}

template <class C>
Jet<C> actions_to_jet(const Jet<C> &A, const ShapePtr &shape, const SymplecticLayout &layout)
{
    if (A.num_vars() != layout.n) {
        throw DimensionError("action polynomial has the wrong number of variables");
    }
    std::vector<Jet<C>> acts;
    for (int k = 0; k < layout.n; ++k) {
        MultiIndex m(layout.num_vars());
        m.set(layout.q(k), 1);
        m.set(layout.p(k), 1);
        acts.push_back(Jet<C>::monomial(shape, m, from_int<C>(1)));
    }
    return compose(A, acts);
}

template <class C>
Jet<C> real_actions(const Jet<C> &A)
{
    if constexpr (!is_complex_v<C>) {
        throw InvalidArgument("real transport needs complex coefficients");
    } else {
        const C i = imaginary_unit<C>();
        std::vector<C> powers{from_int<C>(1)};
        Jet<C> out(A.shape_ptr());
        for (const auto &[m, c] : A.terms()) {
            while (static_cast<int>(powers.size()) <= m.degree()) {
                powers.push_back(powers.back() * i);
            }
            out.add_term(m, c * powers[static_cast<std::size_t>(m.degree())]);
        }
        return out;
    }
}

template <class C>
std::vector<Jet<C>> frequency_map(const Jet<C> &A)
{
    std::vector<Jet<C>> out;
    for (int k = 0; k < A.num_vars(); ++k) {
        out.push_back(A.derivative(k));
    }
    return out;
}

template <class C>
FrequencySpace<C> frequency_space(const Jet<C> &A, double tolerance)
{
    const int n = A.num_vars();
    auto grad = frequency_map(A);
    FrequencySpace<C> fs;
    MultiIndex zero(n);
    for (const auto &g : grad) {
        fs.base.push_back(g.coefficient(zero));
    }
    // coefficient vectors of the nonconstant part
    std::map<MultiIndex, std::vector<C>> vecs;
    for (int k = 0; k < n; ++k) {
        for (const auto &[m, c] : grad[static_cast<std::size_t>(k)].terms()) {
            if (m.degree() == 0) {
                continue;
            }
            auto &v = vecs.try_emplace(m, std::vector<C>(static_cast<std::size_t>(n), C(0))).first->second;
            v[static_cast<std::size_t>(k)] = c;
        }
    }
    std::vector<std::vector<C>> rows;
    double scale = 0;
    for (auto &[m, v] : vecs) {
        for (const auto &x : v) {
            scale = std::max(scale, magnitude(x));
        }
        rows.push_back(std::move(v));
    }
    auto tiny = [&](const C &x) {
        if constexpr (is_exact_v<C>) {
            return is_zero(x);
        } else {
            return magnitude(x) <= tolerance * std::max(scale, 1e-300);
        }
    };
    // reduced row echelon form
    int r = 0;
    for (int col = 0; col < n && r < static_cast<int>(rows.size()); ++col) {
        int piv = -1;
        double best = 0;
        for (int i = r; i < static_cast<int>(rows.size()); ++i) {
            const C &x = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)];
            if (!tiny(x) && magnitude(x) > best) {
                best = magnitude(x);
                piv = i;
            }
        }
        if (piv < 0) {
            continue;
        }
        std::swap(rows[static_cast<std::size_t>(r)], rows[static_cast<std::size_t>(piv)]);
        auto &pr = rows[static_cast<std::size_t>(r)];
        C inv = from_int<C>(1) / pr[static_cast<std::size_t>(col)];
        for (auto &x : pr) {
            x = x * inv;
        }
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            if (i == r) {
                continue;
            }
            auto &row = rows[static_cast<std::size_t>(i)];
            C f = row[static_cast<std::size_t>(col)];
            if (is_zero(f)) {
                continue;
            }
            for (int c2 = 0; c2 < n; ++c2) {
                row[static_cast<std::size_t>(c2)] = row[static_cast<std::size_t>(c2)] - f * pr[static_cast<std::size_t>(c2)];
                if (tiny(row[static_cast<std::size_t>(c2)])) {
                    row[static_cast<std::size_t>(c2)] = C(0);
                }
            }
        }
        ++r;
    }
    rows.resize(static_cast<std::size_t>(r));
    fs.basis = std::move(rows);
    fs.d = r;
    return fs;
}

template <class C>
FrequencySpace<C> frequency_space(const EllipticHamiltonian<C> &H, int l, const BirkhoffOptions &options)
{
    return frequency_space(birkhoff_normalize(H, l, options).A);
}

template <class C>
PrenormalResult<C> prenormal_form(const EllipticHamiltonian<C> &H, int k, const PrenormalOptions &options)
{
    if (H.mode != CoordinateMode::ComplexMorse) {
        throw InvalidArgument("prenormal_form expects complex-Morse coordinates");
    }
    H.validate();
    auto lay = H.layout();
    const int N = H.H.trunc();
    const Jet<C> H2 = H.quadratic_part();
    PrenormalResult<C> out;
    auto certify = [&](const Jet<C> &Hp) {
        auto cert = engine::certify_ideal_square(Hp - H2, lay);
        if (!cert.passed) {
            throw CertificateFailure("remainder is not in I^2: offending monomial " + cert.offending_name);
        }
        return cert;
    };
    if (!options.normalize) {
        out.H = H.H;
        out.certificate = certify(out.H);
        out.k = k;
        return out;
    }
    auto fiber = engine::fiber_normalize(H.H, H.alpha, N, options.base_degree, options.divisor_floor);
    EllipticHamiltonian<C> Hf{fiber.conjugated, H.alpha, CoordinateMode::ComplexMorse};
    BirkhoffOptions bopt;
    bopt.divisor_floor = options.divisor_floor;
    if (k <= 0) {
        const int kmax = std::max(1, N / 2);
        const int target = frequency_space(Hf, kmax, bopt).d;
        k = 1;
        while (k < kmax && frequency_space(Hf, k, bopt).d < target) {
            ++k;
        }
    }
    auto bres = birkhoff_normalize(Hf, k, bopt);
    out.k = k;
    out.A = bres.A;
    out.H = bres.normalized;
    out.transform = fiber.transform;
    out.transform.insert(out.transform.end(), bres.generators.begin(), bres.generators.end());
    out.certificate = certify(out.H);
    return out;
}

#define KAM_INSTANTIATE(C)                                                                         \
    template struct EllipticHamiltonian<C>;                                                        \
    template MorseConversion<complexify_t<C>> to_complex_morse(const EllipticHamiltonian<C> &);    \
    template BirkhoffResult<C> birkhoff_normalize(const EllipticHamiltonian<C> &, int, const BirkhoffOptions &); \
    template Jet<C> actions_to_jet(const Jet<C> &, const ShapePtr &, const SymplecticLayout &);    \
    template Jet<C> real_actions(const Jet<C> &);                                                  \
    template std::vector<Jet<C>> frequency_map(const Jet<C> &);                                    \
    template FrequencySpace<C> frequency_space(const Jet<C> &, double);                            \
    template FrequencySpace<C> frequency_space(const EllipticHamiltonian<C> &, int, const BirkhoffOptions &); \
    template PrenormalResult<C> prenormal_form(const EllipticHamiltonian<C> &, int, const PrenormalOptions &);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam::birkhoff
