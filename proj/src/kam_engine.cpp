#include <kam/kam_engine.hpp>

#include <algorithm>
#include <cmath>

#include <kam/scaled_norms.hpp>

namespace kam::engine {

int action_pair_count(const MultiIndex &m, const SymplecticLayout &layout)
{
    int pairs = 0;
    for (int k = 0; k < layout.n; ++k) {
        pairs += std::min(m[layout.q(k)], m[layout.p(k)]);
    }
    return pairs;
}

std::string monomial_name(const MultiIndex &m, const SymplecticLayout &layout)
{
    std::string s;
    auto put = [&](const std::string &var, int e) {
        if (e == 0) {
            return;
        }
        if (!s.empty()) {
            s += '*';
        }
        s += var;
        if (e > 1) {
            s += '^' + std::to_string(e);
        }
    };
    for (int k = 0; k < layout.n; ++k) {
        put("q" + std::to_string(k + 1), m[layout.q(k)]);
    }
    for (int k = 0; k < layout.n; ++k) {
        put("p" + std::to_string(k + 1), m[layout.p(k)]);
    }
    for (int i = 0; i < layout.d; ++i) {
        put("lambda" + std::to_string(i + 1), m[layout.lambda(i)]);
    }
    for (int i = 0; i < layout.d; ++i) {
        put("mu" + std::to_string(i + 1), m[layout.mu(i)]);
    }
    return s.empty() ? std::string("1") : s;
}

MonomialSubspace MonomialSubspace::ideal_square(const SymplecticLayout &layout)
{
    return {"I^2", [layout](const MultiIndex &m) { return action_pair_count(m, layout) >= 2; }};
}

template <class C>
Jet<C> project(const Jet<C> &f, const MonomialSubspace &space)
{
    return f.filter(space.contains);
}

template <class C>
Certificate certify_ideal_square(const Jet<C> &r, const SymplecticLayout &layout)
{
    Certificate cert;
    cert.truncation = r.trunc();
    for (const auto &[m, c] : r.terms()) {
        ++cert.checked_terms;
        if (action_pair_count(m, layout) < 2) {
            cert.passed = false;
            cert.offending = m;
            cert.offending_name = monomial_name(m, layout);
            break;
        }
    }
    return cert;
}

namespace {

template <class C>
C checked_divisor(const std::vector<C> &alpha, const MultiIndex &m, const SymplecticLayout &layout,
                  double divisor_floor, QuasiInverseStats *stats)
{
    MultiIndex i = layout.q_part(m);
    MultiIndex j = layout.p_part(m);
    C lam = poisson::ad_eigenvalue(alpha, i, j);
    if (is_zero(lam)) {
        throw ResonanceError("resonant divisor (alpha, i-j) = 0 for monomial " + monomial_name(m, layout));
    }
    double mag = magnitude(lam);
    if constexpr (!is_exact_v<C>) {
        if (mag <= divisor_floor) {
            throw SmallDivisor("divisor |(alpha, i-j)| = " + format_scalar(mag) + " below floor for monomial " +
                               monomial_name(m, layout));
        }
    }
    if (stats) {
        stats->min_divisor = std::min(stats->min_divisor, mag);
        ++stats->solved;
    }
    return lam;
}

// x * g restricted to the listed monomials
template <class C>
Jet<C> divide_by_eigenvalues(const Jet<C> &x, const std::vector<C> &alpha, const SymplecticLayout &layout,
                             double divisor_floor, QuasiInverseStats *stats)
{
    Jet<C> out(x.shape_ptr());
    for (const auto &[m, c] : x.terms()) {
        out.add_term(m, c / checked_divisor(alpha, m, layout, divisor_floor, stats));
    }
    return out;
}

} // namespace

template <class C>
HamiltonianDerivation<C> hadamard_quasi_inverse(const std::vector<C> &alpha, int cutoff, const Jet<C> &target,
                                                const Jet<C> &acc, const SymplecticLayout &layout,
                                                double divisor_floor, QuasiInverseStats *stats)
{
    if (static_cast<int>(alpha.size()) != layout.n) {
        throw DimensionError("frequency vector length does not match the layout");
    }
    const auto &shape = target.shape();
    auto low = [&](const MultiIndex &m) { return shape.weighted_degree(m) <= cutoff; };
    Jet<C> a_part = target.filter([&](const MultiIndex &m) { return low(m) && action_pair_count(m, layout) == 0; });
    Jet<C> b_part = target.filter([&](const MultiIndex &m) { return low(m) && action_pair_count(m, layout) == 1; });
    Jet<C> ag = divide_by_eigenvalues(a_part, alpha, layout, divisor_floor, stats);
    Jet<C> h = ag + divide_by_eigenvalues(b_part, alpha, layout, divisor_floor, stats);
    if (!ag.is_zero() && !acc.is_zero()) {
        Jet<C> corr = poisson::bracket(ag, acc, layout).filter(
            [&](const MultiIndex &m) { return low(m) && action_pair_count(m, layout) == 1; });
        h -= divide_by_eigenvalues(corr, alpha, layout, divisor_floor, stats);
    }
    return HamiltonianDerivation<C>(std::move(h));
}

template <class C>
KamProblem<C> KamProblem<C>::fiber(const std::vector<C> &alpha, const Jet<C> &perturbation)
{
    KamProblem p;
    p.layout = SymplecticLayout::from_shape(perturbation.shape());
    p.alpha = alpha;
    p.model = poisson::quadratic_model(alpha, perturbation.shape_ptr(), p.layout);
    p.perturbation = perturbation;
    p.F = MonomialSubspace::ideal_square(p.layout);
    return p;
}

namespace {

template <class C>
NormLedger make_ledger(const std::vector<double> &s, const KamState<C> &st)
{
    NormLedger l;
    l.s = s;
    for (double x : s) {
        l.a.push_back(sup_norm_bound(st.a, x));
        l.b.push_back(sup_norm_bound(st.b, x));
        l.alpha.push_back(sup_norm_bound(st.alpha, x));
        l.c.push_back(sup_norm_bound(st.c, x));
        l.u.push_back(st.u.h.shape_ptr() ? sup_norm_bound(st.u.h, x) : 0.0);
    }
    return l;
}

} // namespace

template <class C>
KamRun<C> kam_iterate(const KamProblem<C> &pb)
{
    const auto &layout = pb.layout;
    if (!pb.model.shape_ptr() || !pb.perturbation.shape_ptr()) {
        throw InvalidArgument("kam problem needs a model and a perturbation");
    }
    if (!layout.matches(pb.perturbation.shape()) || !same_shape(pb.model.shape_ptr(), pb.perturbation.shape_ptr())) {
        throw ShapeMismatch("model and perturbation must share the problem layout");
    }
    if (pb.model != poisson::quadratic_model(pb.alpha, pb.model.shape_ptr(), layout)) {
        throw InvalidArgument("model must equal sum alpha_k p_k q_k");
    }
    if (!pb.perturbation.is_zero() && pb.perturbation.ord() < 3) {
        throw OrderViolation("perturbation must have order >= 3");
    }
    if (!pb.F.contains) {
        throw InvalidArgument("kam problem needs an F descriptor");
    }
    const ShapePtr &shape = pb.model.shape_ptr();
    const int N = shape->trunc();

    KamRun<C> run;
    Jet<C> a = pb.model;
    Jet<C> b = pb.perturbation;
    Jet<C> acc(shape);
    for (int n = 0; n < pb.max_stages; ++n) {
        KamState<C> st;
        st.stage = n;
        st.a = a;
        st.b = b;
        st.ord_b = b.ord();
        if (b.is_zero()) {
            if (n > 0) {
                break;
            }
            st.alpha = st.c = Jet<C>(shape);
            st.u = HamiltonianDerivation<C>(Jet<C>(shape));
            st.ord_u = N + 1;
            st.cutoff = N;
            st.transform_length = run.transform.size();
            st.ledger = make_ledger(pb.ledger_s, st);
            run.trace.push_back(std::move(st));
            break;
        }
        Jet<C> bbar = b - project(b, pb.F);
        st.cutoff = std::min(N, std::max(pb.base_degree + n, st.ord_b));
        QuasiInverseStats stats;
        st.u = hadamard_quasi_inverse(pb.alpha, st.cutoff, bbar, acc, layout, pb.divisor_floor, &stats);
        st.min_divisor = stats.min_divisor;
        st.ord_u = st.u.h.ord();
        Jet<C> resid = b - st.u.apply(a, layout);
        st.alpha = project(resid, pb.F);
        st.c = resid - st.alpha;

        Jet<C> a_next = a + st.alpha;
        Jet<C> b_next = poisson::lie_exp(-st.u, a + b, layout) - a_next;
        run.transform.push_back(-st.u);
        st.transform_length = run.transform.size();
        st.ledger = make_ledger(pb.ledger_s, st);
        int ord_prev = st.ord_b;
        run.trace.push_back(std::move(st));
        acc += run.trace.back().alpha;
        a = std::move(a_next);
        b = std::move(b_next);
        if (!b.is_zero() && b.ord() <= ord_prev) {
            throw StageError("stage " + std::to_string(n) + ": order of b did not increase (" +
                             std::to_string(ord_prev) + " -> " + std::to_string(b.ord()) + ")");
        }
    }
    run.converged = b.is_zero();
    run.final_model = a;
    run.final_residual = b;
    run.conjugated = poisson::exp_product(run.transform, pb.model + pb.perturbation, layout);
    run.conjugacy_consistent = run.conjugated == a + b;
    run.certificate = certify_ideal_square(run.conjugated - pb.model, layout);
    return run;
}

template <class C>
FiberResult<C> fiber_normalize(const Jet<C> &H, const std::vector<C> &alpha, int N, int base_degree,
                               double divisor_floor)
{
    auto layout = SymplecticLayout::from_shape(H.shape());
    if (layout.d != 0) {
        throw ShapeMismatch("fiber normalization works on (q, p) jets");
    }
    Jet<C> h = H.reshaped(with_trunc(H.shape_ptr(), N));
    Jet<C> model = poisson::quadratic_model(alpha, h.shape_ptr(), layout);
    if (h.truncated(2) != model) {
        throw NonElliptic("quadratic part is not sum alpha_k p_k q_k (or H has terms of degree < 2)");
    }
    auto pb = KamProblem<C>::fiber(alpha, h - model);
    pb.base_degree = base_degree;
    pb.divisor_floor = divisor_floor;
    FiberResult<C> out;
    out.run = kam_iterate(pb);
    out.transform = out.run.transform;
    out.conjugated = out.run.conjugated;
    out.certificate = out.run.certificate;
    return out;
}

bool ResteReport::all_pass() const
{
    return std::all_of(std::begin(checks), std::end(checks), [](const InequalityCheck &c) { return c.pass; });
}

template <class C>
ResteReport reste_inequalities_check(const HamiltonianDerivation<C> &u, const Jet<C> &x, const SymplecticLayout &layout,
                                     double s, double tau, int grid_size)
{
    if (!(s > 0) || !(s < tau)) {
        throw InvalidArgument("need 0 < s < tau");
    }
    ResteReport rep;
    rep.s = s;
    rep.tau = tau;
    scalednorms::Operator<C> op = [&](const Jet<C> &y) { return u.apply(y, layout); };
    rep.N_hat = scalednorms::fit_bounded_constant(op, x.shape_ptr(), 1, tau, x.trunc(), grid_size).N_hat;
    rep.guard = 3 * rep.N_hat / (tau - s);
    rep.guard_ok = rep.guard <= 0.5;

    const double xt = sup_norm_bound(x, tau);
    Jet<C> ux = u.apply(x, layout);
    const double uxt = sup_norm_bound(ux, tau);
    const double gap = tau - s;
    const double Nh = rep.N_hat;
    auto minus_u = -u;
    Jet<C> e_minus_x = poisson::lie_exp(minus_u, x, layout);
    Jet<C> lhs12 = poisson::lie_exp(minus_u, x + ux, layout) - x;
    Jet<C> lhs34 = e_minus_x - x;
    Jet<C> lhs5 = poisson::lie_exp(u, x, layout);

    auto fill = [](InequalityCheck &c, double lhs, double rhs) {
        c.lhs = lhs;
        c.rhs = rhs;
        c.margin = rhs - lhs;
        // equality cases (e.g. u = 0) pass
        c.pass = lhs <= rhs * (1 + 1e-12) + 1e-300;
    };
    fill(rep.checks[0], sup_norm_bound(lhs12, s), 36 * xt / (gap * gap) * Nh * Nh);
    fill(rep.checks[1], sup_norm_bound(lhs12, s), 2 * uxt / gap * Nh);
    fill(rep.checks[2], sup_norm_bound(lhs34, s), 6 * xt / gap * Nh);
    fill(rep.checks[3], sup_norm_bound(lhs34, s), 2 * uxt);
    fill(rep.checks[4], sup_norm_bound(lhs5, s), 2 * xt);
    return rep;
}

#define KAM_INSTANTIATE(C)                                                                         \
    template Jet<C> project(const Jet<C> &, const MonomialSubspace &);                             \
    template Certificate certify_ideal_square(const Jet<C> &, const SymplecticLayout &);           \
    template HamiltonianDerivation<C> hadamard_quasi_inverse(const std::vector<C> &, int, const Jet<C> &, \
                                                             const Jet<C> &, const SymplecticLayout &, double, \
                                                             QuasiInverseStats *);                 \
    template struct KamProblem<C>;                                                                 \
    template KamRun<C> kam_iterate(const KamProblem<C> &);                                         \
    template FiberResult<C> fiber_normalize(const Jet<C> &, const std::vector<C> &, int, int, double); \
    template ResteReport reste_inequalities_check(const HamiltonianDerivation<C> &, const Jet<C> &, \
                                                  const SymplecticLayout &, double, double, int);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam::engine
