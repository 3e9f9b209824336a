#include <kam/scaled_norms.hpp>

#include <cmath>

namespace kam::scalednorms {

std::vector<std::pair<double, double>> log_grid(double tau, int grid_size)
{
    if (!(tau > 0)) {
        throw InvalidArgument("tau must be positive");
    }
    if (grid_size < 1) {
        throw InvalidArgument("empty grid");
    }
    std::vector<double> g;
    for (int a = 0; a < grid_size; ++a) {
        double frac = grid_size == 1 ? 0.0 : static_cast<double>(a) / (grid_size - 1);
        g.push_back(0.5 * tau * std::pow(0.01, frac));
    }
    std::vector<std::pair<double, double>> out;
    for (double s : g) {
        for (double sg : g) {
            out.emplace_back(s, sg);
        }
    }
    return out;
}

namespace {

std::vector<MultiIndex> monomials_up_to(const JetShape &shape, int degree)
{
    std::vector<MultiIndex> out;
    const int n = shape.num_vars();
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto &&self, int v, int used) -> void {
        if (v == n) {
            out.emplace_back(std::span<const int>(e));
            return;
        }
        for (int k = 0; used + k * shape.weight(v) <= degree; ++k) {
            e[static_cast<std::size_t>(v)] = k;
            self(self, v + 1, used + k * shape.weight(v));
        }
        e[static_cast<std::size_t>(v)] = 0;
    };
    rec(rec, 0, 0);
    return out;
}

} // namespace

template <class C>
BoundednessFit fit_bounded_constant(const Operator<C> &u, const ShapePtr &shape, int k, double tau,
                                    int basis_degree, int grid_size)
{
    if (k < 0) {
        throw InvalidArgument("k must be nonnegative");
    }
    if (basis_degree < 0 || basis_degree > shape->trunc()) {
        throw InvalidArgument("basis degree must lie in [0, trunc]");
    }
    auto grid = log_grid(tau, grid_size);
    BoundednessFit fit;
    fit.k = k;
    fit.tau = tau;
    fit.basis_degree = basis_degree;
    fit.grid_size = grid_size;
    auto inputs = monomials_up_to(*shape, basis_degree);
    std::vector<Jet<C>> images;
    for (const auto &m : inputs) {
        images.push_back(u(Jet<C>::monomial(shape, m, from_int<C>(1))));
    }
    for (const auto &[s, sg] : grid) {
        GridPoint gp{s, sg, 0.0};
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            double out_norm = sup_norm_bound(images[i], s);
            if (out_norm == 0) {
                continue;
            }
            double in_norm = std::pow(s + sg, shape->weighted_degree(inputs[i]));
            double ratio = out_norm * std::pow(sg, k) / in_norm;
            if (ratio > gp.ratio) {
                gp.ratio = ratio;
            }
            if (ratio > fit.N_hat) {
                fit.N_hat = ratio;
                fit.max_s = s;
                fit.max_sigma = sg;
                fit.max_input = inputs[i];
            }
        }
        fit.grid.push_back(gp);
    }
    return fit;
}

template <class C>
ProductReport product_norm_check(const std::vector<Operator<C>> &us, const std::vector<int> &k_list,
                                 const ShapePtr &shape, double tau, int basis_degree, int grid_size)
{
    if (us.size() != k_list.size()) {
        throw InvalidArgument("one k per operator required");
    }
    ProductReport rep;
    rep.count = static_cast<int>(us.size());
    double prod = 1;
    for (std::size_t i = 0; i < us.size(); ++i) {
        auto f = fit_bounded_constant(us[i], shape, k_list[i], tau, basis_degree, grid_size);
        rep.factors.push_back(f.N_hat);
        prod *= f.N_hat;
        rep.k += k_list[i];
    }
    Operator<C> composed = [&us](const Jet<C> &x) {
        Jet<C> y = x;
        for (const auto &u : us) {
            y = u(y);
        }
        return y;
    };
    auto fc = fit_bounded_constant(composed, shape, rep.k, tau, basis_degree, grid_size);
    rep.composed_N_hat = fc.N_hat;
    rep.bound = (rep.count == 0 ? 1.0 : std::pow(static_cast<double>(rep.count), rep.k)) * prod;
    rep.margin = rep.bound - rep.composed_N_hat;
    // relative slack absorbs rounding in the grid evaluation
    rep.holds = rep.composed_N_hat <= rep.bound * (1 + 1e-12);
    return rep;
}

ModerateGrowthReport moderate_growth(const std::vector<double> &values,
                                     const std::optional<arithmetic::DecayGenerator> &reciprocal)
{
    ModerateGrowthReport rep;
    rep.values = values;
    double sum = 0;
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (!(values[n] >= 0) || !std::isfinite(values[n])) {
            throw InvalidArgument("growth sequence terms must be finite and nonnegative");
        }
        sum += std::log(std::max(1.0, values[n])) / std::ldexp(1.0, static_cast<int>(n));
        rep.partial_sums.push_back(sum);
    }
    if (reciprocal && reciprocal->kind != arithmetic::DecayGenerator::Kind::None) {
        auto seq = arithmetic::DecaySequence::from_generator(*reciprocal, 0);
        rep.verdict = arithmetic::bruno_diagnostic(seq, 0).verdict;
    }
    return rep;
}

#define KAM_INSTANTIATE(C)                                                                         \
    template BoundednessFit fit_bounded_constant(const Operator<C> &, const ShapePtr &, int, double, int, int); \
    template ProductReport product_norm_check(const std::vector<Operator<C>> &, const std::vector<int> &, \
                                              const ShapePtr &, double, int, int);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam::scalednorms
