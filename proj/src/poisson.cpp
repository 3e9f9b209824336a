#include <kam/poisson.hpp>

#include <algorithm>

namespace kam::poisson {

ShapePtr SymplecticLayout::shape(int trunc) const
{
    if (n < 1 || d < 0) {
        throw DimensionError("layout needs n >= 1 and d >= 0");
    }
    std::vector<BlockSpec> blocks{{Block::Q, n}, {Block::P, n}};
    std::vector<int> weights(static_cast<std::size_t>(2 * n), 1);
    if (d > 0) {
        blocks.push_back({Block::Lambda, d});
        blocks.push_back({Block::Mu, d});
        weights.resize(static_cast<std::size_t>(num_vars()), param_weight);
    }
    return make_shape(std::move(blocks), trunc, std::move(weights));
}

bool SymplecticLayout::matches(const JetShape &shape) const
{
    if (shape.num_vars() != num_vars()) {
        return false;
    }
    if (shape.block_offset(Block::Q) != 0 || shape.block_size(Block::Q) != n) {
        return false;
    }
    if (shape.block_offset(Block::P) != n || shape.block_size(Block::P) != n) {
        return false;
    }
    if (d > 0) {
        return shape.block_offset(Block::Lambda) == 2 * n && shape.block_size(Block::Lambda) == d &&
               shape.block_offset(Block::Mu) == 2 * n + d && shape.block_size(Block::Mu) == d;
    }
    return true;
}

SymplecticLayout SymplecticLayout::from_shape(const JetShape &shape)
{
    SymplecticLayout l;
    l.n = shape.block_size(Block::Q);
    l.d = shape.block_size(Block::Lambda);
    if (l.n < 1) {
        throw ShapeMismatch("jet has no q/p blocks");
    }
    if (l.d > 0) {
        l.param_weight = shape.weight(l.lambda(0));
    }
    if (!l.matches(shape)) {
        throw ShapeMismatch("jet blocks are not laid out as q, p[, lambda, mu]");
    }
    return l;
}

namespace {

void require_layout(const JetShape &shape, const SymplecticLayout &layout)
{
    if (!layout.matches(shape)) {
        throw ShapeMismatch("jet shape [" + shape.describe() + "] does not match the symplectic layout");
    }
}

} // namespace

// ---------------------------------------------------- HamiltonianDerivation

template <class C>
bool HamiltonianDerivation<C>::is_zero() const
{
    if (h.shape_ptr() && !h.is_zero()) {
        return false;
    }
    return std::all_of(mu_coeffs.begin(), mu_coeffs.end(), [](const Jet<C> &b) { return b.is_zero(); });
}

template <class C>
HamiltonianDerivation<C> HamiltonianDerivation<C>::operator-() const
{
    HamiltonianDerivation r;
    if (h.shape_ptr()) {
        r.h = -h;
    }
    for (const auto &b : mu_coeffs) {
        r.mu_coeffs.push_back(-b);
    }
    return r;
}

template <class C>
HamiltonianDerivation<C> &HamiltonianDerivation<C>::operator+=(const HamiltonianDerivation &o)
{
    if (!h.shape_ptr()) {
        h = o.h;
    } else if (o.h.shape_ptr()) {
        h += o.h;
    }
    if (mu_coeffs.empty()) {
        mu_coeffs = o.mu_coeffs;
    } else if (!o.mu_coeffs.empty()) {
        if (mu_coeffs.size() != o.mu_coeffs.size()) {
            throw DimensionError("derivations have different numbers of mu coefficients");
        }
        for (std::size_t i = 0; i < mu_coeffs.size(); ++i) {
            mu_coeffs[i] += o.mu_coeffs[i];
        }
    }
    return *this;
}

template <class C>
Jet<C> HamiltonianDerivation<C>::apply(const Jet<C> &f, const SymplecticLayout &layout) const
{
    Jet<C> out(f.shape_ptr());
    if (h.shape_ptr() && !h.is_zero()) {
        out += bracket(h, f, layout);
    }
    if (!mu_coeffs.empty()) {
        if (static_cast<int>(mu_coeffs.size()) != layout.d) {
            throw DimensionError("derivation has the wrong number of mu coefficients");
        }
        for (int i = 0; i < layout.d; ++i) {
            const auto &b = mu_coeffs[static_cast<std::size_t>(i)];
            if (!b.is_zero()) {
                out += b * f.derivative(layout.mu(i));
            }
        }
    }
    return out;
}

template <class C>
int HamiltonianDerivation<C>::raise(const SymplecticLayout &layout) const
{
    int r = std::numeric_limits<int>::max();
    if (h.shape_ptr() && !h.is_zero()) {
        r = h.ord() - 2;
    }
    for (int i = 0; i < static_cast<int>(mu_coeffs.size()); ++i) {
        const auto &b = mu_coeffs[static_cast<std::size_t>(i)];
        if (!b.is_zero()) {
            r = std::min(r, b.ord() - b.shape().weight(layout.mu(i)));
        }
    }
    return r;
}

// ------------------------------------------------------------------ bracket

template <class C>
Jet<C> bracket(const Jet<C> &f, const Jet<C> &g, const SymplecticLayout &layout)
{
    require_layout(f.shape(), layout);
    if (!same_shape(f.shape_ptr(), g.shape_ptr())) {
        throw ShapeMismatch("bracket: jet shapes differ");
    }
    Jet<C> out(f.shape_ptr());
    if (f.is_zero() || g.is_zero()) {
        return out;
    }
    for (int k = 0; k < layout.n; ++k) {
        Jet<C> fq = f.derivative(layout.q(k));
        Jet<C> gp = g.derivative(layout.p(k));
        if (!fq.is_zero() && !gp.is_zero()) {
            out += fq * gp;
        }
        Jet<C> fp = f.derivative(layout.p(k));
        Jet<C> gq = g.derivative(layout.q(k));
        if (!fp.is_zero() && !gq.is_zero()) {
            out -= fp * gq;
        }
    }
    return out;
}

template <class C>
C ad_eigenvalue(const std::vector<C> &alpha, const MultiIndex &i, const MultiIndex &j)
{
    if (i.size() != static_cast<int>(alpha.size()) || j.size() != static_cast<int>(alpha.size())) {
        throw DimensionError("ad_eigenvalue: index length does not match frequency vector");
    }
    C s(0);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        int diff = i[static_cast<int>(k)] - j[static_cast<int>(k)];
        if (diff != 0) {
            s += alpha[k] * from_int<C>(diff);
        }
    }
    return s;
}

template <class C>
Jet<C> quadratic_model(const std::vector<C> &alpha, const ShapePtr &shape, const SymplecticLayout &layout)
{
    require_layout(*shape, layout);
    if (static_cast<int>(alpha.size()) != layout.n) {
        throw DimensionError("frequency vector length does not match the layout");
    }
    Jet<C> h(shape);
    for (int k = 0; k < layout.n; ++k) {
        MultiIndex m(layout.num_vars());
        m.set(layout.q(k), 1);
        m.set(layout.p(k), 1);
        h.add_term(m, alpha[static_cast<std::size_t>(k)]);
    }
    return h;
}

// ------------------------------------------------------------- exponentials

template <class C>
Jet<C> lie_exp(const HamiltonianDerivation<C> &u, const Jet<C> &f, const SymplecticLayout &layout)
{
    if (u.is_zero() || f.is_zero()) {
        return f;
    }
    if (u.h.shape_ptr() && !same_shape(u.h.shape_ptr(), f.shape_ptr())) {
        throw ShapeMismatch("lie_exp: generator and argument shapes differ");
    }
    const int raise = u.raise(layout);
    if (raise < 1) {
        // Only a pure parameter shift independent of mu is nilpotent without raising order.
        bool nilpotent = !(u.h.shape_ptr() && !u.h.is_zero());
        for (const auto &b : u.mu_coeffs) {
            for (const auto &[m, c] : b.terms()) {
                for (int i = 0; i < layout.d; ++i) {
                    nilpotent = nilpotent && m[layout.mu(i)] == 0;
                }
            }
        }
        if (!nilpotent) {
            throw OrderTooLow("lie_exp: generator of order " + std::to_string(raise + 2) +
                              " does not raise order; the series does not terminate on jets");
        }
    }
    Jet<C> result = f;
    Jet<C> term = f;
    const int limit = f.trunc() + 2;
    for (int j = 1; j <= limit + 1; ++j) {
        if (j > limit) {
            throw OrderTooLow("lie_exp: series failed to terminate");
        }
        term = u.apply(term, layout);
        if (term.is_zero()) {
            break;
        }
        term *= from_rational<C>(Rational(1, j));
        result += term;
    }
    return result;
}

template <class C>
Jet<C> exp_product(const std::vector<HamiltonianDerivation<C>> &us, const Jet<C> &f, const SymplecticLayout &layout)
{
    Jet<C> out = f;
    for (const auto &u : us) {
        out = lie_exp(u, out, layout);
    }
    return out;
}

template <class C>
std::vector<HamiltonianDerivation<C>> inverse_product(const std::vector<HamiltonianDerivation<C>> &us)
{
    std::vector<HamiltonianDerivation<C>> out;
    for (auto it = us.rbegin(); it != us.rend(); ++it) {
        out.push_back(-*it);
    }
    return out;
}

template <class C>
std::vector<Jet<C>> coordinate_images(const std::vector<HamiltonianDerivation<C>> &us, const ShapePtr &shape,
                                      const SymplecticLayout &layout)
{
    require_layout(*shape, layout);
    std::vector<Jet<C>> out;
    for (int v = 0; v < 2 * layout.n; ++v) {
        out.push_back(exp_product(us, Jet<C>::variable(shape, v), layout));
    }
    return out;
}

namespace {

template <class C>
bool negligible(const C &x, double scale)
{
    if constexpr (is_exact_v<C>) {
        (void)scale;
        return is_zero(x);
    } else {
        return magnitude(x) <= 1e-12 * std::max(1.0, scale);
    }
}

template <class C>
void require_invertible_linear_part(const std::vector<Jet<C>> &images, const SymplecticLayout &layout)
{
    const int m = 2 * layout.n;
    std::vector<std::vector<C>> a(static_cast<std::size_t>(m), std::vector<C>(static_cast<std::size_t>(m), C(0)));
    double scale = 0;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            a[r][c] = images[static_cast<std::size_t>(r)].coefficient(MultiIndex::unit(layout.num_vars(), c));
            scale = std::max(scale, magnitude(a[r][c]));
        }
    }
    for (int col = 0; col < m; ++col) {
        int piv = -1;
        double best = -1;
        for (int r = col; r < m; ++r) {
            if (!negligible(a[r][col], scale) && magnitude(a[r][col]) > best) {
                best = magnitude(a[r][col]);
                piv = r;
            }
        }
        if (piv < 0) {
            throw NonInvertible("transform has a noninvertible linear part");
        }
        std::swap(a[col], a[piv]);
        for (int r = col + 1; r < m; ++r) {
            if (is_zero(a[r][col])) {
                continue;
            }
            C factor = a[r][col] / a[col][col];
            for (int c = col; c < m; ++c) {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
}

} // namespace

template <class C>
double check_symplectic(const std::vector<Jet<C>> &images, const SymplecticLayout &layout)
{
    const int n = layout.n;
    if (static_cast<int>(images.size()) != 2 * n) {
        throw DimensionError("check_symplectic expects images of all q and p");
    }
    for (const auto &im : images) {
        require_layout(im.shape(), layout);
        if (im.ord() < 1) {
            throw OrderViolation("coordinate image has a constant term");
        }
    }
    require_invertible_linear_part(images, layout);
    const int keep = images.front().trunc() - 1;
    double worst = 0;
    auto account = [&](Jet<C> b, bool unit) {
        if (unit) {
            b -= Jet<C>::constant(b.shape_ptr(), from_int<C>(1));
        }
        worst = std::max(worst, b.truncated(keep).max_abs_coefficient());
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto &Qi = images[static_cast<std::size_t>(i)];
            const auto &Pj = images[static_cast<std::size_t>(n + j)];
            account(bracket(Qi, Pj, layout), i == j);
            if (i < j) {
                account(bracket(Qi, images[static_cast<std::size_t>(j)], layout), false);
                account(bracket(images[static_cast<std::size_t>(n + i)], Pj, layout), false);
            }
        }
    }
    return worst;
}

#define KAM_INSTANTIATE(C)                                                                         \
    template struct HamiltonianDerivation<C>;                                                      \
    template Jet<C> bracket(const Jet<C> &, const Jet<C> &, const SymplecticLayout &);             \
    template C ad_eigenvalue(const std::vector<C> &, const MultiIndex &, const MultiIndex &);       \
    template Jet<C> quadratic_model(const std::vector<C> &, const ShapePtr &, const SymplecticLayout &); \
    template Jet<C> lie_exp(const HamiltonianDerivation<C> &, const Jet<C> &, const SymplecticLayout &); \
    template Jet<C> exp_product(const std::vector<HamiltonianDerivation<C>> &, const Jet<C> &,      \
                                const SymplecticLayout &);                                         \
    template std::vector<HamiltonianDerivation<C>> inverse_product(                                \
        const std::vector<HamiltonianDerivation<C>> &);                                            \
    template std::vector<Jet<C>> coordinate_images(const std::vector<HamiltonianDerivation<C>> &,  \
                                                   const ShapePtr &, const SymplecticLayout &);    \
    template double check_symplectic(const std::vector<Jet<C>> &, const SymplecticLayout &);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam::poisson
