#ifndef KAM_JET_HPP
#define KAM_JET_HPP

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <kam/errors.hpp>
#include <kam/multi_index.hpp>
#include <kam/scalar.hpp>

namespace kam {

enum class Block { Generic, Q, P, Lambda, Mu };

const char *block_name(Block b);
Block block_from_name(const std::string &name);

struct BlockSpec {
    Block kind;
    int size;
    friend bool operator==(const BlockSpec &, const BlockSpec &) = default;
};

// Variable layout and truncation of a family of jets. Each variable carries
// an integer weight; degrees and orders are weighted (unit weights by default).
class JetShape {
public:
    JetShape(int num_vars, int trunc);
    JetShape(std::vector<BlockSpec> blocks, int trunc, std::vector<int> weights = {});

    int num_vars() const { return num_vars_; }
    int trunc() const { return trunc_; }
    const std::vector<BlockSpec> &blocks() const { return blocks_; }
    const std::vector<int> &weights() const { return weights_; }
    int weight(int v) const { return weights_[static_cast<std::size_t>(v)]; }
    bool unit_weights() const { return unit_weights_; }

    int weighted_degree(const MultiIndex &m) const;
    // Offset of the first variable of a block, or -1 when absent.
    int block_offset(Block kind) const;
    int block_size(Block kind) const;
    std::string describe() const;

    friend bool operator==(const JetShape &a, const JetShape &b)
    {
        return a.trunc_ == b.trunc_ && a.blocks_ == b.blocks_ && a.weights_ == b.weights_;
    }

private:
    int num_vars_ = 0;
    int trunc_ = 0;
    std::vector<BlockSpec> blocks_;
    std::vector<int> weights_;
    bool unit_weights_ = true;
};

using ShapePtr = std::shared_ptr<const JetShape>;

ShapePtr make_shape(int num_vars, int trunc);
ShapePtr make_shape(std::vector<BlockSpec> blocks, int trunc, std::vector<int> weights = {});
ShapePtr with_trunc(const ShapePtr &shape, int trunc);
bool same_shape(const ShapePtr &a, const ShapePtr &b);

// Truncated multivariate power series with sparse storage in graded order.
template <class C>
class Jet {
public:
    using coefficient_type = C;
    using term_map = std::map<MultiIndex, C>;

    Jet() = default;
    explicit Jet(ShapePtr shape);

    static Jet constant(ShapePtr shape, const C &c);
    static Jet variable(ShapePtr shape, int v);
    static Jet monomial(ShapePtr shape, const MultiIndex &m, const C &c);

    const ShapePtr &shape_ptr() const { return shape_; }
    const JetShape &shape() const { return *shape_; }
    int num_vars() const { return shape_->num_vars(); }
    int trunc() const { return shape_->trunc(); }

    const term_map &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    C coefficient(const MultiIndex &m) const;
    // Adds c to the coefficient of m; terms beyond the truncation are dropped.
    void add_term(const MultiIndex &m, const C &c);
    void set_term(const MultiIndex &m, const C &c);

    // Smallest weighted degree carrying a nonzero coefficient; trunc()+1 for 0.
    int ord() const;
    // Largest weighted degree present; -1 for 0.
    int max_degree() const;

    Jet truncated(int degree) const;
    Jet homogeneous(int degree) const;
    Jet filter(const std::function<bool(const MultiIndex &)> &keep) const;
    Jet derivative(int v) const;
    Jet pow(int k) const;
    // Same coefficients under another shape with the same variables.
    Jet reshaped(const ShapePtr &shape) const;

    Jet operator-() const;
    Jet &operator+=(const Jet &o);
    Jet &operator-=(const Jet &o);
    Jet &operator*=(const C &c);
    friend Jet operator+(Jet a, const Jet &b) { return a += b; }
    friend Jet operator-(Jet a, const Jet &b) { return a -= b; }
    friend Jet operator*(Jet a, const C &c) { return a *= c; }
    friend Jet operator*(const C &c, Jet a) { return a *= c; }
    friend Jet operator*(const Jet &a, const Jet &b) { return a.multiply(b); }

    friend bool operator==(const Jet &a, const Jet &b)
    {
        return same_shape(a.shape_, b.shape_) && a.terms_ == b.terms_;
    }
    friend bool operator!=(const Jet &a, const Jet &b) { return !(a == b); }

    double max_abs_coefficient() const;

private:
    Jet multiply(const Jet &o) const;
    void require_same(const Jet &o) const;

    ShapePtr shape_;
    term_map terms_;
};

template <class C>
Jet<C> hadamard(const Jet<C> &f, const Jet<C> &g);

// All-ones jet: the unit of the Hadamard product.
template <class C>
Jet<C> ones(const ShapePtr &shape);

// f(g_1, ..., g_k), truncated at the shape of the g_j. Requires ord(g_j) >= 1.
template <class C>
Jet<C> compose(const Jet<C> &f, const std::vector<Jet<C>> &g);

// Sum |a_i| s^{|i|}: the l1 majorant of the polydisc sup norm.
template <class C>
double sup_norm_bound(const Jet<C> &f, double s);

// Exact L2 norm over the polydisc of radius s.
template <class C>
double l2_norm(const Jet<C> &f, double s);

template <class C>
C evaluate(const Jet<C> &f, std::span<const C> point);

// Coefficient-wise conversion into another coefficient type.
template <class D, class C, class F>
Jet<D> convert(const Jet<C> &f, F fn, ShapePtr shape = nullptr)
{
    Jet<D> out(shape ? shape : f.shape_ptr());
    for (const auto &[m, c] : f.terms()) {
        out.add_term(m, fn(c));
    }
    return out;
}

template <class C>
Jet<complexify_t<C>> complexified(const Jet<C> &f)
{
    return convert<complexify_t<C>>(f, [](const C &c) { return to_complexified(c); });
}

inline Jet<double> to_float(const Jet<Rational> &f)
{
    return convert<double>(f, [](const Rational &c) { return c.get_d(); });
}

inline Jet<Complex> to_float(const Jet<GaussRational> &f)
{
    return convert<Complex>(f, [](const GaussRational &c) { return to_complex(c); });
}

extern template class Jet<Rational>;
extern template class Jet<GaussRational>;
extern template class Jet<double>;
extern template class Jet<Complex>;

} // namespace kam

#endif
