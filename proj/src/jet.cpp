#include <kam/jet.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace kam {

// ---------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(int nvars)
{
    if (nvars < 0 || nvars > kMaxVars) {
        throw DimensionError("multi-index length " + std::to_string(nvars) + " outside [0, 16]");
    }
    n_ = static_cast<std::uint8_t>(nvars);
}

MultiIndex::MultiIndex(std::initializer_list<int> exps) : MultiIndex(std::span<const int>(exps.begin(), exps.size()))
{
}

MultiIndex::MultiIndex(std::span<const int> exps) : MultiIndex(static_cast<int>(exps.size()))
{
    for (std::size_t v = 0; v < exps.size(); ++v) {
        set(static_cast<int>(v), exps[v]);
    }
}

void MultiIndex::set(int v, int value)
{
    if (v < 0 || v >= n_) {
        throw DimensionError("variable index out of range");
    }
    if (value < 0 || value > kMaxExponent) {
        throw InvalidArgument("exponent " + std::to_string(value) + " outside [0, 255]");
    }
    auto &slot = e_[static_cast<std::size_t>(v)];
    deg_ = static_cast<std::uint16_t>(deg_ - slot + value);
    slot = static_cast<std::uint8_t>(value);
}

std::vector<int> MultiIndex::to_vector() const
{
    return std::vector<int>(e_.begin(), e_.begin() + n_);
}

MultiIndex MultiIndex::unit(int n, int v)
{
    MultiIndex m(n);
    m.set(v, 1);
    return m;
}

MultiIndex MultiIndex::operator+(const MultiIndex &o) const
{
    if (n_ != o.n_) {
        throw DimensionError("multi-index length mismatch");
    }
    MultiIndex r(*this);
    for (int v = 0; v < n_; ++v) {
        int s = e_[v] + o.e_[v];
        if (s > kMaxExponent) {
            throw InvalidArgument("exponent overflow");
        }
        r.e_[v] = static_cast<std::uint8_t>(s);
    }
    r.deg_ = static_cast<std::uint16_t>(deg_ + o.deg_);
    return r;
}

bool MultiIndex::contains(const MultiIndex &o) const
{
    for (int v = 0; v < n_; ++v) {
        if (o.e_[v] > e_[v]) {
            return false;
        }
    }
    return true;
}

MultiIndex MultiIndex::operator-(const MultiIndex &o) const
{
    if (n_ != o.n_ || !contains(o)) {
        throw InvalidArgument("multi-index subtraction below zero");
    }
    MultiIndex r(*this);
    for (int v = 0; v < n_; ++v) {
        r.e_[v] = static_cast<std::uint8_t>(e_[v] - o.e_[v]);
    }
    r.deg_ = static_cast<std::uint16_t>(deg_ - o.deg_);
    return r;
}

MultiIndex MultiIndex::slice(int offset, int len) const
{
    MultiIndex r(len);
    for (int v = 0; v < len; ++v) {
        r.set(v, e_[offset + v]);
    }
    return r;
}

std::string MultiIndex::to_string() const
{
    std::string s;
    for (int v = 0; v < n_; ++v) {
        if (v) {
            s += ',';
        }
        s += std::to_string(e_[v]);
    }
    return s;
}

std::size_t MultiIndex::hash() const
{
    std::uint64_t h = 1469598103934665603ULL ^ n_;
    for (int v = 0; v < n_; ++v) {
        h = (h ^ e_[v]) * 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

// ------------------------------------------------------------------ JetShape

const char *block_name(Block b)
{
    switch (b) {
    case Block::Q:
        return "q";
    case Block::P:
        return "p";
    case Block::Lambda:
        return "lambda";
    case Block::Mu:
        return "mu";
    default:
        return "z";
    }
}

Block block_from_name(const std::string &name)
{
    if (name == "q") {
        return Block::Q;
    }
    if (name == "p") {
        return Block::P;
    }
    if (name == "lambda") {
        return Block::Lambda;
    }
    if (name == "mu") {
        return Block::Mu;
    }
    if (name == "z" || name == "x") {
        return Block::Generic;
    }
    throw ParseError("unknown block label '" + name + "'");
}

JetShape::JetShape(int num_vars, int trunc) : JetShape(std::vector<BlockSpec>{{Block::Generic, num_vars}}, trunc) {}

JetShape::JetShape(std::vector<BlockSpec> blocks, int trunc, std::vector<int> weights)
    : trunc_(trunc), blocks_(std::move(blocks)), weights_(std::move(weights))
{
    if (trunc < 0) {
        throw InvalidArgument("negative truncation degree");
    }
    for (const auto &b : blocks_) {
        if (b.size < 0) {
            throw DimensionError("negative block size");
        }
        num_vars_ += b.size;
    }
    if (num_vars_ > MultiIndex::kMaxVars) {
        throw DimensionError("too many variables (" + std::to_string(num_vars_) + ")");
    }
    if (weights_.empty()) {
        weights_.assign(static_cast<std::size_t>(num_vars_), 1);
    }
    if (static_cast<int>(weights_.size()) != num_vars_) {
        throw DimensionError("weight vector length does not match variable count");
    }
    for (int w : weights_) {
        if (w < 1) {
            throw InvalidArgument("variable weights must be positive");
        }
        if (w != 1) {
            unit_weights_ = false;
        }
    }
}

int JetShape::weighted_degree(const MultiIndex &m) const
{
    if (unit_weights_) {
        return m.degree();
    }
    int d = 0;
    for (int v = 0; v < num_vars_; ++v) {
        d += weights_[static_cast<std::size_t>(v)] * m[v];
    }
    return d;
}

int JetShape::block_offset(Block kind) const
{
    int off = 0;
    for (const auto &b : blocks_) {
        if (b.kind == kind && b.size > 0) {
            return off;
        }
        off += b.size;
    }
    return -1;
}

int JetShape::block_size(Block kind) const
{
    int n = 0;
    for (const auto &b : blocks_) {
        if (b.kind == kind) {
            n += b.size;
        }
    }
    return n;
}

std::string JetShape::describe() const
{
    std::string s;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (i) {
            s += ',';
        }
        s += block_name(blocks_[i].kind);
        s += ':' + std::to_string(blocks_[i].size);
    }
    return s;
}

ShapePtr make_shape(int num_vars, int trunc) { return std::make_shared<const JetShape>(num_vars, trunc); }

ShapePtr make_shape(std::vector<BlockSpec> blocks, int trunc, std::vector<int> weights)
{
    return std::make_shared<const JetShape>(std::move(blocks), trunc, std::move(weights));
}

ShapePtr with_trunc(const ShapePtr &shape, int trunc)
{
    if (shape->trunc() == trunc) {
        return shape;
    }
    return make_shape(shape->blocks(), trunc, shape->weights());
}

bool same_shape(const ShapePtr &a, const ShapePtr &b)
{
    if (a == b) {
        return true;
    }
    if (!a || !b) {
        return false;
    }
    return *a == *b;
}

// ----------------------------------------------------------------------- Jet

template <class C>
Jet<C>::Jet(ShapePtr shape) : shape_(std::move(shape))
{
    if (!shape_) {
        throw InvalidArgument("jet without shape");
    }
}

template <class C>
Jet<C> Jet<C>::constant(ShapePtr shape, const C &c)
{
    Jet j(std::move(shape));
    j.add_term(MultiIndex(j.num_vars()), c);
    return j;
}

template <class C>
Jet<C> Jet<C>::variable(ShapePtr shape, int v)
{
    Jet j(std::move(shape));
    if (v < 0 || v >= j.num_vars()) {
        throw DimensionError("variable index out of range");
    }
    j.add_term(MultiIndex::unit(j.num_vars(), v), from_int<C>(1));
    return j;
}

template <class C>
Jet<C> Jet<C>::monomial(ShapePtr shape, const MultiIndex &m, const C &c)
{
    Jet j(std::move(shape));
    if (m.size() != j.num_vars()) {
        throw DimensionError("monomial length does not match shape");
    }
    j.add_term(m, c);
    return j;
}

template <class C>
C Jet<C>::coefficient(const MultiIndex &m) const
{
    auto it = terms_.find(m);
    return it == terms_.end() ? C(0) : it->second;
}

template <class C>
void Jet<C>::add_term(const MultiIndex &m, const C &c)
{
    if (is_zero_value(c)) {
        return;
    }
    if (shape_->weighted_degree(m) > shape_->trunc()) {
        return;
    }
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (is_zero_value(it->second)) {
            terms_.erase(it);
        }
    }
}

template <class C>
void Jet<C>::set_term(const MultiIndex &m, const C &c)
{
    if (shape_->weighted_degree(m) > shape_->trunc()) {
        return;
    }
    if (is_zero_value(c)) {
        terms_.erase(m);
    } else {
        terms_[m] = c;
    }
}

template <class C>
int Jet<C>::ord() const
{
    if (terms_.empty()) {
        return shape_->trunc() + 1;
    }
    if (shape_->unit_weights()) {
        return terms_.begin()->first.degree();
    }
    int best = shape_->trunc() + 1;
    for (const auto &[m, c] : terms_) {
        best = std::min(best, shape_->weighted_degree(m));
    }
    return best;
}

template <class C>
int Jet<C>::max_degree() const
{
    if (terms_.empty()) {
        return -1;
    }
    if (shape_->unit_weights()) {
        return terms_.rbegin()->first.degree();
    }
    int best = -1;
    for (const auto &[m, c] : terms_) {
        best = std::max(best, shape_->weighted_degree(m));
    }
    return best;
}

template <class C>
Jet<C> Jet<C>::truncated(int degree) const
{
    return filter([&](const MultiIndex &m) { return shape_->weighted_degree(m) <= degree; });
}

template <class C>
Jet<C> Jet<C>::homogeneous(int degree) const
{
    return filter([&](const MultiIndex &m) { return shape_->weighted_degree(m) == degree; });
}

template <class C>
Jet<C> Jet<C>::filter(const std::function<bool(const MultiIndex &)> &keep) const
{
    Jet r(shape_);
    for (const auto &[m, c] : terms_) {
        if (keep(m)) {
            r.terms_.emplace_hint(r.terms_.end(), m, c);
        }
    }
    return r;
}

template <class C>
Jet<C> Jet<C>::derivative(int v) const
{
    if (v < 0 || v >= num_vars()) {
        throw DimensionError("variable index out of range");
    }
    Jet r(shape_);
    for (const auto &[m, c] : terms_) {
        int e = m[v];
        if (e == 0) {
            continue;
        }
        MultiIndex d(m);
        d.set(v, e - 1);
        r.terms_.emplace(d, c * from_int<C>(e));
    }
    return r;
}

template <class C>
Jet<C> Jet<C>::pow(int k) const
{
    if (k < 0) {
        throw InvalidArgument("negative jet power");
    }
    Jet r = constant(shape_, from_int<C>(1));
    Jet base = *this;
    while (k > 0) {
        if (k & 1) {
            r = r * base;
        }
        k >>= 1;
        if (k) {
            base = base * base;
        }
    }
    return r;
}

template <class C>
Jet<C> Jet<C>::reshaped(const ShapePtr &shape) const
{
    if (shape->num_vars() != num_vars()) {
        throw ShapeMismatch("reshape changes the variable count");
    }
    Jet r(shape);
    for (const auto &[m, c] : terms_) {
        r.add_term(m, c);
    }
    return r;
}

template <class C>
Jet<C> Jet<C>::operator-() const
{
    Jet r(*this);
    for (auto &[m, c] : r.terms_) {
        c = -c;
    }
    return r;
}

template <class C>
void Jet<C>::require_same(const Jet &o) const
{
    if (!same_shape(shape_, o.shape_)) {
        throw ShapeMismatch("jet shapes differ: [" + (shape_ ? shape_->describe() : std::string("none")) + "] vs [" +
                            (o.shape_ ? o.shape_->describe() : std::string("none")) + "]");
    }
}

template <class C>
Jet<C> &Jet<C>::operator+=(const Jet &o)
{
    require_same(o);
    for (const auto &[m, c] : o.terms_) {
        add_term(m, c);
    }
    return *this;
}

template <class C>
Jet<C> &Jet<C>::operator-=(const Jet &o)
{
    require_same(o);
    for (const auto &[m, c] : o.terms_) {
        add_term(m, -c);
    }
    return *this;
}

template <class C>
Jet<C> &Jet<C>::operator*=(const C &c)
{
    if (is_zero_value(c)) {
        terms_.clear();
        return *this;
    }
    for (auto &[m, v] : terms_) {
        v *= c;
    }
    if constexpr (!is_exact_v<C>) {
        std::erase_if(terms_, [](const auto &kv) { return is_zero_value(kv.second); });
    }
    return *this;
}

template <class C>
Jet<C> Jet<C>::multiply(const Jet &o) const
{
    require_same(o);
    Jet r(shape_);
    const int trunc = shape_->trunc();
    const bool unit = shape_->unit_weights();
    for (const auto &[ma, ca] : terms_) {
        const int da = unit ? ma.degree() : shape_->weighted_degree(ma);
        for (const auto &[mb, cb] : o.terms_) {
            const int db = unit ? mb.degree() : shape_->weighted_degree(mb);
            if (da + db > trunc) {
                if (unit) {
                    break; // graded storage: later terms are at least as heavy
                }
                continue;
            }
            auto [it, inserted] = r.terms_.try_emplace(ma + mb, ca);
            if (inserted) {
                it->second *= cb;
            } else {
                it->second += ca * cb;
            }
        }
    }
    std::erase_if(r.terms_, [](const auto &kv) { return is_zero_value(kv.second); });
    return r;
}

template <class C>
double Jet<C>::max_abs_coefficient() const
{
    double m = 0;
    for (const auto &[k, c] : terms_) {
        m = std::max(m, magnitude(c));
    }
    return m;
}

template <class C>
Jet<C> hadamard(const Jet<C> &f, const Jet<C> &g)
{
    if (!same_shape(f.shape_ptr(), g.shape_ptr())) {
        throw ShapeMismatch("hadamard: jet shapes differ");
    }
    Jet<C> r(f.shape_ptr());
    const auto &small = f.size() <= g.size() ? f : g;
    const auto &large = f.size() <= g.size() ? g : f;
    for (const auto &[m, c] : small.terms()) {
        auto it = large.terms().find(m);
        if (it != large.terms().end()) {
            r.add_term(m, c * it->second);
        }
    }
    return r;
}

template <class C>
Jet<C> ones(const ShapePtr &shape)
{
    Jet<C> r(shape);
    const int n = shape->num_vars();
    const int trunc = shape->trunc();
    // Enumerate all exponent vectors of weighted degree <= trunc.
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int v, int used) {
        if (v == n) {
            r.add_term(MultiIndex(std::span<const int>(e)), from_int<C>(1));
            return;
        }
        for (int k = 0; used + k * shape->weight(v) <= trunc; ++k) {
            e[static_cast<std::size_t>(v)] = k;
            rec(v + 1, used + k * shape->weight(v));
        }
        e[static_cast<std::size_t>(v)] = 0;
    };
    rec(0, 0);
    return r;
}

template <class C>
Jet<C> compose(const Jet<C> &f, const std::vector<Jet<C>> &g)
{
    if (static_cast<int>(g.size()) != f.num_vars()) {
        throw DimensionError("compose: expected " + std::to_string(f.num_vars()) + " substitutions, got " +
                             std::to_string(g.size()));
    }
    if (g.empty()) {
        throw DimensionError("compose: nothing to substitute");
    }
    const ShapePtr &shape = g.front().shape_ptr();
    std::vector<int> ords;
    for (const auto &gj : g) {
        if (!same_shape(gj.shape_ptr(), shape)) {
            throw ShapeMismatch("compose: substituted jets have different shapes");
        }
        if (gj.ord() < 1) {
            throw OrderViolation("compose: substituted jet has order 0");
        }
        ords.push_back(gj.ord());
    }
    std::vector<std::vector<Jet<C>>> powers(g.size());
    auto power = [&](std::size_t j, int e) -> const Jet<C> & {
        auto &cache = powers[j];
        if (cache.empty()) {
            cache.push_back(Jet<C>::constant(shape, from_int<C>(1)));
        }
        while (static_cast<int>(cache.size()) <= e) {
            cache.push_back(cache.back() * g[j]);
        }
        return cache[static_cast<std::size_t>(e)];
    };
    Jet<C> r(shape);
    for (const auto &[m, c] : f.terms()) {
        int lowest = 0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            lowest += m[static_cast<int>(j)] * ords[j];
        }
        if (lowest > shape->trunc()) {
            continue;
        }
        Jet<C> term = Jet<C>::constant(shape, c);
        for (std::size_t j = 0; j < g.size() && !term.is_zero(); ++j) {
            int e = m[static_cast<int>(j)];
            if (e > 0) {
                term = term * power(j, e);
            }
        }
        r += term;
    }
    return r;
}

template <class C>
double sup_norm_bound(const Jet<C> &f, double s)
{
    if (!(s > 0)) {
        throw InvalidArgument("norm radius must be positive");
    }
    double sum = 0;
    for (const auto &[m, c] : f.terms()) {
        sum += magnitude(c) * std::pow(s, f.shape().weighted_degree(m));
    }
    return sum;
}

template <class C>
double l2_norm(const Jet<C> &f, double s)
{
    if (!(s > 0)) {
        throw InvalidArgument("norm radius must be positive");
    }
    double sum = 0;
    for (const auto &[m, c] : f.terms()) {
        double w = 1;
        for (int v = 0; v < f.num_vars(); ++v) {
            double rad = std::pow(s, f.shape().weight(v));
            int k = m[v] + 1;
            w *= std::numbers::pi * std::pow(rad, 2 * k) / k;
        }
        double a = magnitude(c);
        sum += a * a * w;
    }
    return std::sqrt(sum);
}

template <class C>
C evaluate(const Jet<C> &f, std::span<const C> point)
{
    if (static_cast<int>(point.size()) != f.num_vars()) {
        throw DimensionError("evaluate: point dimension mismatch");
    }
    C sum(0);
    for (const auto &[m, c] : f.terms()) {
        C t = c;
        for (int v = 0; v < f.num_vars(); ++v) {
            for (int e = 0; e < m[v]; ++e) {
                t *= point[static_cast<std::size_t>(v)];
            }
        }
        sum += t;
    }
    return sum;
}

#define KAM_INSTANTIATE(C)                                                                         \
    template class Jet<C>;                                                                         \
    template Jet<C> hadamard(const Jet<C> &, const Jet<C> &);                                      \
    template Jet<C> ones(const ShapePtr &);                                                        \
    template Jet<C> compose(const Jet<C> &, const std::vector<Jet<C>> &);                          \
    template double sup_norm_bound(const Jet<C> &, double);                                        \
    template double l2_norm(const Jet<C> &, double);                                               \
    template C evaluate(const Jet<C> &, std::span<const C>);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam
