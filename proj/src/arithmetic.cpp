#include <kam/arithmetic.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <kam/errors.hpp>

namespace kam::arithmetic {

const char *norm_name(IndexNorm norm) { return norm == IndexNorm::Euclidean ? "euclidean" : "sup"; }

const char *verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Moderate:
        return "moderate";
    case Verdict::NotModerate:
        return "not-moderate";
    default:
        return "inconclusive";
    }
}

// ---------------------------------------------------------- FrequencyVector

namespace {

bool finite_value(double x) { return std::isfinite(x); }
bool finite_value(const Rational &) { return true; }

} // namespace

template <class S>
BasicFrequencyVector<S>::BasicFrequencyVector(std::vector<S> components) : components_(std::move(components))
{
    if (components_.empty()) {
        throw DimensionError("frequency vector must have at least one component");
    }
    for (const auto &c : components_) {
        if (!finite_value(c)) {
            throw InvalidArgument("frequency components must be finite");
        }
    }
}

template <class S>
std::vector<double> BasicFrequencyVector<S>::to_double() const
{
    std::vector<double> out;
    for (const auto &c : components_) {
        if constexpr (std::is_same_v<S, Rational>) {
            out.push_back(c.get_d());
        } else {
            out.push_back(c);
        }
    }
    return out;
}

template class BasicFrequencyVector<double>;
template class BasicFrequencyVector<Rational>;

// ----------------------------------------------------------- DecayGenerator

DecayGenerator DecayGenerator::constant(double c)
{
    DecayGenerator g;
    g.kind = Kind::Constant;
    g.scale = c;
    return g;
}

DecayGenerator DecayGenerator::geometric(double c, double ratio)
{
    DecayGenerator g;
    g.kind = Kind::Geometric;
    g.scale = c;
    g.ratio = ratio;
    return g;
}

DecayGenerator DecayGenerator::polynomial(double c, double power)
{
    DecayGenerator g;
    g.kind = Kind::Polynomial;
    g.scale = c;
    g.power = power;
    return g;
}

DecayGenerator DecayGenerator::double_exponential(double c, double rate, double base)
{
    DecayGenerator g;
    g.kind = Kind::DoubleExponential;
    g.scale = c;
    g.rate = rate;
    g.base = base;
    return g;
}

double DecayGenerator::neg_log(int k) const
{
    double ls = std::log(scale);
    switch (kind) {
    case Kind::Constant:
        return -ls;
    case Kind::Geometric:
        return -ls - k * std::log(ratio);
    case Kind::Polynomial:
        return -ls + power * std::log(k + 1.0);
    case Kind::DoubleExponential:
        return -ls + rate * std::pow(base, k);
    default:
        throw InvalidArgument("sequence has no generator");
    }
}

double DecayGenerator::value(int k) const { return std::exp(-neg_log(k)); }

std::string DecayGenerator::describe() const
{
    std::ostringstream s;
    switch (kind) {
    case Kind::Constant:
        s << "constant(" << scale << ")";
        break;
    case Kind::Geometric:
        s << "geometric(" << scale << "," << ratio << ")";
        break;
    case Kind::Polynomial:
        s << "polynomial(" << scale << "," << power << ")";
        break;
    case Kind::DoubleExponential:
        s << "double_exponential(" << scale << "," << rate << "," << base << ")";
        break;
    default:
        s << "none";
    }
    return s.str();
}

// ------------------------------------------------------------ DecaySequence

DecaySequence::DecaySequence(std::vector<double> values, DecayGenerator generator, bool monotone)
    : values_(std::move(values)), generator_(generator), monotone_(monotone)
{
    if (values_.empty()) {
        throw InvalidArgument("decay sequence needs at least a_0");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!(values_[k] > 0) || !std::isfinite(values_[k])) {
            throw InvalidArgument("decay sequence term a_" + std::to_string(k) + " must be positive and finite");
        }
        if (monotone_ && k > 0 && values_[k] > values_[k - 1]) {
            throw InvalidArgument("decay sequence flagged monotone increases at k=" + std::to_string(k));
        }
    }
}

DecaySequence DecaySequence::from_generator(const DecayGenerator &generator, int k_max)
{
    if (generator.kind == DecayGenerator::Kind::None) {
        throw InvalidArgument("generator required");
    }
    if (k_max < 0) {
        throw InvalidArgument("k_max must be nonnegative");
    }
    std::vector<double> v;
    for (int k = 0; k <= k_max; ++k) {
        v.push_back(generator.value(k));
    }
    return DecaySequence(std::move(v), generator, false);
}

double DecaySequence::operator[](int k) const
{
    if (k < 0) {
        throw InvalidArgument("negative sequence index");
    }
    if (k <= k_max()) {
        return values_[static_cast<std::size_t>(k)];
    }
    if (generator_.kind == DecayGenerator::Kind::None) {
        throw InvalidArgument("sequence term a_" + std::to_string(k) + " requested beyond k_max=" +
                              std::to_string(k_max()));
    }
    return generator_.value(k);
}

DecaySequence DecaySequence::times(const DecaySequence &other) const
{
    int K = std::min(k_max(), other.k_max());
    std::vector<double> v;
    for (int k = 0; k <= K; ++k) {
        v.push_back(values_[static_cast<std::size_t>(k)] * other.values_[static_cast<std::size_t>(k)]);
    }
    return DecaySequence(std::move(v));
}

// -------------------------------------------------------------- enumeration

namespace {

long isqrt(long x)
{
    if (x <= 0) {
        return 0;
    }
    auto r = static_cast<long>(std::sqrt(static_cast<double>(x)));
    while (r * r > x) {
        --r;
    }
    while ((r + 1) * (r + 1) <= x) {
        ++r;
    }
    return r;
}

int level_from_norm2(long norm2) { return (std::bit_width(static_cast<unsigned long>(norm2 - 1)) + 1) / 2; }

int level_from_max(long m) { return std::bit_width(static_cast<unsigned long>(m - 1)); }

int level_of(const IntVector &i, long norm2, IndexNorm norm)
{
    if (norm == IndexNorm::Euclidean) {
        return level_from_norm2(norm2);
    }
    long m = 0;
    for (long x : i) {
        m = std::max(m, std::labs(x));
    }
    return level_from_max(m);
}

long radius_for(int k_max)
{
    if (k_max < 0 || k_max > 30) {
        throw InvalidArgument("k_max must lie in [0, 30]");
    }
    return 1L << k_max;
}

// Visits one representative of each pair {i, -i}, i != 0, with ||i|| <= R.
// The representative has its first nonzero coordinate positive.
template <class Visit>
void for_each_half_ball(int n, long R, IndexNorm norm, Visit &&visit)
{
    IntVector i(static_cast<std::size_t>(n), 0);
    const long R2 = R * R;
    auto rec = [&](auto &&self, int v, long used2, bool leading_zero) -> void {
        if (v == n) {
            if (!leading_zero) {
                visit(static_cast<const IntVector &>(i), used2);
            }
            return;
        }
        long r = norm == IndexNorm::Euclidean ? isqrt(R2 - used2) : R;
        long lo = leading_zero ? 0 : -r;
        for (long x = lo; x <= r; ++x) {
            i[static_cast<std::size_t>(v)] = x;
            self(self, v + 1, used2 + x * x, leading_zero && x == 0);
        }
        i[static_cast<std::size_t>(v)] = 0;
    };
    rec(rec, 0, 0, true);
}

template <class T>
T dot_in_order(const std::vector<T> &a, const IntVector &i)
{
    T s(0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        s += a[j] * static_cast<long>(i[j]);
    }
    return s;
}

template <class T>
T abs_value(const T &x)
{
    if constexpr (std::is_same_v<T, mpz_class>) {
        return abs(x);
    } else {
        return x < T(0) ? T(-x) : x;
    }
}

template <class T>
struct LevelMinima {
    std::vector<T> best;
    std::vector<IntVector> witness;
};

template <class T>
LevelMinima<T> level_minima(const std::vector<T> &a, int k_max, IndexNorm norm)
{
    const int n = static_cast<int>(a.size());
    LevelMinima<T> out;
    out.best.resize(static_cast<std::size_t>(k_max) + 1);
    out.witness.resize(static_cast<std::size_t>(k_max) + 1);
    std::vector<bool> have(static_cast<std::size_t>(k_max) + 1, false);
    for_each_half_ball(n, radius_for(k_max), norm, [&](const IntVector &i, long norm2) {
        int lev = level_of(i, norm2, norm);
        T d = abs_value(dot_in_order(a, i));
        auto l = static_cast<std::size_t>(lev);
        if (!have[l] || d < out.best[l]) {
            out.best[l] = d;
            out.witness[l] = i;
            have[l] = true;
        }
    });
    // prefix minimum over levels
    for (std::size_t k = 1; k < out.best.size(); ++k) {
        if (!(out.best[k] < out.best[k - 1])) {
            out.best[k] = out.best[k - 1];
            out.witness[k] = out.witness[k - 1];
        }
    }
    return out;
}

void check_budget(int n, int k_max, const SigmaOptions &options)
{
    radius_for(k_max);
    double est = enumeration_estimate(n, k_max, options.norm);
    if (est > options.enumeration_cap) {
        std::ostringstream s;
        s << "enumeration of about " << est << " lattice points exceeds the cap " << options.enumeration_cap;
        throw BudgetExceeded(s.str());
    }
}

} // namespace

int index_level(const IntVector &i, IndexNorm norm)
{
    long norm2 = 0;
    bool nonzero = false;
    for (long x : i) {
        norm2 += x * x;
        nonzero = nonzero || x != 0;
    }
    if (!nonzero) {
        throw InvalidArgument("level of the zero index is undefined");
    }
    return level_of(i, norm2, norm);
}

double enumeration_estimate(int n, int k_max, IndexNorm norm)
{
    double R = std::ldexp(1.0, k_max);
    if (norm == IndexNorm::Sup) {
        return std::pow(2 * R + 1, n) / 2;
    }
    double vol = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1) * std::pow(R + 1, n);
    return vol / 2;
}

template <class S>
DecaySequence SigmaResult<S>::to_decay() const
{
    std::vector<double> v;
    for (const auto &x : values) {
        if constexpr (std::is_same_v<S, Rational>) {
            v.push_back(x.get_d());
        } else {
            v.push_back(x);
        }
    }
    return DecaySequence(std::move(v), {}, true);
}

template struct SigmaResult<double>;
template struct SigmaResult<Rational>;

SigmaResult<double> sigma(const FrequencyVector &alpha, int k_max, const SigmaOptions &options)
{
    check_budget(alpha.size(), k_max, options);
    auto lm = level_minima(alpha.components(), k_max, options.norm);
    SigmaResult<double> out;
    out.k_max = k_max;
    out.norm = options.norm;
    out.values = std::move(lm.best);
    out.witness = std::move(lm.witness);
    return out;
}

SigmaResult<Rational> sigma(const RationalFrequencyVector &alpha, int k_max, const SigmaOptions &options)
{
    check_budget(alpha.size(), k_max, options);
    mpz_class den = 1;
    for (const auto &c : alpha.components()) {
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    }
    std::vector<mpz_class> num;
    mpz_class bound = 0;
    for (const auto &c : alpha.components()) {
        mpz_class v = c.get_num() * (den / c.get_den());
        bound += abs(v);
        num.push_back(v);
    }
    bound *= radius_for(k_max);
    SigmaResult<Rational> out;
    out.k_max = k_max;
    out.norm = options.norm;
    auto finish = [&](auto &&values) {
        for (const auto &v : values) {
            Rational q{mpz_class(v), den};
            q.canonicalize();
            out.values.push_back(q);
        }
    };
    if (bound < mpz_class("4611686018427387904")) {
        std::vector<long> small;
        for (const auto &v : num) {
            small.push_back(v.get_si());
        }
        auto lm = level_minima(small, k_max, options.norm);
        finish(lm.best);
        out.witness = std::move(lm.witness);
    } else {
        auto lm = level_minima(num, k_max, options.norm);
        finish(lm.best);
        out.witness = std::move(lm.witness);
    }
    return out;
}

// -------------------------------------------------------------------- Bruno

BrunoReport bruno_diagnostic(const DecaySequence &a, int K)
{
    if (K < 0) {
        throw InvalidArgument("K must be nonnegative");
    }
    const auto &gen = a.generator();
    bool has_gen = gen.kind != DecayGenerator::Kind::None;
    if (!has_gen && K > a.k_max()) {
        throw InvalidArgument("sequence defined only up to k=" + std::to_string(a.k_max()));
    }
    BrunoReport rep;
    rep.K = K;
    for (int k = 0; k <= K; ++k) {
        double nl;
        if (k <= a.k_max()) {
            double v = a[k];
            if (!(v > 0)) {
                throw InvalidArgument("nonpositive term a_" + std::to_string(k));
            }
            nl = -std::log(v);
        } else {
            nl = gen.neg_log(k);
        }
        rep.partial_sum += std::max(0.0, nl) / std::ldexp(1.0, k);
    }
    switch (gen.kind) {
    case DecayGenerator::Kind::Constant:
    case DecayGenerator::Kind::Geometric:
    case DecayGenerator::Kind::Polynomial:
        rep.verdict = Verdict::Moderate;
        break;
    case DecayGenerator::Kind::DoubleExponential:
        // -log a_k / 2^k ~ rate (base/2)^k
        rep.verdict = (gen.rate <= 0 || gen.base < 2) ? Verdict::Moderate : Verdict::NotModerate;
        break;
    default:
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

// ----------------------------------------------------------------- in_class

namespace {

void require_terms(const DecaySequence &a, int k_max)
{
    for (int k = 0; k <= k_max; ++k) {
        if (!(a[k] > 0)) {
            throw InvalidArgument("class sequence term a_" + std::to_string(k) + " is not positive");
        }
    }
}

} // namespace

bool in_class(const FrequencyVector &alpha, const DecaySequence &a, int k_max, const SigmaOptions &options)
{
    require_terms(a, k_max);
    auto s = sigma(alpha, k_max, options);
    for (int k = 0; k <= k_max; ++k) {
        if (s.values[static_cast<std::size_t>(k)] < a[k]) {
            return false;
        }
    }
    return true;
}

bool in_class(const RationalFrequencyVector &alpha, const DecaySequence &a, int k_max, const SigmaOptions &options)
{
    require_terms(a, k_max);
    auto s = sigma(alpha, k_max, options);
    for (int k = 0; k <= k_max; ++k) {
        if (s.values[static_cast<std::size_t>(k)] < Rational(a[k])) {
            return false;
        }
    }
    return true;
}

std::optional<IntVector> find_violation(const std::vector<double> &beta, const DecaySequence &b, int k_max,
                                        IndexNorm norm)
{
    const int n = static_cast<int>(beta.size());
    if (n == 0) {
        throw DimensionError("empty frequency vector");
    }
    const long R = radius_for(k_max);
    require_terms(b, k_max);
    // t[l] = max_{k >= l} b_k: an index of level l violates iff |(beta,i)| < t[l].
    std::vector<double> t(static_cast<std::size_t>(k_max) + 1);
    for (int k = k_max; k >= 0; --k) {
        t[static_cast<std::size_t>(k)] = std::max(b[k], k == k_max ? 0.0 : t[static_cast<std::size_t>(k) + 1]);
    }
    const double T = t[0];
    int s = 0;
    for (int j = 1; j < n; ++j) {
        if (std::fabs(beta[static_cast<std::size_t>(j)]) > std::fabs(beta[static_cast<std::size_t>(s)])) {
            s = j;
        }
    }
    const double bs = beta[static_cast<std::size_t>(s)];
    if (bs == 0) {
        IntVector e(static_cast<std::size_t>(n), 0);
        e[0] = 1;
        return e;
    }
    const long R2 = R * R;
    IntVector i(static_cast<std::size_t>(n), 0);
    std::optional<IntVector> found;
    // enumerate the coordinates other than s, solve for i_s
    auto rec = [&](auto &&self, int v, long used2, double partial) -> bool {
        if (v == s) {
            return self(self, v + 1, used2, partial);
        }
        if (v == n) {
            double lo = (-T - partial) / bs;
            double hi = (T - partial) / bs;
            if (lo > hi) {
                std::swap(lo, hi);
            }
            long xlo = static_cast<long>(std::ceil(lo)) - 1;
            long xhi = static_cast<long>(std::floor(hi)) + 1;
            long cap = norm == IndexNorm::Euclidean ? isqrt(R2 - used2) : R;
            xlo = std::max(xlo, -cap);
            xhi = std::min(xhi, cap);
            for (long x = xlo; x <= xhi; ++x) {
                i[static_cast<std::size_t>(s)] = x;
                long norm2 = used2 + x * x;
                if (norm2 == 0) {
                    continue;
                }
                int lev = level_of(i, norm2, norm);
                double d = std::fabs(dot_in_order(beta, i));
                if (d < t[static_cast<std::size_t>(lev)]) {
                    found = i;
                    return true;
                }
            }
            i[static_cast<std::size_t>(s)] = 0;
            return false;
        }
        long r = norm == IndexNorm::Euclidean ? isqrt(R2 - used2) : R;
        for (long x = -r; x <= r; ++x) {
            i[static_cast<std::size_t>(v)] = x;
            if (self(self, v + 1, used2 + x * x, partial + beta[static_cast<std::size_t>(v)] * static_cast<double>(x))) {
                return true;
            }
        }
        i[static_cast<std::size_t>(v)] = 0;
        return false;
    };
    rec(rec, 0, 0, 0.0);
    return found;
}

// ------------------------------------------------------------------ density

MapDescriptor MapDescriptor::identity(int n)
{
    if (n < 1) {
        throw DimensionError("identity map needs n >= 1");
    }
    MapDescriptor m;
    m.kind = Kind::Identity;
    m.in_dim = m.out_dim = n;
    return m;
}

MapDescriptor MapDescriptor::affine(std::vector<std::vector<double>> matrix, std::vector<double> offset)
{
    if (matrix.empty() || matrix.front().empty()) {
        throw InvalidArgument("affine map needs a nonempty matrix");
    }
    MapDescriptor m;
    m.kind = Kind::Affine;
    m.out_dim = static_cast<int>(matrix.size());
    m.in_dim = static_cast<int>(matrix.front().size());
    for (const auto &row : matrix) {
        if (static_cast<int>(row.size()) != m.in_dim) {
            throw InvalidArgument("affine map matrix is ragged");
        }
    }
    if (offset.empty()) {
        offset.assign(static_cast<std::size_t>(m.out_dim), 0.0);
    }
    if (static_cast<int>(offset.size()) != m.out_dim) {
        throw InvalidArgument("affine map offset has the wrong length");
    }
    m.matrix = std::move(matrix);
    m.offset = std::move(offset);
    return m;
}

MapDescriptor MapDescriptor::polynomial(std::vector<Jet<double>> components)
{
    if (components.empty()) {
        throw InvalidArgument("polynomial map needs components");
    }
    MapDescriptor m;
    m.kind = Kind::Polynomial;
    m.out_dim = static_cast<int>(components.size());
    m.in_dim = components.front().num_vars();
    for (const auto &c : components) {
        if (c.num_vars() != m.in_dim) {
            throw InvalidArgument("polynomial map components have different variable counts");
        }
    }
    m.components = std::move(components);
    return m;
}

std::vector<double> MapDescriptor::apply(const std::vector<double> &x) const
{
    if (static_cast<int>(x.size()) != in_dim) {
        throw DimensionError("map input has the wrong dimension");
    }
    switch (kind) {
    case Kind::Identity:
        return x;
    case Kind::Affine: {
        std::vector<double> y = offset;
        for (int r = 0; r < out_dim; ++r) {
            for (int c = 0; c < in_dim; ++c) {
                y[static_cast<std::size_t>(r)] += matrix[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] *
                                                  x[static_cast<std::size_t>(c)];
            }
        }
        return y;
    }
    default: {
        std::vector<double> y;
        for (const auto &c : components) {
            y.push_back(evaluate(c, std::span<const double>(x)));
        }
        return y;
    }
    }
}

std::string MapDescriptor::describe() const
{
    switch (kind) {
    case Kind::Identity:
        return "identity";
    case Kind::Affine:
        return "affine";
    default:
        return "polynomial";
    }
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<double> ball_sample(int d, std::uint64_t seed, std::uint64_t index)
{
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(index)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(d));
    double n2 = 0;
    do {
        n2 = 0;
        for (auto &v : x) {
            v = gauss(gen);
            n2 += v * v;
        }
    } while (n2 == 0);
    double scale = std::pow(unif(gen), 1.0 / d) / std::sqrt(n2);
    for (auto &v : x) {
        v *= scale;
    }
    return x;
}

DensityReport density_estimate(const MapDescriptor &f, const std::vector<double> &x0, const DecaySequence &a,
                               const DecaySequence &rho, double r, long samples, int k_max, std::uint64_t seed,
                               const DensityOptions &options)
{
    if (!(r > 0)) {
        throw InvalidArgument("radius must be positive");
    }
    if (samples <= 0) {
        throw InvalidArgument("sample count must be positive");
    }
    if (static_cast<int>(x0.size()) != f.in_dim) {
        throw InvalidArgument("base point dimension does not match the map");
    }
    if (f.out_dim < 1 || f.in_dim < 1) {
        throw InvalidArgument("invalid map descriptor");
    }
    std::vector<double> bv;
    for (int k = 0; k <= k_max; ++k) {
        bv.push_back(rho[k] * a[k]);
    }
    const DecaySequence b(bv);
    const int d = f.in_dim;

    int jobs = std::max(1, options.jobs);
    std::vector<long> counts(static_cast<std::size_t>(jobs), 0);
    auto work = [&](int w) {
        long c = 0;
        for (long s = w; s < samples; s += jobs) {
            auto u = ball_sample(d, seed, static_cast<std::uint64_t>(s));
            std::vector<double> x(x0);
            for (int j = 0; j < d; ++j) {
                x[static_cast<std::size_t>(j)] += r * u[static_cast<std::size_t>(j)];
            }
            if (!find_violation(f.apply(x), b, k_max, options.norm)) {
                ++c;
            }
        }
        counts[static_cast<std::size_t>(w)] = c;
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    DensityReport rep;
    rep.r = r;
    rep.sample_count = samples;
    rep.k_max = k_max;
    rep.rng_seed = seed;
    for (long c : counts) {
        rep.in_class_count += c;
    }
    rep.fraction_in_class = static_cast<double>(rep.in_class_count) / static_cast<double>(samples);
    rep.center_in_class = !find_violation(f.apply(x0), b, k_max, options.norm);
    return rep;
}

// ------------------------------------------------------------ theorem bound

TheoremBound theorem1_bound(const DecaySequence &rho, int n, int K)
{
    if (n < 1) {
        throw DimensionError("dimension must be positive");
    }
    if (K < 0) {
        throw InvalidArgument("K must be nonnegative");
    }
    TheoremBound out;
    out.K = K;
    for (int k = 0; k <= K; ++k) {
        double rk = rho[k];
        if (!(rk > 0)) {
            throw InvalidArgument("rho_" + std::to_string(k) + " must be positive");
        }
        double root = std::sqrt(rk);
        out.hypothesis_sum += std::ldexp(root, (k + 1) * n + 1);
        out.proof_sum += std::ldexp(root, (k + 1) * n + k);
        out.proof_partial_sums.push_back(out.proof_sum);
    }
    return out;
}

// ------------------------------------------------------------------ lattice

LatticeBasis lattice_basis(const FrequencyVector &alpha)
{
    LatticeBasis b;
    b.n = alpha.size();
    for (int j = 0; j < b.n; ++j) {
        std::vector<double> v(static_cast<std::size_t>(b.n) + 1, 0.0);
        v[static_cast<std::size_t>(j)] = 1.0;
        v[static_cast<std::size_t>(b.n)] = alpha[j];
        b.vectors.push_back(std::move(v));
    }
    return b;
}

ShortestVector flow_and_shortest(const LatticeBasis &basis, double t, int coeff_bound, double enumeration_cap)
{
    if (coeff_bound < 1) {
        throw InvalidArgument("coefficient bound must be at least 1");
    }
    const int n = basis.n;
    if (n < 1 || static_cast<int>(basis.vectors.size()) != n) {
        throw DimensionError("malformed lattice basis");
    }
    if (std::pow(2.0 * coeff_bound + 1, n) / 2 > enumeration_cap) {
        throw BudgetExceeded("coefficient box too large for enumeration");
    }
    // g_t applied to the basis
    std::vector<std::vector<double>> moved = basis.vectors;
    for (auto &v : moved) {
        for (int j = 0; j < n; ++j) {
            v[static_cast<std::size_t>(j)] *= std::exp(-t);
        }
        v[static_cast<std::size_t>(n)] *= std::exp(t);
    }
    ShortestVector best;
    best.delta_estimate = std::numeric_limits<double>::infinity();
    for_each_half_ball(n, coeff_bound, IndexNorm::Sup, [&](const IntVector &c, long) {
        double n2 = 0;
        for (int comp = 0; comp <= n; ++comp) {
            double s = 0;
            for (int j = 0; j < n; ++j) {
                s += static_cast<double>(c[static_cast<std::size_t>(j)]) *
                     moved[static_cast<std::size_t>(j)][static_cast<std::size_t>(comp)];
            }
            n2 += s * s;
        }
        double len = std::sqrt(n2);
        if (len < best.delta_estimate) {
            best.delta_estimate = len;
            best.witness = c;
        }
    });
    return best;
}

EpsT lemma_eps_t(double a, double i_norm)
{
    if (!(a > 0) || !(i_norm > 0)) {
        throw InvalidArgument("lemma parameters must be positive");
    }
    return {std::sqrt(2 * a * i_norm), 0.5 * std::log(i_norm / a)};
}

// ------------------------------------------------------------------- strips

StripReport strip_analysis(const FrequencyVector &alpha, const DecaySequence &a, const DecaySequence &rho, double r,
                           int k_max, const SigmaOptions &options)
{
    if (!(r > 0)) {
        throw InvalidArgument("radius must be positive");
    }
    for (int k = 0; k <= k_max; ++k) {
        if (!(rho[k] > 0) || rho[k] > 1) {
            throw InvalidArgument("rho_k must lie in (0, 1]");
        }
    }
    if (!in_class(alpha, a, k_max, options)) {
        throw InvalidArgument("alpha does not belong to the class D_a up to k_max");
    }
    StripReport rep;
    rep.r = r;
    rep.k_max = k_max;
    const auto &al = alpha.components();
    for_each_half_ball(alpha.size(), radius_for(k_max), options.norm, [&](const IntVector &i, long norm2) {
        StripRecord s;
        s.i = i;
        s.k = level_of(i, norm2, options.norm);
        double len = std::sqrt(static_cast<double>(norm2));
        double ak = a[s.k];
        double rk = rho[s.k];
        s.width = rk * ak / len;
        s.distance = std::fabs(dot_in_order(al, i)) / len;
        s.can_meet = (1 - rk) * ak / std::ldexp(1.0, s.k) < r;
        s.meets = s.distance - s.width < r;
        rep.can_meet_count += s.can_meet;
        rep.meets_count += s.meets;
        rep.strips.push_back(std::move(s));
    });
    return rep;
}

} // namespace kam::arithmetic
