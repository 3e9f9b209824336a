#ifndef KAM_ARITHMETIC_HPP
#define KAM_ARITHMETIC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <kam/jet.hpp>
#include <kam/scalar.hpp>

namespace kam::arithmetic {

enum class IndexNorm { Euclidean, Sup };

const char *norm_name(IndexNorm norm);

using IntVector = std::vector<long>;

// Real (or exactly rational) frequency vector.
template <class S>
class BasicFrequencyVector {
public:
    explicit BasicFrequencyVector(std::vector<S> components);

    int size() const { return static_cast<int>(components_.size()); }
    const S &operator[](int j) const { return components_[static_cast<std::size_t>(j)]; }
    const std::vector<S> &components() const { return components_; }
    std::vector<double> to_double() const;

private:
    std::vector<S> components_;
};

using FrequencyVector = BasicFrequencyVector<double>;
using RationalFrequencyVector = BasicFrequencyVector<Rational>;

enum class Verdict { Moderate, NotModerate, Inconclusive };

const char *verdict_name(Verdict v);

// Closed-form description of a positive sequence, used for extrapolation and
// for definite summability verdicts.
struct DecayGenerator {
    enum class Kind { None, Constant, Geometric, Polynomial, DoubleExponential };

    Kind kind = Kind::None;
    double scale = 1.0; // c
    double ratio = 1.0; // geometric: c r^k
    double power = 0.0; // polynomial: c (k+1)^{-power}
    double rate = 0.0;  // double exponential: c exp(-rate base^k)
    double base = 1.0;

    static DecayGenerator constant(double c);
    static DecayGenerator geometric(double c, double ratio);
    static DecayGenerator polynomial(double c, double power);
    static DecayGenerator double_exponential(double c, double rate, double base);

    double value(int k) const;
    // -log a_k, computed without underflow.
    double neg_log(int k) const;
    std::string describe() const;
};

// Positive sequence (a_k) for k = 0..k_max.
class DecaySequence {
public:
    explicit DecaySequence(std::vector<double> values, DecayGenerator generator = {}, bool monotone = false);
    static DecaySequence from_generator(const DecayGenerator &generator, int k_max);

    int k_max() const { return static_cast<int>(values_.size()) - 1; }
    // a_k; beyond k_max the generator is used when present.
    double operator[](int k) const;
    const std::vector<double> &values() const { return values_; }
    const DecayGenerator &generator() const { return generator_; }
    bool monotone() const { return monotone_; }

    // Pointwise product (rho a)_k.
    DecaySequence times(const DecaySequence &other) const;

private:
    std::vector<double> values_;
    DecayGenerator generator_;
    bool monotone_ = false;
};

struct SigmaOptions {
    IndexNorm norm = IndexNorm::Euclidean;
    // Maximal number of lattice points the enumeration may visit.
    double enumeration_cap = 2e8;
};

template <class S>
struct SigmaResult {
    int k_max = 0;
    IndexNorm norm = IndexNorm::Euclidean;
    std::vector<S> values;          // sigma_k, k = 0..k_max
    std::vector<IntVector> witness; // an index achieving sigma_k

    // Positive values as a monotone decay sequence; throws when some sigma_k = 0.
    DecaySequence to_decay() const;
};

// sigma(alpha)_k = min |(alpha, i)| over nonzero integer i with ||i|| <= 2^k.
SigmaResult<double> sigma(const FrequencyVector &alpha, int k_max, const SigmaOptions &options = {});
SigmaResult<Rational> sigma(const RationalFrequencyVector &alpha, int k_max, const SigmaOptions &options = {});

// Smallest k with ||i|| <= 2^k.
int index_level(const IntVector &i, IndexNorm norm);

// Rough count of points visited when enumerating the ball of radius 2^k_max.
double enumeration_estimate(int n, int k_max, IndexNorm norm);

struct BrunoReport {
    int K = 0;
    double partial_sum = 0;
    Verdict verdict = Verdict::Inconclusive;
};

BrunoReport bruno_diagnostic(const DecaySequence &a, int K);

bool in_class(const FrequencyVector &alpha, const DecaySequence &a, int k_max, const SigmaOptions &options = {});
bool in_class(const RationalFrequencyVector &alpha, const DecaySequence &a, int k_max,
              const SigmaOptions &options = {});

// Membership test that only scans indices close to the resonance hyperplanes.
// Returns a violating index (|(beta,i)| < b_k for some k >= level(i)) or nothing.
std::optional<IntVector> find_violation(const std::vector<double> &beta, const DecaySequence &b, int k_max,
                                        IndexNorm norm = IndexNorm::Euclidean);

// Smooth map R^d -> R^n used to transport samples.
struct MapDescriptor {
    enum class Kind { Identity, Affine, Polynomial };

    Kind kind = Kind::Identity;
    int in_dim = 0;
    int out_dim = 0;
    std::vector<std::vector<double>> matrix; // out_dim rows
    std::vector<double> offset;
    std::vector<Jet<double>> components; // polynomial map, each in in_dim variables

    static MapDescriptor identity(int n);
    static MapDescriptor affine(std::vector<std::vector<double>> matrix, std::vector<double> offset);
    static MapDescriptor polynomial(std::vector<Jet<double>> components);

    std::vector<double> apply(const std::vector<double> &x) const;
    std::string describe() const;
};

struct DensityOptions {
    IndexNorm norm = IndexNorm::Euclidean;
    int jobs = 1;
};

struct DensityReport {
    double r = 0;
    long sample_count = 0;
    int k_max = 0;
    long in_class_count = 0;
    double fraction_in_class = 0;
    std::uint64_t rng_seed = 0;
    bool center_in_class = false;
};

// Uniform point of the unit ball in R^d from the per-sample stream (seed, index).
std::vector<double> ball_sample(int d, std::uint64_t seed, std::uint64_t index);

DensityReport density_estimate(const MapDescriptor &f, const std::vector<double> &x0, const DecaySequence &a,
                               const DecaySequence &rho, double r, long samples, int k_max, std::uint64_t seed,
                               const DensityOptions &options = {});

struct TheoremBound {
    int K = 0;
    double hypothesis_sum = 0; // sum 2^{(k+1)n+1} sqrt(rho_k)
    double proof_sum = 0;      // sum 2^{(k+1)n+k} sqrt(rho_k)
    std::vector<double> proof_partial_sums;
};

TheoremBound theorem1_bound(const DecaySequence &rho, int n, int K);

struct LatticeBasis {
    int n = 0;
    std::vector<std::vector<double>> vectors; // n vectors of length n+1
};

LatticeBasis lattice_basis(const FrequencyVector &alpha);

struct ShortestVector {
    double delta_estimate = 0;
    IntVector witness;
};

// Minimum norm over nonzero combinations with |c_j| <= coeff_bound of the
// basis moved by diag(e^{-t}, ..., e^{-t}, e^{t}).
ShortestVector flow_and_shortest(const LatticeBasis &basis, double t, int coeff_bound, double enumeration_cap = 2e8);

struct EpsT {
    double eps = 0;
    double t = 0;
};

EpsT lemma_eps_t(double a, double i_norm);

struct StripRecord {
    IntVector i;
    int k = 0;             // smallest k with ||i|| <= 2^k
    double width = 0;      // rho_k a_k / ||i||
    double distance = 0;   // dist(alpha, i^perp) = |(alpha, i)| / ||i||
    bool can_meet = false; // (1 - rho_k) a_k / 2^k < r
    bool meets = false;    // distance - width < r
};

struct StripReport {
    double r = 0;
    int k_max = 0;
    std::vector<StripRecord> strips; // one representative per pair {i, -i}
    long can_meet_count = 0;
    long meets_count = 0;
};

StripReport strip_analysis(const FrequencyVector &alpha, const DecaySequence &a, const DecaySequence &rho, double r,
                           int k_max, const SigmaOptions &options = {});

// Stream of 64-bit values from a counter; used for reproducible sampling.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace kam::arithmetic

#endif
