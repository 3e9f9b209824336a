#ifndef KAM_SCALED_NORMS_HPP
#define KAM_SCALED_NORMS_HPP

#include <functional>
#include <optional>
#include <vector>

#include <kam/arithmetic.hpp>
#include <kam/jet.hpp>

namespace kam::scalednorms {

template <class C>
using Operator = std::function<Jet<C>(const Jet<C> &)>;

struct GridPoint {
    double s = 0;
    double sigma = 0;
    double ratio = 0; // max over inputs of |u(x)|_s sigma^k / |x|_{s+sigma}
};

struct BoundednessFit {
    int k = 0;
    double tau = 0;
    double N_hat = 0;
    int basis_degree = 0;
    int grid_size = 0;
    std::vector<GridPoint> grid;
    // location of the maximum
    double max_s = 0;
    double max_sigma = 0;
    MultiIndex max_input;
};

// Grid of (s, sigma) pairs: both log-spaced between tau/200 and tau/2, so s + sigma <= tau.
std::vector<std::pair<double, double>> log_grid(double tau, int grid_size);

// N_hat = max over the grid and over monomial inputs of degree <= basis_degree of
// |u(x)|_s sigma^k / |x|_{s+sigma}, with |.| the l1 majorant norm.
template <class C>
BoundednessFit fit_bounded_constant(const Operator<C> &u, const ShapePtr &shape, int k, double tau,
                                    int basis_degree, int grid_size);

struct ProductReport {
    int count = 0;
    int k = 0;
    double composed_N_hat = 0;
    double bound = 0; // count^k * prod N_hat_i
    double margin = 0; // bound - composed_N_hat
    bool holds = false;
    std::vector<double> factors;
};

// Fits each operator with its own k_i, fits the composition (applied in list
// order) with k = sum k_i, and compares with n^k prod N_hat_i.
template <class C>
ProductReport product_norm_check(const std::vector<Operator<C>> &us, const std::vector<int> &k_list,
                                 const ShapePtr &shape, double tau, int basis_degree, int grid_size);

struct ModerateGrowthReport {
    std::vector<double> values;
    std::vector<double> partial_sums; // sum_{m <= n} log max(1, N_m) / 2^m
    arithmetic::Verdict verdict = arithmetic::Verdict::Inconclusive;
};

// Growth descriptor, when given, describes 1/N_n as a decay sequence and decides the verdict.
ModerateGrowthReport moderate_growth(const std::vector<double> &values,
                                     const std::optional<arithmetic::DecayGenerator> &reciprocal = std::nullopt);

} // namespace kam::scalednorms

#endif
