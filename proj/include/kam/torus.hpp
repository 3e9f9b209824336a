#ifndef KAM_TORUS_HPP
#define KAM_TORUS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <kam/jet.hpp>
#include <kam/poisson.hpp>

namespace kam::torus {

// Rotation rate convention: each pair z_j = q_j + i p_j is analysed as
// z_j(t) ~ A e^{-i nu t}, so H = sum a_j (p_j^2 + q_j^2) gives nu_j = 2 a_j.
inline constexpr const char *kFrequencyConvention = "nu_j = -omega_j with z_j = q_j + i p_j ~ exp(i omega_j t); "
                                                    "H = sum a_j (p_j^2 + q_j^2) gives nu_j = 2 a_j";
inline constexpr const char *kScheme = "Gauss-Legendre 3-stage implicit Runge-Kutta (order 6, symplectic)";

// Polynomial vector field compiled from a real jet: dq/dt = dH/dp, dp/dt = -dH/dq.
class HamiltonianField {
public:
    explicit HamiltonianField(const Jet<double> &H);

    int n() const { return n_; }
    double energy(const double *x) const;
    void rhs(const double *x, double *out) const;
    double gradient_norm(const double *x) const;

private:
    struct Poly {
        std::vector<double> coef;
        std::vector<std::vector<std::uint8_t>> exps;
    };
    double eval(const Poly &p, const double *x) const;

    int n_ = 1;
    int max_degree_ = 0;
    Poly H_;
    std::vector<Poly> dq_, dp_;
};

struct Trajectory {
    std::vector<double> x0;
    double dt = 0;
    long steps = 0;      // steps requested
    long steps_done = 0; // fewer when the orbit escaped
    int stride = 1;
    std::vector<std::vector<double>> samples; // x at every stride-th step, starting with x0
    double energy0 = 0;
    double energy_drift = 0; // max |H - H0| / max(|H0|, 1e-300)
    bool escaped = false;
};

// escape_radius <= 0 disables the escape test.
Trajectory integrate(const HamiltonianField &field, const std::vector<double> &x0, double dt, long steps,
                     int stride = 1, double escape_radius = 0);
Trajectory integrate(const Jet<double> &H, const std::vector<double> &x0, double dt, long steps, int stride = 1,
                     double escape_radius = 0);

struct WindowEstimate {
    std::vector<double> nu;        // per pair
    std::vector<double> amplitude; // peak amplitude per pair
    bool degenerate = false;       // some pair carries no signal
};

struct FrequencyAnalysis {
    std::vector<WindowEstimate> windows;
    double stability = 0; // max relative inter-window deviation over pairs
    bool degenerate = false;
};

// Dominant rate of a complex signal sampled at spacing dt: Hann window, FFT
// peak, quadratic interpolation, then golden-section refinement of the
// windowed transform magnitude. Returns false for a signal without content.
bool dominant_rate(const std::vector<double> &re, const std::vector<double> &im, double dt, double &nu,
                   double &amplitude);

// Splits the samples (spacing sample_dt) into `windows` consecutive windows.
FrequencyAnalysis frequency_analysis(const std::vector<std::vector<double>> &samples, int n, double sample_dt,
                                     int windows);

enum class OrbitClass { TorusLike, ChaoticOrEscaping, Undecided };
std::string class_name(OrbitClass c);

struct Thresholds {
    double tol_E = 1e-6;
    double tol_nu = 1e-4;
    double escape_factor = 10; // escape radius = factor * r
};

struct IntegrationPlan {
    double dt = 0.025;
    int stride = 4;
    int windows = 2;
    int window_length = 1024;
};

struct OrbitRecord {
    std::vector<double> x0;
    double dt = 0;
    long steps = 0;
    double energy_drift = 0;
    bool escaped = false;
    std::vector<std::vector<double>> window_nu;
    double stability = 0;
    bool degenerate = false;
    OrbitClass classification = OrbitClass::Undecided;
};

OrbitClass classify(const OrbitRecord &rec, const Thresholds &th);

OrbitRecord analyse_orbit(const HamiltonianField &field, const std::vector<double> &x0, double r,
                          const IntegrationPlan &plan, const Thresholds &th);

struct ScanReport {
    double r = 0;
    long samples = 0;
    std::uint64_t seed = 0;
    IntegrationPlan plan;
    Thresholds thresholds;
    long torus_like = 0;
    long chaotic = 0;
    long undecided = 0;
    double fraction = 0;
    double std_error = 0; // binomial
    std::vector<OrbitRecord> orbits;
};

// Samples uniformly in the ball B(0, r) of R^{2n}. Deterministic in (seed, index)
// regardless of jobs.
ScanReport torus_scan(const Jet<double> &H, double r, long samples, std::uint64_t seed, const Thresholds &th = {},
                      const IntegrationPlan &plan = {}, int jobs = 1);

} // namespace kam::torus

#endif
