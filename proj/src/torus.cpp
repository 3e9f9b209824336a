#include <kam/torus.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include <fftw3.h>

#include <kam/arithmetic.hpp>

namespace kam::torus {

HamiltonianField::HamiltonianField(const Jet<double> &H)
{
    if (H.num_vars() % 2 != 0 || H.num_vars() == 0) {
        throw DimensionError("Hamiltonian needs an even number of variables (q_1..q_n, p_1..p_n)");
    }
    n_ = H.num_vars() / 2;
    auto compile = [&](const Jet<double> &f) {
        Poly p;
        for (const auto &[m, c] : f.terms()) {
            p.coef.push_back(c);
            std::vector<std::uint8_t> e(static_cast<std::size_t>(2 * n_));
            for (int v = 0; v < 2 * n_; ++v) {
                e[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(m[v]);
                max_degree_ = std::max(max_degree_, m[v]);
            }
            p.exps.push_back(std::move(e));
        }
        return p;
    };
    H_ = compile(H);
    for (int k = 0; k < n_; ++k) {
        dq_.push_back(compile(H.derivative(k)));
        dp_.push_back(compile(H.derivative(n_ + k)));
    }
}

double HamiltonianField::eval(const Poly &p, const double *x) const
{
    // powers table, small fixed size in practice
    thread_local std::vector<double> pw;
    const int stride = max_degree_ + 1;
    pw.resize(static_cast<std::size_t>(2 * n_ * stride));
    for (int v = 0; v < 2 * n_; ++v) {
        double *row = &pw[static_cast<std::size_t>(v * stride)];
        row[0] = 1;
        for (int e = 1; e < stride; ++e) {
            row[e] = row[e - 1] * x[v];
        }
    }
    double s = 0;
    for (std::size_t t = 0; t < p.coef.size(); ++t) {
        double term = p.coef[t];
        const auto &e = p.exps[t];
        for (int v = 0; v < 2 * n_; ++v) {
            if (e[static_cast<std::size_t>(v)]) {
                term *= pw[static_cast<std::size_t>(v * stride + e[static_cast<std::size_t>(v)])];
            }
        }
        s += term;
    }
    return s;
}

double HamiltonianField::energy(const double *x) const { return eval(H_, x); }

void HamiltonianField::rhs(const double *x, double *out) const
{
    for (int k = 0; k < n_; ++k) {
        out[k] = eval(dp_[static_cast<std::size_t>(k)], x);
        out[n_ + k] = -eval(dq_[static_cast<std::size_t>(k)], x);
    }
}

double HamiltonianField::gradient_norm(const double *x) const
{
    std::vector<double> g(static_cast<std::size_t>(2 * n_));
    rhs(x, g.data());
    double s = 0;
    for (double v : g) {
        s += v * v;
    }
    return std::sqrt(s);
}

namespace {

const double s15 = std::sqrt(15.0);
const double GA[3][3] = {{5.0 / 36, 2.0 / 9 - s15 / 15, 5.0 / 36 - s15 / 30},
                         {5.0 / 36 + s15 / 24, 2.0 / 9, 5.0 / 36 - s15 / 24},
                         {5.0 / 36 + s15 / 30, 2.0 / 9 + s15 / 15, 5.0 / 36}};
const double GB[3] = {5.0 / 18, 4.0 / 9, 5.0 / 18};

void gauss_step(const HamiltonianField &f, std::vector<double> &x, double dt, std::vector<double> &K,
                std::vector<double> &tmp, std::vector<double> &Knew)
{
    const int m = 2 * f.n();
    // K holds the previous stage values as initial guess
    for (int it = 0; it < 100; ++it) {
        double change = 0, scale = 0;
        for (int i = 0; i < 3; ++i) {
            for (int v = 0; v < m; ++v) {
                double acc = x[static_cast<std::size_t>(v)];
                for (int j = 0; j < 3; ++j) {
                    acc += dt * GA[i][j] * K[static_cast<std::size_t>(j * m + v)];
                }
                tmp[static_cast<std::size_t>(v)] = acc;
            }
            f.rhs(tmp.data(), &Knew[static_cast<std::size_t>(i * m)]);
        }
        for (std::size_t t = 0; t < K.size(); ++t) {
            change = std::max(change, std::abs(Knew[t] - K[t]));
            scale = std::max(scale, std::abs(Knew[t]));
        }
        K.swap(Knew);
        if (change <= 1e-15 * std::max(scale, 1e-300)) {
            break;
        }
    }
    for (int v = 0; v < m; ++v) {
        double acc = 0;
        for (int i = 0; i < 3; ++i) {
            acc += GB[i] * K[static_cast<std::size_t>(i * m + v)];
        }
        x[static_cast<std::size_t>(v)] += dt * acc;
    }
}

} // namespace

Trajectory integrate(const HamiltonianField &field, const std::vector<double> &x0, double dt, long steps, int stride,
                     double escape_radius)
{
    const int m = 2 * field.n();
    if (static_cast<int>(x0.size()) != m) {
        throw DimensionError("initial point has the wrong dimension");
    }
    if (!(dt > 0) || steps < 0 || stride < 1) {
        throw InvalidArgument("need dt > 0, steps >= 0 and stride >= 1");
    }
    if (dt * field.gradient_norm(x0.data()) > 1.0) {
        throw InvalidArgument("step size too large for the vector field at the initial point");
    }
    Trajectory tr;
    tr.x0 = x0;
    tr.dt = dt;
    tr.steps = steps;
    tr.stride = stride;
    tr.energy0 = field.energy(x0.data());
    const double escale = std::max(std::abs(tr.energy0), 1e-300);
    std::vector<double> x = x0, K(static_cast<std::size_t>(3 * m)), tmp(static_cast<std::size_t>(m)), Knew(K.size());
    tr.samples.push_back(x);
    for (long s = 1; s <= steps; ++s) {
        field.rhs(x.data(), K.data());
        std::copy(K.begin(), K.begin() + m, K.begin() + m);
        std::copy(K.begin(), K.begin() + m, K.begin() + 2 * m);
        gauss_step(field, x, dt, K, tmp, Knew);
        tr.steps_done = s;
        double r2 = 0;
        bool finite = true;
        for (double v : x) {
            r2 += v * v;
            finite = finite && std::isfinite(v);
        }
        if (!finite || (escape_radius > 0 && r2 > escape_radius * escape_radius)) {
            tr.escaped = true;
            break;
        }
        if (s % stride == 0) {
            tr.samples.push_back(x);
            tr.energy_drift = std::max(tr.energy_drift, std::abs(field.energy(x.data()) - tr.energy0) / escale);
        }
    }
    return tr;
}

Trajectory integrate(const Jet<double> &H, const std::vector<double> &x0, double dt, long steps, int stride,
                     double escape_radius)
{
    return integrate(HamiltonianField(H), x0, dt, steps, stride, escape_radius);
}

namespace {

std::mutex plan_mutex;
std::map<int, fftw_plan> plans;

fftw_plan plan_for(int L)
{
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plans.find(L);
    if (it != plans.end()) {
        return it->second;
    }
    auto *in = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(L)));
    auto *out = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(L)));
    fftw_plan p = fftw_plan_dft_1d(L, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(L, p);
    return p;
}

struct FftBuffer {
    fftw_complex *in = nullptr;
    fftw_complex *out = nullptr;
    explicit FftBuffer(int L)
    {
        in = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(L)));
        out = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(L)));
    }
    ~FftBuffer()
    {
        fftw_free(in);
        fftw_free(out);
    }
    FftBuffer(const FftBuffer &) = delete;
    FftBuffer &operator=(const FftBuffer &) = delete;
};

} // namespace

bool dominant_rate(const std::vector<double> &re, const std::vector<double> &im, double dt, double &nu,
                   double &amplitude)
{
    const int L = static_cast<int>(re.size());
    if (L < 4 || im.size() != re.size()) {
        throw InvalidArgument("signal too short or mismatched");
    }
    std::complex<double> mean = 0;
    for (int t = 0; t < L; ++t) {
        mean += std::complex<double>(re[t], im[t]);
    }
    mean /= static_cast<double>(L);
    double var = 0;
    for (int t = 0; t < L; ++t) {
        var += std::norm(std::complex<double>(re[t], im[t]) - mean);
    }
    var /= L;
    if (!(var > 1e-24 * std::max(std::norm(mean), 1e-300)) || var < 1e-300) {
        nu = 0;
        amplitude = 0;
        return false;
    }
    std::vector<double> w(static_cast<std::size_t>(L));
    double wsum = 0;
    for (int t = 0; t < L; ++t) {
        w[t] = 0.5 * (1 - std::cos(2 * std::numbers::pi * t / L));
        wsum += w[t];
    }
    FftBuffer buf(L);
    for (int t = 0; t < L; ++t) {
        buf.in[t][0] = w[t] * re[t];
        buf.in[t][1] = w[t] * im[t];
    }
    fftw_execute_dft(plan_for(L), buf.in, buf.out);
    auto mag = [&](int k) {
        k = ((k % L) + L) % L;
        return std::hypot(buf.out[k][0], buf.out[k][1]);
    };
    int best = 0;
    double bm = -1;
    for (int k = 0; k < L; ++k) {
        double v = mag(k);
        if (v > bm) {
            bm = v;
            best = k;
        }
    }
    double a = mag(best - 1), b = bm, c = mag(best + 1);
    double den = a - 2 * b + c;
    double delta = den != 0 ? 0.5 * (a - c) / den : 0.0;
    const double bin = 2 * std::numbers::pi / (L * dt);
    double kk = best + delta;
    if (kk > L / 2.0) {
        kk -= L;
    }
    double omega0 = kk * bin;
    // magnitude of the windowed transform at omega
    auto S = [&](double omega) {
        std::complex<double> acc = 0;
        const std::complex<double> step = std::polar(1.0, -omega * dt);
        std::complex<double> ph = 1;
        for (int t = 0; t < L; ++t) {
            if (t % 64 == 0) {
                ph = std::polar(1.0, -omega * dt * t);
            }
            acc += w[t] * std::complex<double>(re[t], im[t]) * ph;
            ph *= step;
        }
        return std::abs(acc);
    };
    double lo = omega0 - bin, hi = omega0 + bin;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = S(x1), f2 = S(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(omega0)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = S(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = S(x1);
        }
    }
    double omega = 0.5 * (lo + hi);
    amplitude = S(omega) / wsum;
    nu = -omega;
    return true;
}

FrequencyAnalysis frequency_analysis(const std::vector<std::vector<double>> &samples, int n, double sample_dt,
                                     int windows)
{
    if (windows < 2) {
        throw InvalidArgument("frequency analysis needs at least 2 windows");
    }
    const int len = static_cast<int>(samples.size()) / windows;
    if (len < 64) {
        throw InvalidArgument("windows need at least 64 samples");
    }
    FrequencyAnalysis fa;
    for (int w = 0; w < windows; ++w) {
        WindowEstimate we;
        for (int j = 0; j < n; ++j) {
            std::vector<double> re(static_cast<std::size_t>(len)), im(static_cast<std::size_t>(len));
            for (int t = 0; t < len; ++t) {
                const auto &x = samples[static_cast<std::size_t>(w * len + t)];
                re[t] = x[static_cast<std::size_t>(j)];
                im[t] = x[static_cast<std::size_t>(n + j)];
            }
            double nu = 0, amp = 0;
            if (!dominant_rate(re, im, sample_dt, nu, amp)) {
                we.degenerate = true;
            }
            we.nu.push_back(nu);
            we.amplitude.push_back(amp);
        }
        fa.degenerate = fa.degenerate || we.degenerate;
        fa.windows.push_back(std::move(we));
    }
    for (int j = 0; j < n; ++j) {
        double lo = fa.windows[0].nu[j], hi = lo, mean = 0;
        for (const auto &we : fa.windows) {
            lo = std::min(lo, we.nu[j]);
            hi = std::max(hi, we.nu[j]);
            mean += we.nu[j];
        }
        mean /= windows;
        fa.stability = std::max(fa.stability, (hi - lo) / std::max(std::abs(mean), 1e-300));
    }
    return fa;
}

std::string class_name(OrbitClass c)
{
    switch (c) {
    case OrbitClass::TorusLike:
        return "torus-like";
    case OrbitClass::ChaoticOrEscaping:
        return "chaotic/escaping";
    case OrbitClass::Undecided:
        return "undecided";
    }
    return "undecided";
}

OrbitClass classify(const OrbitRecord &rec, const Thresholds &th)
{
    if (rec.escaped) {
        return OrbitClass::ChaoticOrEscaping;
    }
    if (rec.degenerate) {
        return OrbitClass::Undecided;
    }
    if (rec.energy_drift < th.tol_E && rec.stability < th.tol_nu) {
        return OrbitClass::TorusLike;
    }
    return OrbitClass::ChaoticOrEscaping;
}

OrbitRecord analyse_orbit(const HamiltonianField &field, const std::vector<double> &x0, double r,
                          const IntegrationPlan &plan, const Thresholds &th)
{
    OrbitRecord rec;
    rec.x0 = x0;
    rec.dt = plan.dt;
    const long total = static_cast<long>(plan.windows) * plan.window_length;
    rec.steps = total * plan.stride;
    auto tr = integrate(field, x0, plan.dt, rec.steps, plan.stride, th.escape_factor * r);
    rec.energy_drift = tr.energy_drift;
    rec.escaped = tr.escaped;
    if (!rec.escaped) {
        tr.samples.resize(static_cast<std::size_t>(total));
        auto fa = frequency_analysis(tr.samples, field.n(), plan.dt * plan.stride, plan.windows);
        for (const auto &we : fa.windows) {
            rec.window_nu.push_back(we.nu);
        }
        rec.stability = fa.stability;
        rec.degenerate = fa.degenerate;
    }
    rec.classification = classify(rec, th);
    return rec;
}

ScanReport torus_scan(const Jet<double> &H, double r, long samples, std::uint64_t seed, const Thresholds &th,
                      const IntegrationPlan &plan, int jobs)
{
    if (samples <= 0) {
        throw InvalidArgument("sample count must be positive");
    }
    if (!(r > 0)) {
        throw InvalidArgument("radius must be positive");
    }
    for (const auto &[m, c] : H.terms()) {
        if (m.degree() == 1) {
            throw NonElliptic("Hamiltonian has linear terms: the origin is not a critical point");
        }
    }
    HamiltonianField field(H);
    const int dim = 2 * field.n();
    ScanReport rep;
    rep.r = r;
    rep.samples = samples;
    rep.seed = seed;
    rep.plan = plan;
    rep.thresholds = th;
    rep.orbits.resize(static_cast<std::size_t>(samples));
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(samples)));
    auto work = [&](int w) {
        for (long s = w; s < samples; s += jobs) {
            auto u = arithmetic::ball_sample(dim, seed, static_cast<std::uint64_t>(s));
            for (auto &v : u) {
                v *= r;
            }
            rep.orbits[static_cast<std::size_t>(s)] = analyse_orbit(field, u, r, plan, th);
        }
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
    for (const auto &o : rep.orbits) {
        switch (o.classification) {
        case OrbitClass::TorusLike:
            ++rep.torus_like;
            break;
        case OrbitClass::ChaoticOrEscaping:
            ++rep.chaotic;
            break;
        case OrbitClass::Undecided:
            ++rep.undecided;
            break;
        }
    }
    rep.fraction = static_cast<double>(rep.torus_like) / static_cast<double>(samples);
    rep.std_error = std::sqrt(rep.fraction * (1 - rep.fraction) / static_cast<double>(samples));
    return rep;
}

} // namespace kam::torus
