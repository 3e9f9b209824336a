#include "kamtool.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include <kam/arithmetic.hpp>
#include <kam/birkhoff.hpp>
#include <kam/jet_io.hpp>
#include <kam/kam_engine.hpp>
#include <kam/torus.hpp>

#include "polynomial.hpp"

namespace kamtool {

namespace ar = kam::arithmetic;
namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Parameter access with defaults; the resolved values form the normalized config.
class Params {
public:
    Params(const json &j, std::string command) : j_(j), command_(std::move(command))
    {
        if (!j_.is_object()) {
            throw SchemaError(command_ + ": params must be an object");
        }
    }

    bool has(const std::string &key) const { return j_.contains(key) && !j_[key].is_null(); }

    template <class T>
    T get(const std::string &key, const T &def)
    {
        seen_.insert(key);
        T v = def;
        if (has(key)) {
            try {
                v = j_[key].get<T>();
            } catch (const json::exception &) {
                throw SchemaError(command_ + ": parameter '" + key + "' has the wrong type");
            }
        }
        norm_[key] = v;
        return v;
    }

    template <class T>
    T need(const std::string &key)
    {
        if (!has(key)) {
            throw SchemaError(command_ + ": missing parameter '" + key + "'");
        }
        return get<T>(key, T{});
    }

    json raw(const std::string &key)
    {
        seen_.insert(key);
        return has(key) ? j_[key] : json();
    }

    void record(const std::string &key, json v)
    {
        seen_.insert(key);
        norm_[key] = std::move(v);
    }

    json finish()
    {
        for (const auto &[k, v] : j_.items()) {
            if (!seen_.count(k)) {
                throw SchemaError(command_ + ": unknown parameter '" + k + "'");
            }
        }
        return norm_;
    }

private:
    const json &j_;
    std::string command_;
    std::set<std::string> seen_;
    json norm_ = json::object();
};

struct Context {
    std::string mode = "float";
    std::uint64_t seed = 0;
    int jobs = 1;
    bool rational() const { return mode == "rational"; }
};

// Scalar lists are normalized to arrays of strings.
std::vector<std::string> scalar_list(Params &p, const std::string &key, bool required = true)
{
    json v = p.raw(key);
    std::vector<std::string> out;
    if (v.is_null()) {
        if (required) {
            throw SchemaError("missing parameter '" + key + "'");
        }
        return out;
    }
    auto push = [&](const json &x) {
        if (x.is_string()) {
            out.push_back(x.get<std::string>());
        } else if (x.is_number()) {
            out.push_back(x.dump());
        } else {
            throw SchemaError("parameter '" + key + "' must hold numbers or strings");
        }
    };
    if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            auto a = tok.find_first_not_of(" \t");
            auto b = tok.find_last_not_of(" \t");
            if (a != std::string::npos) {
                out.push_back(tok.substr(a, b - a + 1));
            }
        }
    } else if (v.is_array()) {
        for (const auto &x : v) {
            push(x);
        }
    } else {
        push(v);
    }
    if (out.empty()) {
        throw SchemaError("parameter '" + key + "' is empty");
    }
    p.record(key, out);
    return out;
}

double to_double(const std::string &s)
{
    char *end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        // rational forms like 987/610
        return kam::parse_rational(s).get_d();
    }
    return v;
}

std::vector<double> doubles(const std::vector<std::string> &v)
{
    std::vector<double> out;
    for (const auto &s : v) {
        out.push_back(to_double(s));
    }
    return out;
}

std::vector<kam::Rational> rationals(const std::vector<std::string> &v)
{
    std::vector<kam::Rational> out;
    for (const auto &s : v) {
        out.push_back(kam::parse_rational(s));
    }
    return out;
}

ar::IndexNorm norm_of(Params &p)
{
    auto s = p.get<std::string>("norm", "euclidean");
    if (s == "euclidean") {
        return ar::IndexNorm::Euclidean;
    }
    if (s == "sup") {
        return ar::IndexNorm::Sup;
    }
    throw SchemaError("norm must be euclidean or sup");
}

ar::DecayGenerator generator_of(const json &g)
{
    if (!g.is_object() || !g.contains("kind") || !g["kind"].is_string()) {
        throw SchemaError("generator must be an object with a kind");
    }
    auto num = [&](const char *k, double def) {
        if (!g.contains(k)) {
            return def;
        }
        if (!g[k].is_number()) {
            throw SchemaError(std::string("generator field '") + k + "' must be a number");
        }
        return g[k].get<double>();
    };
    for (const auto &[k, v] : g.items()) {
        static const std::set<std::string> ok{"kind", "c", "ratio", "power", "rate", "base"};
        if (!ok.count(k)) {
            throw SchemaError("unknown generator field '" + k + "'");
        }
    }
    std::string kind = g["kind"];
    try {
        if (kind == "constant") {
            return ar::DecayGenerator::constant(num("c", 1));
        }
        if (kind == "geometric") {
            return ar::DecayGenerator::geometric(num("c", 1), num("ratio", 0.5));
        }
        if (kind == "polynomial") {
            return ar::DecayGenerator::polynomial(num("c", 1), num("power", 2));
        }
        if (kind == "double_exponential") {
            return ar::DecayGenerator::double_exponential(num("c", 1), num("rate", 1), num("base", 2));
        }
    } catch (const kam::Error &e) {
        throw SchemaError(std::string("generator: ") + e.what());
    }
    throw SchemaError("unknown generator kind '" + kind + "'");
}

json generator_json(const ar::DecayGenerator &g)
{
    using K = ar::DecayGenerator::Kind;
    switch (g.kind) {
    case K::Constant:
        return {{"kind", "constant"}, {"c", g.scale}};
    case K::Geometric:
        return {{"kind", "geometric"}, {"c", g.scale}, {"ratio", g.ratio}};
    case K::Polynomial:
        return {{"kind", "polynomial"}, {"c", g.scale}, {"power", g.power}};
    case K::DoubleExponential:
        return {{"kind", "double_exponential"}, {"c", g.scale}, {"rate", g.rate}, {"base", g.base}};
    case K::None:
        break;
    }
    return nullptr;
}

ar::DecayGenerator generator_param(Params &p, const std::string &key, const ar::DecayGenerator &def)
{
    json v = p.raw(key);
    ar::DecayGenerator g = v.is_null() ? def : generator_of(v);
    p.record(key, generator_json(g));
    return g;
}

// "sigma" or a generator object
ar::DecaySequence a_param(Params &p, const ar::FrequencyVector &alpha, int kmax, ar::IndexNorm norm)
{
    json v = p.raw("a");
    if (v.is_null() || v == "sigma") {
        p.record("a", "sigma");
        ar::SigmaOptions so;
        so.norm = norm;
        return ar::sigma(alpha, kmax, so).to_decay();
    }
    auto g = generator_of(v);
    p.record("a", generator_json(g));
    return ar::DecaySequence::from_generator(g, kmax);
}

template <class C>
json scalar_json(const C &x)
{
    if constexpr (std::is_same_v<C, double>) {
        return x;
    } else if constexpr (std::is_same_v<C, kam::Rational>) {
        return x.get_str();
    } else if constexpr (std::is_same_v<C, kam::GaussRational>) {
        return json::array({x.re.get_str(), x.im.get_str()});
    } else {
        return json::array({x.real(), x.imag()});
    }
}

json index_json(const ar::IntVector &i) { return json(i); }

// ------------------------------------------------------------------- sigma

json cmd_sigma(Params &p, const Context &ctx)
{
    auto alpha = scalar_list(p, "alpha");
    int kmax = p.get<int>("kmax", 8);
    if (kmax < 0 || kmax > 40) {
        throw SchemaError("kmax must lie in [0, 40]");
    }
    ar::SigmaOptions so;
    so.norm = norm_of(p);
    json r;
    r["k_max"] = kmax;
    r["norm"] = ar::norm_name(so.norm);
    r["alpha"] = alpha;
    json vals = json::array(), wit = json::array();
    if (ctx.rational()) {
        auto res = ar::sigma(ar::RationalFrequencyVector(rationals(alpha)), kmax, so);
        for (const auto &v : res.values) {
            vals.push_back(v.get_str());
        }
        for (const auto &w : res.witness) {
            wit.push_back(index_json(w));
        }
    } else {
        auto res = ar::sigma(ar::FrequencyVector(doubles(alpha)), kmax, so);
        for (double v : res.values) {
            vals.push_back(v);
        }
        for (const auto &w : res.witness) {
            wit.push_back(index_json(w));
        }
    }
    r["sigma"] = vals;
    r["witness"] = wit;
    return r;
}

// ------------------------------------------------------------------- bruno

json cmd_bruno(Params &p, const Context &)
{
    std::optional<ar::DecaySequence> seq;
    int K = 0;
    json r;
    if (p.has("sequence")) {
        auto vals = doubles(scalar_list(p, "sequence"));
        seq.emplace(vals);
        K = p.get<int>("K", static_cast<int>(vals.size()) - 1);
        r["source"] = "sequence";
    } else if (p.has("generator")) {
        auto g = generator_param(p, "generator", {});
        K = p.get<int>("K", 32);
        seq.emplace(ar::DecaySequence::from_generator(g, K));
        r["source"] = g.describe();
    } else if (p.has("alpha")) {
        auto alpha = doubles(scalar_list(p, "alpha"));
        int kmax = p.get<int>("kmax", 8);
        ar::SigmaOptions so;
        so.norm = norm_of(p);
        seq.emplace(ar::sigma(ar::FrequencyVector(alpha), kmax, so).to_decay());
        K = p.get<int>("K", kmax);
        r["source"] = "sigma";
    } else {
        throw SchemaError("bruno needs one of sequence, generator or alpha");
    }
    auto rep = ar::bruno_diagnostic(*seq, K);
    r["K"] = rep.K;
    r["partial_sum"] = rep.partial_sum;
    r["verdict"] = ar::verdict_name(rep.verdict);
    return r;
}

// ----------------------------------------------------------------- density

ar::MapDescriptor map_param(Params &p, int n)
{
    json v = p.raw("map");
    if (v.is_null() || v == "identity" || (v.is_object() && v.value("kind", "") == "identity")) {
        p.record("map", {{"kind", "identity"}});
        return ar::MapDescriptor::identity(n);
    }
    if (v.is_object() && v.value("kind", "") == "affine") {
        try {
            auto m = v.at("matrix").get<std::vector<std::vector<double>>>();
            auto o = v.at("offset").get<std::vector<double>>();
            p.record("map", {{"kind", "affine"}, {"matrix", m}, {"offset", o}});
            return ar::MapDescriptor::affine(m, o);
        } catch (const json::exception &) {
            throw SchemaError("affine map needs numeric matrix and offset");
        }
    }
    throw SchemaError("map must be identity or affine");
}

json cmd_density(Params &p, const Context &ctx, Artifacts &art)
{
    auto alpha_s = scalar_list(p, "alpha");
    auto alpha = doubles(alpha_s);
    int kmax = p.get<int>("kmax", 8);
    auto norm = norm_of(p);
    auto rho_g = generator_param(p, "rho", ar::DecayGenerator::geometric(1.0, std::ldexp(1.0, -6)));
    auto a = a_param(p, ar::FrequencyVector(alpha), kmax, norm);
    auto radii = p.get<std::vector<double>>("radii", {0.1, 0.01, 0.001});
    long samples = p.get<long>("samples", 100000);
    auto f = map_param(p, static_cast<int>(alpha.size()));
    std::vector<double> center = alpha;
    if (p.has("center")) {
        center = doubles(scalar_list(p, "center"));
    } else {
        p.record("center", json(alpha_s));
    }
    if (radii.empty()) {
        throw SchemaError("radii must not be empty");
    }
    auto rho = ar::DecaySequence::from_generator(rho_g, kmax);
    ar::DensityOptions opt;
    opt.norm = norm;
    opt.jobs = ctx.jobs;
    json rows = json::array();
    std::string csv = "r,samples,fraction,k_max,seed\n";
    for (double r : radii) {
        auto rep = ar::density_estimate(f, center, a, rho, r, samples, kmax, ctx.seed, opt);
        rows.push_back({{"r", r},
                        {"samples", rep.sample_count},
                        {"in_class", rep.in_class_count},
                        {"fraction", rep.fraction_in_class},
                        {"k_max", rep.k_max},
                        {"seed", rep.rng_seed},
                        {"center_in_class", rep.center_in_class}});
        csv += fmt(r) + "," + std::to_string(rep.sample_count) + "," + fmt(rep.fraction_in_class) + "," +
               std::to_string(rep.k_max) + "," + std::to_string(rep.rng_seed) + "\n";
    }
    art.tables.emplace_back(".csv", csv);
    json r;
    r["alpha"] = alpha;
    r["k_max"] = kmax;
    r["map"] = f.describe();
    r["seed"] = ctx.seed;
    r["rows"] = rows;
    return r;
}

// ----------------------------------------------------------------- lattice

json cmd_lattice(Params &p, const Context &)
{
    auto alpha = doubles(scalar_list(p, "alpha"));
    auto idx = p.need<std::vector<long>>("index");
    if (idx.size() != alpha.size()) {
        throw SchemaError("index and alpha must have the same length");
    }
    double dot = 0, n2 = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        dot += alpha[j] * static_cast<double>(idx[j]);
        n2 += static_cast<double>(idx[j]) * static_cast<double>(idx[j]);
    }
    double a = p.get<double>("a", std::abs(dot));
    int bound = p.get<int>("coeff_bound", 8);
    auto et = ar::lemma_eps_t(a, std::sqrt(n2));
    auto basis = ar::lattice_basis(ar::FrequencyVector(alpha));
    auto sv = ar::flow_and_shortest(basis, et.t, bound);
    json r;
    r["alpha"] = alpha;
    r["index"] = idx;
    r["pairing"] = dot;
    r["a"] = a;
    r["eps"] = et.eps;
    r["t"] = et.t;
    r["delta"] = sv.delta_estimate;
    r["witness"] = sv.witness;
    r["holds"] = sv.delta_estimate <= et.eps;
    return r;
}

// ------------------------------------------------------------------ strips

json cmd_strips(Params &p, const Context &)
{
    auto alpha = doubles(scalar_list(p, "alpha"));
    int kmax = p.get<int>("kmax", 6);
    auto norm = norm_of(p);
    double radius = p.get<double>("r", 0.01);
    auto rho_g = generator_param(p, "rho", ar::DecayGenerator::geometric(1.0, std::ldexp(1.0, -6)));
    auto a = a_param(p, ar::FrequencyVector(alpha), kmax, norm);
    ar::SigmaOptions so;
    so.norm = norm;
    auto rep = ar::strip_analysis(ar::FrequencyVector(alpha), a, ar::DecaySequence::from_generator(rho_g, kmax),
                                  radius, kmax, so);
    json strips = json::array();
    for (const auto &s : rep.strips) {
        strips.push_back({{"i", s.i},
                          {"k", s.k},
                          {"width", s.width},
                          {"distance", s.distance},
                          {"can_meet", s.can_meet},
                          {"meets", s.meets}});
    }
    json r;
    r["alpha"] = alpha;
    r["r"] = rep.r;
    r["k_max"] = rep.k_max;
    r["strip_count"] = rep.strips.size();
    r["can_meet"] = rep.can_meet_count;
    r["meets"] = rep.meets_count;
    r["strips"] = strips;
    return r;
}

// ---------------------------------------------------------------- birkhoff

template <class C>
kam::Jet<C> hamiltonian_param(Params &p, int &n, int trunc_default, int &trunc)
{
    if (p.has("input")) {
        auto path = p.need<std::string>("input");
        auto text = read_file(path);
        auto H = kam::jet_from_text<C>(text);
        auto lay = kam::poisson::SymplecticLayout::from_shape(H.shape());
        n = lay.n;
        trunc = p.get<int>("trunc", std::max(H.trunc(), trunc_default));
        return H.reshaped(kam::with_trunc(H.shape_ptr(), trunc));
    }
    auto expr = p.need<std::string>("hamiltonian");
    n = p.get<int>("n", 1);
    if (n < 1 || n > 8) {
        throw SchemaError("n must lie in [1, 8]");
    }
    trunc = p.get<int>("trunc", trunc_default);
    return parse_polynomial<C>(expr, kam::poisson::SymplecticLayout{n, 0, 1}, trunc);
}

template <class C>
std::vector<C> infer_alpha(const kam::Jet<C> &H, int n, bool real)
{
    kam::poisson::SymplecticLayout lay{n, 0, 1};
    std::vector<C> alpha;
    for (int k = 0; k < n; ++k) {
        kam::MultiIndex m(2 * n);
        if (real) {
            m.set(lay.q(k), 2);
        } else {
            m.set(lay.q(k), 1);
            m.set(lay.p(k), 1);
        }
        alpha.push_back(H.coefficient(m));
    }
    return alpha;
}

template <class C>
kam::birkhoff::BirkhoffResult<C> birkhoff_core(const kam::birkhoff::EllipticHamiltonian<C> &Hm, int l,
                                               const kam::birkhoff::BirkhoffOptions &opt, json &r)
{
    namespace bk = kam::birkhoff;
    auto res = bk::birkhoff_normalize(Hm, l, opt);
    auto lay = Hm.layout();
    r["A"] = kam::to_json(res.A);
    r["achieved_order"] = res.achieved_order;
    r["residual_order"] = res.residual_order;
    r["min_divisor"] = res.min_divisor;
    json gens = json::array();
    for (const auto &g : res.generators) {
        gens.push_back(kam::to_json(g.h));
    }
    r["generators"] = gens;
    auto images = kam::poisson::coordinate_images(res.generators, Hm.H.shape_ptr(), lay);
    r["symplectic_residual"] = kam::poisson::check_symplectic(images, lay);
    r["frequency_space_dim"] = bk::frequency_space(res.A).d;
    return res;
}

template <class R>
json birkhoff_typed(Params &p, json &r)
{
    namespace bk = kam::birkhoff;
    int order = p.need<int>("order");
    if (order < 2 || order % 2 != 0) {
        throw SchemaError("order must be an even integer >= 2");
    }
    int n = 1, trunc = order;
    auto H = hamiltonian_param<R>(p, n, order, trunc);
    auto coords = p.get<std::string>("coords", "real");
    if (coords != "real" && coords != "morse") {
        throw SchemaError("coords must be real or morse");
    }
    auto strategy = p.get<std::string>("strategy", "per_degree");
    bk::BirkhoffOptions opt;
    if (strategy == "per_monomial") {
        opt.strategy = bk::Strategy::PerMonomial;
    } else if (strategy != "per_degree") {
        throw SchemaError("strategy must be per_degree or per_monomial");
    }
    opt.divisor_floor = p.get<double>("divisor_floor", 1e-12);
    const bool real = coords == "real";
    auto alpha = infer_alpha(H, n, real);
    r["coords"] = coords;
    r["order"] = order;
    json alpha_j = json::array();
    for (const auto &a : alpha) {
        alpha_j.push_back(scalar_json(a));
    }
    r["alpha"] = alpha_j;
    bk::EllipticHamiltonian<R> E{H, alpha, real ? bk::CoordinateMode::RealElliptic : bk::CoordinateMode::ComplexMorse};
    if (real) {
        auto conv = bk::to_complex_morse(E);
        using Cc = kam::complexify_t<R>;
        bk::EllipticHamiltonian<Cc> Hm{conv.H, conv.alpha, bk::CoordinateMode::ComplexMorse};
        auto res = birkhoff_core(Hm, order / 2, opt, r);
        r["A_real"] = kam::to_json(bk::real_actions(res.A));
        json lin = json::array();
        for (const auto &g : conv.old_in_new) {
            lin.push_back(kam::to_json(g));
        }
        r["linear_map_old_in_new"] = lin;
    } else {
        birkhoff_core(E, order / 2, opt, r);
    }
    return r;
}

json cmd_birkhoff(Params &p, const Context &ctx)
{
    json r;
    if (ctx.rational()) {
        return birkhoff_typed<kam::Rational>(p, r);
    }
    return birkhoff_typed<double>(p, r);
}

// --------------------------------------------------------------------- kam

template <class C>
json kam_typed(const json &prob, int stages, Artifacts &art, json &normalized)
{
    Params pp(prob, "kam problem");
    auto alpha_s = scalar_list(pp, "alpha");
    std::vector<C> alpha;
    for (const auto &s : alpha_s) {
        alpha.push_back(kam::from_rational<C>(kam::parse_rational(s)));
    }
    const int n = static_cast<int>(alpha.size());
    int N = pp.get<int>("N", 8);
    auto expr = pp.need<std::string>("perturbation");
    int base_degree = pp.get<int>("base_degree", 3);
    int k_offset = pp.get<int>("k_offset", 0);
    double floor = pp.get<double>("divisor_floor", 1e-12);
    normalized = pp.finish();
    kam::poisson::SymplecticLayout lay{n, 0, 1};
    auto pert = parse_polynomial<C>(expr, lay, N);
    auto problem = kam::engine::KamProblem<C>::fiber(alpha, pert);
    problem.max_stages = stages;
    problem.base_degree = base_degree;
    problem.k_offset = k_offset;
    problem.divisor_floor = floor;
    auto run = kam::engine::kam_iterate(problem);
    for (const auto &st : run.trace) {
        json line;
        line["stage"] = st.stage;
        line["ord_b"] = st.ord_b;
        line["ord_u"] = st.ord_u;
        line["cutoff"] = st.cutoff;
        line["min_divisor"] = std::isfinite(st.min_divisor) ? json(st.min_divisor) : json(nullptr);
        line["transform_length"] = st.transform_length;
        line["norms"] = {{"s", st.ledger.s},         {"a", st.ledger.a}, {"b", st.ledger.b},
                         {"alpha", st.ledger.alpha}, {"c", st.ledger.c}, {"u", st.ledger.u}};
        art.lines.push_back(line.dump());
    }
    json r;
    r["stages"] = run.trace.size();
    r["converged"] = run.converged;
    r["conjugacy_consistent"] = run.conjugacy_consistent;
    r["certificate"] = {{"passed", run.certificate.passed},
                        {"truncation", run.certificate.truncation},
                        {"checked_terms", run.certificate.checked_terms},
                        {"offending", run.certificate.offending_name}};
    r["final_model"] = kam::to_json(run.final_model);
    r["final_residual_order"] = run.final_residual.ord();
    return r;
}

json cmd_kam(Params &p, const Context &ctx, Artifacts &art)
{
    json prob;
    if (p.has("problem")) {
        json v = p.raw("problem");
        if (v.is_string()) {
            try {
                prob = json::parse(read_file(v.get<std::string>()));
            } catch (const json::parse_error &e) {
                throw SchemaError(std::string("problem file: ") + e.what());
            }
        } else {
            prob = v;
        }
    } else {
        throw SchemaError("kam needs a problem (file path or object)");
    }
    int stages = p.get<int>("stages", 64);
    if (stages < 1) {
        throw SchemaError("stages must be positive");
    }
    json normalized;
    json r = ctx.rational() ? kam_typed<kam::Rational>(prob, stages, art, normalized)
                            : kam_typed<double>(prob, stages, art, normalized);
    // the problem is inlined so that the recorded config is self-contained
    p.record("problem", normalized);
    return r;
}

// ------------------------------------------------------------------- torus

json cmd_torus(Params &p, const Context &ctx, Artifacts &art)
{
    int n = 1, trunc = 0;
    kam::Jet<double> H;
    if (p.has("input")) {
        auto path = p.need<std::string>("input");
        H = kam::jet_from_text<double>(read_file(path));
        n = H.num_vars() / 2;
    } else {
        auto expr = p.need<std::string>("hamiltonian");
        n = p.get<int>("n", 1);
        trunc = p.get<int>("trunc", 8);
        H = parse_polynomial<double>(expr, kam::poisson::SymplecticLayout{n, 0, 1}, trunc);
    }
    auto radii = p.get<std::vector<double>>("radii", {0.1});
    long samples = p.get<long>("samples", 200);
    kam::torus::Thresholds th;
    th.tol_E = p.get<double>("tol_E", th.tol_E);
    th.tol_nu = p.get<double>("tol_nu", th.tol_nu);
    th.escape_factor = p.get<double>("escape_factor", th.escape_factor);
    kam::torus::IntegrationPlan plan;
    plan.dt = p.get<double>("dt", plan.dt);
    plan.stride = p.get<int>("stride", plan.stride);
    plan.windows = p.get<int>("windows", plan.windows);
    plan.window_length = p.get<int>("window_length", plan.window_length);
    if (radii.empty()) {
        throw SchemaError("radii must not be empty");
    }
    json scans = json::array();
    std::string csv = "r,index";
    for (int j = 0; j < 2 * n; ++j) {
        csv += ",x" + std::to_string(j);
    }
    csv += ",drift,stability,class\n";
    for (double r : radii) {
        auto rep = kam::torus::torus_scan(H, r, samples, ctx.seed, th, plan, ctx.jobs);
        scans.push_back({{"r", r},
                         {"samples", rep.samples},
                         {"torus_like", rep.torus_like},
                         {"chaotic_or_escaping", rep.chaotic},
                         {"undecided", rep.undecided},
                         {"fraction", rep.fraction},
                         {"std_error", rep.std_error}});
        for (std::size_t i = 0; i < rep.orbits.size(); ++i) {
            const auto &o = rep.orbits[i];
            csv += fmt(r) + "," + std::to_string(i);
            for (double x : o.x0) {
                csv += "," + fmt(x);
            }
            csv += "," + fmt(o.energy_drift) + "," + fmt(o.stability) + "," + kam::torus::class_name(o.classification) +
                   "\n";
        }
    }
    art.tables.emplace_back(".orbits.csv", csv);
    json r;
    r["scheme"] = kam::torus::kScheme;
    r["frequency_convention"] = kam::torus::kFrequencyConvention;
    r["seed"] = ctx.seed;
    r["scans"] = scans;
    return r;
}

// ------------------------------------------------------------------ report

json headline(const json &doc)
{
    const json &cfg = doc.value("config", json::object());
    const json &res = doc.value("result", json::object());
    std::string cmd = cfg.value("command", "?");
    json h;
    h["command"] = cmd;
    if (cmd == "sigma" && res.contains("sigma")) {
        h["last_sigma"] = res["sigma"].back();
    } else if (cmd == "bruno") {
        h["verdict"] = res.value("verdict", "");
    } else if (cmd == "density" && res.contains("rows")) {
        json fr = json::array();
        for (const auto &row : res["rows"]) {
            fr.push_back({row["r"], row["fraction"]});
        }
        h["fractions"] = fr;
    } else if (cmd == "birkhoff") {
        h["residual_order"] = res.value("residual_order", 0);
    } else if (cmd == "kam") {
        h["converged"] = res.value("converged", false);
        h["certificate"] = res.value("certificate", json::object()).value("passed", false);
    } else if (cmd == "torus" && res.contains("scans")) {
        json fr = json::array();
        for (const auto &s : res["scans"]) {
            fr.push_back({s["r"], s["fraction"]});
        }
        h["fractions"] = fr;
    }
    return h;
}

json cmd_report(Params &p, const Context &)
{
    auto inputs = p.need<std::vector<std::string>>("inputs");
    json entries = json::array();
    std::string md = "| file | command | headline |\n|---|---|---|\n";
    for (const auto &path : inputs) {
        auto text = read_file(path);
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error &) {
            // JSON-lines: header first, summary last
            std::stringstream ss(text);
            std::string line, first, last;
            while (std::getline(ss, line)) {
                if (line.empty()) {
                    continue;
                }
                if (first.empty()) {
                    first = line;
                }
                last = line;
            }
            try {
                doc = json::parse(first);
                doc["result"] = json::parse(last).value("result", json::object());
            } catch (const json::parse_error &e) {
                throw SchemaError("report input " + path + " is not JSON: " + e.what());
            }
        }
        auto h = headline(doc);
        entries.push_back({{"file", path}, {"headline", h}});
        md += "| " + path + " | " + h["command"].get<std::string>() + " | " + h.dump() + " |\n";
    }
    return {{"entries", entries}, {"markdown", md}};
}

json normalize_top(const json &config, Context &ctx)
{
    if (!config.is_object()) {
        throw SchemaError("config must be a JSON object");
    }
    static const std::set<std::string> allowed{"command", "mode", "seed", "jobs", "output", "params"};
    for (const auto &[k, v] : config.items()) {
        if (!allowed.count(k)) {
            throw SchemaError("unknown config key '" + k + "'");
        }
    }
    if (!config.contains("command") || !config["command"].is_string()) {
        throw SchemaError("config needs a string 'command'");
    }
    try {
        ctx.mode = config.value("mode", std::string("float"));
        ctx.seed = config.value("seed", std::uint64_t{0});
        ctx.jobs = config.value("jobs", 1);
    } catch (const json::exception &) {
        throw SchemaError("mode must be a string, seed and jobs nonnegative integers");
    }
    if (ctx.mode != "float" && ctx.mode != "rational") {
        throw SchemaError("mode must be rational or float");
    }
    if (ctx.jobs < 1) {
        throw SchemaError("jobs must be at least 1");
    }
    json out;
    out["command"] = config["command"];
    out["mode"] = ctx.mode;
    out["seed"] = ctx.seed;
    out["jobs"] = ctx.jobs;
    if (config.contains("output") && !config["output"].is_null()) {
        if (!config["output"].is_string()) {
            throw SchemaError("output must be a path string");
        }
        out["output"] = config["output"];
    }
    return out;
}

std::string output_path(const json &cfg)
{
    const char *dir = std::getenv("KAMTOOL_OUTPUT_DIR");
    std::string cmd = cfg["command"];
    std::string ext = cmd == "kam" ? ".jsonl" : ".json";
    if (cfg.contains("output")) {
        fs::path p = cfg["output"].get<std::string>();
        if (p.is_relative() && dir && *dir) {
            p = fs::path(dir) / p;
        }
        return p.string();
    }
    if (dir && *dir) {
        return (fs::path(dir) / (cmd + ext)).string();
    }
    return {};
}

void write_text(const std::string &path, const std::string &text)
{
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

std::string jsonl_text(const Artifacts &a)
{
    std::string s = json{{"config", a.document["config"]}}.dump() + "\n";
    for (const auto &l : a.lines) {
        s += l + "\n";
    }
    s += json{{"result", a.document["result"]}}.dump() + "\n";
    return s;
}

json error_json(const std::string &type, const std::string &code, const std::string &message)
{
    return {{"error", {{"type", type}, {"code", code}, {"message", message}}}};
}

} // namespace

Artifacts execute(const json &config)
{
    Context ctx;
    json cfg = normalize_top(config, ctx);
    const std::string cmd = cfg["command"];
    json params = config.value("params", json::object());
    Params p(params, cmd);
    Artifacts art;
    json result;
    if (cmd == "sigma") {
        result = cmd_sigma(p, ctx);
    } else if (cmd == "bruno") {
        result = cmd_bruno(p, ctx);
    } else if (cmd == "density") {
        result = cmd_density(p, ctx, art);
    } else if (cmd == "lattice") {
        result = cmd_lattice(p, ctx);
    } else if (cmd == "strips") {
        result = cmd_strips(p, ctx);
    } else if (cmd == "birkhoff") {
        result = cmd_birkhoff(p, ctx);
    } else if (cmd == "kam") {
        result = cmd_kam(p, ctx, art);
    } else if (cmd == "torus") {
        result = cmd_torus(p, ctx, art);
    } else if (cmd == "report") {
        result = cmd_report(p, ctx);
    } else {
        throw SchemaError("unknown command '" + cmd + "'");
    }
    cfg["params"] = p.finish();
    art.document = {{"config", cfg}, {"result", result}};
    return art;
}

int run(const json &config, std::ostream &out, std::ostream &err)
{
    try {
        Artifacts a = execute(config);
        const json &cfg = a.document["config"];
        const bool lines = cfg["command"] == "kam";
        std::string main_text = lines ? jsonl_text(a) : a.document.dump(2) + "\n";
        out << main_text;
        std::string path = output_path(cfg);
        if (!path.empty()) {
            write_text(path, main_text);
            fs::path stem = fs::path(path).replace_extension();
            for (const auto &[suffix, text] : a.tables) {
                write_text(stem.string() + suffix, text);
            }
        }
        return kOk;
    } catch (const SchemaError &e) {
        err << error_json("schema", "schema_violation", e.what()).dump() << "\n";
        return kSchemaError;
    } catch (const IoError &e) {
        err << error_json("io", "io_failure", e.what()).dump() << "\n";
        return kIoError;
    } catch (const kam::Error &e) {
        err << error_json("module", e.code(), e.what()).dump() << "\n";
        return kModuleError;
    } catch (const std::exception &e) {
        err << error_json("module", "internal", e.what()).dump() << "\n";
        return kModuleError;
    }
}

namespace {

// "geometric:c=1,ratio=0.5" -> generator object
json generator_spec(const std::string &s)
{
    json g;
    auto colon = s.find(':');
    g["kind"] = s.substr(0, colon);
    if (colon != std::string::npos) {
        std::stringstream ss(s.substr(colon + 1));
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw SchemaError("generator field '" + kv + "' needs key=value");
            }
            g[kv.substr(0, eq)] = to_double(kv.substr(eq + 1));
        }
    }
    return g;
}

} // namespace

int main_cli(int argc, char **argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"kamtool: arithmetic, normal forms and torus scans near elliptic points"};
    app.require_subcommand(1);
    std::string mode = "float", output;
    std::uint64_t seed = 0;
    int jobs = 1;
    auto *o_mode = app.add_option("--mode", mode, "rational or float")->check(CLI::IsMember({"rational", "float"}));
    auto *o_seed = app.add_option("--seed", seed, "random seed");
    auto *o_jobs = app.add_option("--jobs", jobs, "worker threads");
    auto *o_out = app.add_option("--output", output, "output file (relative to $KAMTOOL_OUTPUT_DIR when set)");
    (void)o_mode;
    (void)o_seed;
    (void)o_jobs;
    app.fallthrough();

    json params = json::object();
    std::string command;
    std::string config_path;

    // option helpers writing into params when given
    std::map<std::string, std::string> str_opts;
    std::vector<std::pair<CLI::Option *, std::function<void()>>> hooks;
    auto opt_string = [&](CLI::App *sub, const std::string &flag, const std::string &key, const std::string &help) {
        auto *o = sub->add_option(flag, str_opts[key], help);
        hooks.emplace_back(o, [&, key] { params[key] = str_opts[key]; });
    };
    std::map<std::string, double> num_opts;
    auto opt_number = [&](CLI::App *sub, const std::string &flag, const std::string &key, const std::string &help) {
        auto *o = sub->add_option(flag, num_opts[key], help);
        hooks.emplace_back(o, [&, key] { params[key] = num_opts[key]; });
    };
    std::map<std::string, long> int_opts;
    auto opt_int = [&](CLI::App *sub, const std::string &flag, const std::string &key, const std::string &help) {
        auto *o = sub->add_option(flag, int_opts[key], help);
        hooks.emplace_back(o, [&, key] { params[key] = int_opts[key]; });
    };
    std::map<std::string, std::vector<std::string>> list_opts;
    auto opt_list = [&](CLI::App *sub, const std::string &flag, const std::string &key, const std::string &help,
                        bool numeric) {
        auto *o = sub->add_option(flag, list_opts[key], help)->delimiter(',');
        hooks.emplace_back(o, [&, key, numeric] {
            json arr = json::array();
            for (const auto &s : list_opts[key]) {
                if (numeric) {
                    arr.push_back(to_double(s));
                } else {
                    arr.push_back(s);
                }
            }
            params[key] = arr;
        });
    };
    auto opt_generator = [&](CLI::App *sub, const std::string &flag, const std::string &key, const std::string &help) {
        auto *o = sub->add_option(flag, str_opts[key], help);
        hooks.emplace_back(o, [&, key] {
            params[key] = str_opts[key] == "sigma" ? json("sigma") : generator_spec(str_opts[key]);
        });
    };

    auto *sigma = app.add_subcommand("sigma", "small-divisor sequence sigma(alpha)_k");
    opt_list(sigma, "--alpha", "alpha", "frequency vector, comma separated", false);
    opt_int(sigma, "--kmax", "kmax", "largest level k");
    opt_string(sigma, "--norm", "norm", "euclidean or sup");

    auto *bruno = app.add_subcommand("bruno", "summability diagnostic of sum -log a_k / 2^k");
    opt_list(bruno, "--sequence", "sequence", "explicit sequence", true);
    opt_generator(bruno, "--generator", "generator", "kind:key=value,...");
    opt_list(bruno, "--alpha", "alpha", "use sigma(alpha)", false);
    opt_int(bruno, "--kmax", "kmax", "levels for sigma");
    opt_int(bruno, "--K", "K", "number of terms");

    auto *density = app.add_subcommand("density", "Monte Carlo fraction of the class near alpha");
    opt_list(density, "--alpha", "alpha", "frequency vector", false);
    opt_int(density, "--kmax", "kmax", "largest level k");
    opt_list(density, "--radii", "radii", "ball radii", true);
    opt_int(density, "--samples", "samples", "samples per radius");
    opt_generator(density, "--rho", "rho", "shrink sequence generator");
    opt_generator(density, "--a", "a", "'sigma' or generator");
    opt_string(density, "--norm", "norm", "euclidean or sup");

    auto *lattice = app.add_subcommand("lattice", "diagonal flow and shortest vector estimate");
    opt_list(lattice, "--alpha", "alpha", "frequency vector", false);
    opt_list(lattice, "--index", "index", "integer vector i", true);
    opt_number(lattice, "--a", "a", "bound on |(alpha, i)|");
    opt_int(lattice, "--coeff-bound", "coeff_bound", "enumeration box");

    auto *strips = app.add_subcommand("strips", "resonance strips meeting a ball");
    opt_list(strips, "--alpha", "alpha", "frequency vector", false);
    opt_int(strips, "--kmax", "kmax", "largest level k");
    opt_number(strips, "--r", "r", "ball radius");
    opt_generator(strips, "--rho", "rho", "shrink sequence generator");
    opt_generator(strips, "--a", "a", "'sigma' or generator");

    auto *birk = app.add_subcommand("birkhoff", "Birkhoff normal form");
    opt_string(birk, "--input", "input", "jet file");
    opt_string(birk, "--hamiltonian", "hamiltonian", "polynomial expression");
    opt_int(birk, "--n", "n", "degrees of freedom");
    opt_int(birk, "--order", "order", "normalization order 2l");
    opt_int(birk, "--trunc", "trunc", "jet truncation");
    opt_string(birk, "--coords", "coords", "real or morse");
    opt_string(birk, "--strategy", "strategy", "per_degree or per_monomial");

    auto *kam = app.add_subcommand("kam", "KAM iteration");
    auto *kam_run = kam->add_subcommand("run", "run the iteration on a problem file");
    kam->require_subcommand(1);
    opt_string(kam_run, "--problem", "problem", "problem JSON file");
    opt_int(kam_run, "--stages", "stages", "maximal stage count");

    auto *torus = app.add_subcommand("torus", "invariant torus detection");
    auto *scan = torus->add_subcommand("scan", "fraction of torus-like orbits in B(0, r)");
    torus->require_subcommand(1);
    opt_string(scan, "--H", "input", "jet file");
    opt_string(scan, "--hamiltonian", "hamiltonian", "polynomial expression");
    opt_int(scan, "--n", "n", "degrees of freedom");
    opt_list(scan, "--r", "radii", "radii", true);
    opt_int(scan, "--samples", "samples", "orbits per radius");
    opt_number(scan, "--tol-E", "tol_E", "relative energy drift threshold");
    opt_number(scan, "--tol-nu", "tol_nu", "relative frequency stability threshold");
    opt_number(scan, "--dt", "dt", "step size");

    auto *report = app.add_subcommand("report", "summarize result files");
    opt_list(report, "--inputs", "inputs", "result files", false);

    auto *runc = app.add_subcommand("run", "run a config file");
    runc->add_option("--config", config_path, "config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << error_json("schema", "usage", e.what()).dump() << "\n";
        return kSchemaError;
    }

    for (auto &[o, f] : hooks) {
        if (o->count() > 0) {
            f();
        }
    }
    json config;
    if (runc->parsed()) {
        try {
            config = json::parse(read_file(config_path));
        } catch (const IoError &e) {
            err << error_json("io", "io_failure", e.what()).dump() << "\n";
            return kIoError;
        } catch (const json::parse_error &e) {
            err << error_json("schema", "schema_violation", e.what()).dump() << "\n";
            return kSchemaError;
        }
        // command-line globals override the file only when given
        if (o_out->count() > 0 && config.is_object()) {
            config["output"] = output;
        }
        return run(config, out, err);
    }
    for (auto *sub : app.get_subcommands()) {
        command = sub->get_name();
    }
    config["command"] = command;
    config["mode"] = mode;
    config["seed"] = seed;
    config["jobs"] = jobs;
    if (o_out->count() > 0) {
        config["output"] = output;
    }
    config["params"] = params;
    return run(config, out, err);
}

} // namespace kamtool
