#include <kam/jet_io.hpp>

#include <sstream>

namespace kam {

namespace {

std::string trim(const std::string &s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(trim(cur));
    }
    return out;
}

int to_int(const std::string &s, const char *what)
{
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) {
            throw ParseError("");
        }
        return v;
    } catch (const std::exception &) {
        throw ParseError(std::string("malformed ") + what + " '" + s + "'");
    }
}

ShapePtr parse_header(const std::string &line)
{
    // "# jet vars=.. trunc=.. blocks=q:1,p:1 weights=.."
    std::istringstream in(line);
    std::string hash, tag;
    in >> hash >> tag;
    if (hash != "#" || tag != "jet") {
        throw ParseError("jet text must start with '# jet' header");
    }
    int vars = -1;
    int trunc = -1;
    std::vector<BlockSpec> blocks;
    std::vector<int> weights;
    std::string kv;
    while (in >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ParseError("malformed header field '" + kv + "'");
        }
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        if (key == "vars") {
            vars = to_int(val, "vars");
        } else if (key == "trunc") {
            trunc = to_int(val, "trunc");
        } else if (key == "blocks") {
            for (const auto &b : split(val, ',')) {
                auto colon = b.find(':');
                if (colon == std::string::npos) {
                    throw ParseError("malformed block '" + b + "'");
                }
                blocks.push_back({block_from_name(b.substr(0, colon)), to_int(b.substr(colon + 1), "block size")});
            }
        } else if (key == "weights") {
            for (const auto &w : split(val, ',')) {
                weights.push_back(to_int(w, "weight"));
            }
        } else {
            throw ParseError("unknown header field '" + key + "'");
        }
    }
    if (vars < 0 || trunc < 0) {
        throw ParseError("jet header needs vars= and trunc=");
    }
    if (blocks.empty()) {
        blocks.push_back({Block::Generic, vars});
    }
    auto shape = make_shape(blocks, trunc, weights);
    if (shape->num_vars() != vars) {
        throw ParseError("block sizes do not sum to vars");
    }
    return shape;
}

template <class C>
nlohmann::json coefficient_json(const C &c)
{
    if constexpr (std::is_same_v<C, Rational>) {
        return c.get_str();
    } else if constexpr (std::is_same_v<C, GaussRational>) {
        return nlohmann::json::array({c.re.get_str(), c.im.get_str()});
    } else if constexpr (std::is_same_v<C, double>) {
        return c;
    } else {
        return nlohmann::json::array({c.real(), c.imag()});
    }
}

template <class C>
C coefficient_from_json(const nlohmann::json &j)
{
    auto part = [](const nlohmann::json &x) -> std::string {
        if (x.is_string()) {
            return x.get<std::string>();
        }
        if (x.is_number_integer()) {
            return std::to_string(x.get<long long>());
        }
        if (x.is_number()) {
            return format_scalar(x.get<double>());
        }
        throw ParseError("coefficient must be a number or string");
    };
    if (j.is_array()) {
        if (j.size() != 2) {
            throw ParseError("complex coefficient needs [re, im]");
        }
        if constexpr (is_complex_v<C>) {
            return parse_scalar<C>(part(j[0]) + " " + part(j[1]));
        } else {
            throw ParseError("complex coefficient given for a real jet");
        }
    }
    return parse_scalar<C>(part(j));
}

} // namespace

template <class C>
std::string to_text(const Jet<C> &f)
{
    std::ostringstream out;
    const auto &sh = f.shape();
    out << "# jet vars=" << sh.num_vars() << " trunc=" << sh.trunc() << " blocks=" << sh.describe();
    if (!sh.unit_weights()) {
        out << " weights=";
        for (int v = 0; v < sh.num_vars(); ++v) {
            out << (v ? "," : "") << sh.weight(v);
        }
    }
    out << '\n';
    for (const auto &[m, c] : f.terms()) {
        out << m.to_string() << ':' << format_scalar(c) << '\n';
    }
    return out.str();
}

ShapePtr shape_from_text(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            return parse_header(trim(line));
        }
    }
    throw ParseError("empty jet text");
}

template <class C>
Jet<C> jet_from_text(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    ShapePtr shape;
    int lineno = 0;
    Jet<C> f;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (!shape) {
            shape = parse_header(line);
            f = Jet<C>(shape);
            continue;
        }
        if (line[0] == '#') {
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 'exponents:coefficient'");
        }
        auto parts = split(line.substr(0, colon), ',');
        if (static_cast<int>(parts.size()) != shape->num_vars()) {
            throw ParseError("line " + std::to_string(lineno) + ": wrong number of exponents");
        }
        std::vector<int> e;
        for (const auto &p : parts) {
            e.push_back(to_int(p, "exponent"));
        }
        MultiIndex m{std::span<const int>(e)};
        if (shape->weighted_degree(m) > shape->trunc()) {
            throw ParseError("line " + std::to_string(lineno) + ": term beyond truncation degree");
        }
        f.add_term(m, parse_scalar<C>(line.substr(colon + 1)));
    }
    if (!shape) {
        throw ParseError("empty jet text");
    }
    return f;
}

nlohmann::json shape_to_json(const JetShape &shape)
{
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto &b : shape.blocks()) {
        blocks.push_back({{"kind", block_name(b.kind)}, {"size", b.size}});
    }
    return {{"vars", shape.num_vars()}, {"trunc", shape.trunc()}, {"blocks", blocks}, {"weights", shape.weights()}};
}

ShapePtr shape_from_json(const nlohmann::json &j)
{
    try {
        std::vector<BlockSpec> blocks;
        if (j.contains("blocks")) {
            for (const auto &b : j.at("blocks")) {
                blocks.push_back({block_from_name(b.at("kind").get<std::string>()), b.at("size").get<int>()});
            }
        } else {
            blocks.push_back({Block::Generic, j.at("vars").get<int>()});
        }
        std::vector<int> weights;
        if (j.contains("weights")) {
            weights = j.at("weights").get<std::vector<int>>();
        }
        return make_shape(blocks, j.at("trunc").get<int>(), weights);
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("bad jet shape: ") + e.what());
    }
}

template <class C>
nlohmann::json to_json(const Jet<C> &f)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[m, c] : f.terms()) {
        terms.push_back({{"exponents", m.to_vector()}, {"coefficient", coefficient_json(c)}});
    }
    return {{"shape", shape_to_json(f.shape())}, {"terms", terms}};
}

template <class C>
Jet<C> jet_from_json(const nlohmann::json &j)
{
    try {
        Jet<C> f(shape_from_json(j.at("shape")));
        for (const auto &t : j.at("terms")) {
            auto e = t.at("exponents").get<std::vector<int>>();
            if (static_cast<int>(e.size()) != f.num_vars()) {
                throw ParseError("term has wrong number of exponents");
            }
            f.add_term(MultiIndex(std::span<const int>(e)), coefficient_from_json<C>(t.at("coefficient")));
        }
        return f;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("bad jet json: ") + e.what());
    }
}

#define KAM_INSTANTIATE(C)                                                                         \
    template std::string to_text(const Jet<C> &);                                                  \
    template Jet<C> jet_from_text<C>(const std::string &);                                         \
    template nlohmann::json to_json(const Jet<C> &);                                               \
    template Jet<C> jet_from_json<C>(const nlohmann::json &);

KAM_INSTANTIATE(Rational)
KAM_INSTANTIATE(GaussRational)
KAM_INSTANTIATE(double)
KAM_INSTANTIATE(Complex)

#undef KAM_INSTANTIATE

} // namespace kam
