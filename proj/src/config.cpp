#include "wke/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wke {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& v) {
    const std::string t = trim(v);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(out))
        throw std::invalid_argument("expected a finite number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& v) {
    const std::string t = trim(v);
    long long out = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string& v) {
    const long long x = to_integer(v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw std::invalid_argument("integer out of range: '" + v + "'");
    return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(item));
    if (out.empty()) throw std::invalid_argument("expected a comma-separated list of numbers");
    return out;
}

Vec3 to_vec3(const std::string& v) {
    const std::vector<double> x = to_list(v);
    if (x.size() != 3) throw std::invalid_argument("expected three comma-separated numbers, got '" + v + "'");
    return {x[0], x[1], x[2]};
}

std::string fmt(double x) {
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
}
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "true" : "false"; }
std::string fmt(const Vec3& v) { return fmt(v.x) + ", " + fmt(v.y) + ", " + fmt(v.z); }
std::string fmt(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

std::string alpha_rule_name(AlphaRule r) { return r == AlphaRule::Admissible ? "admissible" : "paper"; }
std::string theta_rule_name(ThetaRule r) { return r == ThetaRule::ClippedArcs ? "clipped" : "masked"; }

struct Key {
    const char* section;
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Get, class Set>
Key key(const char* section, const char* name, Get get, Set set) {
    return Key{section, name, set, get};
}

#define WKE_NUM(sec, nm, field)                                                                              \
    key(sec, nm, [](const RunConfig& c) { return fmt(c.field); },                                            \
        [](RunConfig& c, const std::string& v) { c.field = to_double(v); })
#define WKE_INT(sec, nm, field)                                                                              \
    key(sec, nm, [](const RunConfig& c) { return fmt(c.field); },                                            \
        [](RunConfig& c, const std::string& v) { c.field = to_int(v); })
#define WKE_BOOL(sec, nm, field)                                                                             \
    key(sec, nm, [](const RunConfig& c) { return fmt(c.field); },                                            \
        [](RunConfig& c, const std::string& v) { c.field = to_bool(v); })
#define WKE_STR(sec, nm, field)                                                                              \
    key(sec, nm, [](const RunConfig& c) { return c.field; },                                                 \
        [](RunConfig& c, const std::string& v) { c.field = trim(v); })
#define WKE_VEC(sec, nm, field)                                                                              \
    key(sec, nm, [](const RunConfig& c) { return fmt(c.field); },                                            \
        [](RunConfig& c, const std::string& v) { c.field = to_vec3(v); })

const std::vector<Key>& schema() {
    static const std::vector<Key> keys = {
        key("", "seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, const std::string& v) {
                const long long s = to_integer(v);
                if (s < 0) throw std::invalid_argument("seed must be non-negative");
                c.seed = static_cast<std::uint64_t>(s);
            }),
        key("dispersion", "perturbation",
            [](const RunConfig& c) { return to_string(c.dispersion.perturbation.kind); },
            [](RunConfig& c, const std::string& v) { c.dispersion.perturbation.kind = perturbation_from_string(trim(v)); }),
        WKE_NUM("dispersion", "eps", dispersion.perturbation.eps),
        WKE_NUM("dispersion", "a", dispersion.perturbation.a),
        WKE_NUM("dispersion", "k_cut", dispersion.k_cut),
        WKE_NUM("dispersion", "C1", dispersion.C1),
        WKE_NUM("dispersion", "C2", dispersion.C2),
        WKE_NUM("dispersion", "C3", dispersion.C3),
        WKE_NUM("dispersion", "Lambda1", dispersion.Lambda1),
        WKE_NUM("dispersion", "Lambda2", dispersion.Lambda2),
        WKE_NUM("equilibrium", "a", equilibrium.a),
        WKE_VEC("equilibrium", "b", equilibrium.b),
        WKE_NUM("equilibrium", "c", equilibrium.c),
        WKE_INT("grid", "n_per_axis", n_per_axis),
        WKE_INT("grid", "radial_points", radial_points),
        WKE_INT("quadrature", "n_k3", quadrature.n_k3),
        WKE_INT("quadrature", "n_alpha", quadrature.n_alpha),
        WKE_INT("quadrature", "n_theta", quadrature.n_theta),
        WKE_NUM("quadrature", "beta", quadrature.beta),
        key("quadrature", "alpha_rule", [](const RunConfig& c) { return alpha_rule_name(c.quadrature.alpha_rule); },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t == "admissible") c.quadrature.alpha_rule = AlphaRule::Admissible;
                else if (t == "paper") c.quadrature.alpha_rule = AlphaRule::PaperInterval;
                else throw std::invalid_argument("alpha_rule must be admissible or paper, got '" + t + "'");
            }),
        key("quadrature", "theta_rule", [](const RunConfig& c) { return theta_rule_name(c.quadrature.theta_rule); },
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t == "clipped") c.quadrature.theta_rule = ThetaRule::ClippedArcs;
                else if (t == "masked") c.quadrature.theta_rule = ThetaRule::UniformMasked;
                else throw std::invalid_argument("theta_rule must be clipped or masked, got '" + t + "'");
            }),
        WKE_NUM("quadrature", "tol", quadrature.tol),
        WKE_NUM("experiment", "T", experiment.T),
        WKE_NUM("experiment", "dt", experiment.dt),
        WKE_STR("experiment", "scheme", experiment.scheme),
        WKE_STR("experiment", "g0", experiment.g0),
        WKE_NUM("experiment", "g0_norm", experiment.g0_norm),
        WKE_NUM("experiment", "g0_ball_fraction", experiment.g0_ball_fraction),
        WKE_BOOL("experiment", "strict", experiment.strict),
        WKE_BOOL("experiment", "linear_only", experiment.linear_only),
        WKE_INT("experiment", "c_samples", experiment.c_samples),
        WKE_INT("experiment", "picard_max_iter", experiment.picard_max_iter),
        WKE_NUM("experiment", "picard_tol", experiment.picard_tol),
        WKE_VEC("experiment", "chart_k", experiment.chart_k),
        WKE_VEC("experiment", "chart_k3", experiment.chart_k3),
        WKE_INT("experiment", "iso_order", experiment.iso_order),
        WKE_NUM("experiment", "iso_amplitude", experiment.iso_amplitude),
        WKE_NUM("experiment", "oracle_amplitude", experiment.oracle_amplitude),
        WKE_INT("experiment", "oracle_n_k3", experiment.oracle_n_k3),
        WKE_INT("experiment", "oracle_z_panels", experiment.oracle_z_panels),
        WKE_INT("experiment", "oracle_z_order", experiment.oracle_z_order),
        WKE_INT("experiment", "oracle_band_order", experiment.oracle_band_order),
        WKE_NUM("experiment", "oracle_budget", experiment.oracle_budget),
        WKE_NUM("experiment", "oracle_tolerance", experiment.oracle_tolerance),
        WKE_STR("experiment", "sweep_parameter", experiment.sweep_parameter),
        key("experiment", "sweep_values", [](const RunConfig& c) { return fmt(c.experiment.sweep_values); },
            [](RunConfig& c, const std::string& v) { c.experiment.sweep_values = to_list(v); }),
        WKE_INT("experiment", "assumption_samples", experiment.assumption_samples),
        WKE_STR("output", "directory", output.directory),
        WKE_STR("output", "field_format", output.field_format),
        WKE_BOOL("output", "matrix_csv", output.matrix_csv),
    };
    return keys;
}

#undef WKE_NUM
#undef WKE_INT
#undef WKE_BOOL
#undef WKE_STR
#undef WKE_VEC

std::string qualified(const std::string& section, const std::string& name) {
    return section.empty() ? name : section + "." + name;
}

bool known_section(const std::string& s) {
    for (const Key& k : schema())
        if (s == k.section && !s.empty()) return true;
    return false;
}

}  // namespace

ConfigError::ConfigError(const std::string& src, int ln, const std::string& message)
    : std::runtime_error(src + (ln > 0 ? ":" + std::to_string(ln) : std::string()) + ": " + message),
      source(src),
      line(ln) {}

void set_value(RunConfig& cfg, const std::string& section, const std::string& name, const std::string& value,
               int line) {
    for (const Key& k : schema()) {
        if (section != k.section || name != k.name) continue;
        try {
            k.set(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError(cfg.source, line, qualified(section, name) + ": " + e.what());
        }
        cfg.lines[qualified(section, name)] = line;
        return;
    }
    if (!section.empty() && !known_section(section))
        throw ConfigError(cfg.source, line, "unknown section [" + section + "]");
    throw ConfigError(cfg.source, line, "unknown key '" + qualified(section, name) + "'");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    RunConfig cfg;
    cfg.source = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::map<std::string, int> seen;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        for (std::size_t p = 0; p < s.size(); ++p) {
            if ((s[p] == '#' || s[p] == ';') && (p == 0 || std::isspace(static_cast<unsigned char>(s[p - 1])))) {
                s.resize(p);
                break;
            }
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source, line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (!known_section(section)) throw ConfigError(source, line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value', got '" + s + "'");
        const std::string name = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (name.empty()) throw ConfigError(source, line, "missing key before '='");
        const std::string q = qualified(section, name);
        if (const auto it = seen.find(q); it != seen.end())
            throw ConfigError(source, line, "duplicate key '" + q + "' (first set on line " + std::to_string(it->second) + ")");
        seen[q] = line;
        set_value(cfg, section, name, value, line);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set", 0, "expected section.key=value, got '" + assignment + "'");
    const std::string lhs = trim(assignment.substr(0, eq));
    const std::size_t dot = lhs.find('.');
    const std::string section = dot == std::string::npos ? "" : lhs.substr(0, dot);
    const std::string name = dot == std::string::npos ? lhs : lhs.substr(dot + 1);
    const std::string saved = cfg.source;
    cfg.source = "--set";
    try {
        set_value(cfg, section, name, assignment.substr(eq + 1), 0);
    } catch (...) {
        cfg.source = saved;
        throw;
    }
    cfg.source = saved;
}

void validate(const RunConfig& cfg) {
    auto fail = [&](const std::string& q, const std::string& msg) {
        const auto it = cfg.lines.find(q);
        throw ConfigError(cfg.source, it == cfg.lines.end() ? 0 : it->second, q + ": " + msg);
    };
    const DispersionSpec& d = cfg.dispersion;
    if (!(d.k_cut > 0.0)) fail("dispersion.k_cut", "must be positive");
    if (d.perturbation.kind != PerturbationKind::Zero && !(d.perturbation.eps >= 0.0))
        fail("dispersion.eps", "must be non-negative");
    if (cfg.n_per_axis < 2 || cfg.n_per_axis > TensorBasis::max_n) fail("grid.n_per_axis", "must be in [2, 16]");
    if (cfg.radial_points < 2 || cfg.radial_points > 64) fail("grid.radial_points", "must be in [2, 64]");
    try {
        cfg.quadrature.validate();
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        std::string q = "quadrature.n_k3";
        for (const char* k : {"n_alpha", "n_theta", "tol"})
            if (msg.find(k) != std::string::npos) q = std::string("quadrature.") + k;
        fail(q, msg);
    }
    if (cfg.quadrature.beta < 0.0) fail("quadrature.beta", "must be non-negative");
    if (!equilibrium_is_admissible(d, cfg.equilibrium))
        fail("equilibrium.a", "a + b.k + c omega(k) must be positive on the box");
    const ExperimentConfig& e = cfg.experiment;
    if (!(e.T >= 0.0)) fail("experiment.T", "must be non-negative");
    if (!(e.dt > 0.0)) fail("experiment.dt", "must be positive");
    if (e.scheme != "rk4" && e.scheme != "euler") fail("experiment.scheme", "must be rk4 or euler");
    if (e.g0.rfind("preset:", 0) == 0) {
        const std::string p = e.g0.substr(7);
        if (p != "null-free-random" && p != "null-only" && p != "mixed")
            fail("experiment.g0", "unknown preset '" + p + "' (null-free-random, null-only, mixed)");
    } else if (e.g0.empty()) {
        fail("experiment.g0", "must be a preset or a field file");
    }
    if (!(e.g0_norm >= 0.0)) fail("experiment.g0_norm", "must be non-negative");
    if (!(e.g0_ball_fraction > 0.0 && e.g0_ball_fraction <= 0.5))
        fail("experiment.g0_ball_fraction", "must be in (0, 0.5]");
    if (e.c_samples < 10) fail("experiment.c_samples", "must be >= 10");
    if (e.picard_max_iter < 1) fail("experiment.picard_max_iter", "must be >= 1");
    if (!(e.picard_tol > 0.0)) fail("experiment.picard_tol", "must be positive");
    if (e.iso_order < 1) fail("experiment.iso_order", "must be >= 1");
    if (e.oracle_n_k3 < 2 || e.oracle_n_k3 > TensorBasis::max_n) fail("experiment.oracle_n_k3", "must be in [2, 16]");
    if (e.oracle_z_panels < 1 || e.oracle_z_order < 1 || e.oracle_band_order < 1)
        fail("experiment.oracle_z_panels", "oracle quadrature sizes must be positive");
    if (!(e.oracle_tolerance > 0.0)) fail("experiment.oracle_tolerance", "must be positive");
    if (e.sweep_parameter != "k_cut" && e.sweep_parameter != "eps" && e.sweep_parameter != "n_per_axis")
        fail("experiment.sweep_parameter", "must be k_cut, eps or n_per_axis");
    if (e.assumption_samples < 1) fail("experiment.assumption_samples", "must be >= 1");
    const OutputConfig& o = cfg.output;
    if (o.directory.empty()) fail("output.directory", "must not be empty");
    if (o.field_format != "csv" && o.field_format != "binary" && o.field_format != "both")
        fail("output.field_format", "must be csv, binary or both");
}

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream out;
    std::string section = "\x01";
    for (const Key& k : schema()) {
        if (section != k.section) {
            section = k.section;
            if (!section.empty()) out << "\n[" << section << "]\n";
        }
        out << k.name << " = " << k.get(cfg) << "\n";
    }
    return out.str();
}

std::vector<std::string> schema_keys() {
    std::vector<std::string> out;
    for (const Key& k : schema()) out.push_back(qualified(k.section, k.name));
    return out;
}

}  // namespace wke
