// config.hpp: physical parameters, engine options and the INI config loader
//
// Config files are flat INI text with one section per module. Frequencies are
// written as nu in MHz and stored as omega = 2 pi nu in rad/us; lengths are in
// micrometres, times in microseconds, densities in cm^-3.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "polariton/errors.hpp"
#include "polariton/units.hpp"

namespace polariton {

enum class HoppingSource { bands, power_law };

struct PhysicalConfig {
    // band_solver
    double omega_ctrl = 0.0;   // control Rabi frequency
    double delta_e = mhz_to_angular(20.0);
    double gamma_e = mhz_to_angular(6.0);
    double delta2 = 0.0;
    double a = 0.0;            // lattice constant [um]
    double n0 = 1e13;          // mean density [cm^-3]
    double sigma_density = 0.025;  // Gaussian width [um]
    int pw_cutoff = 15;
    int k_points = 0;          // 0: max(2 N, 64)
    double omega_ge = mhz_to_angular(kRb87D2FrequencyMHz);
    double dark_weight_tol = 0.05;

    // lattice_model
    int n_sites = 0;
    double c6 = 0.0;           // [rad/us um^6]
    double gamma_r = mhz_to_angular(0.0125);
    double pump = 0.0;
    double beta = 0.0;
    std::optional<double> gamma_out;  // empty: equal to |J1|
    int quad_order = 32;
    int quad_panels = 4;       // Gauss-Legendre panels per unit cell
    int tail_cells = 5;
    HoppingSource hopping_source = HoppingSource::bands;
    double j1 = 0.0;           // power_law source only
    double hopping_exponent = 2.0;
    std::optional<double> gamma_site;  // overrides the Wannier decay rate

    std::uint64_t seed = 0;

    int resolved_k_points() const {
        if (k_points > 0) return k_points;
        return std::max(2 * n_sites, 64);
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw ConfigError(msg); };
        if (!(omega_ctrl >= 0.0)) fail("omega_ctrl must be >= 0");
        if (!(gamma_e >= 0.0)) fail("gamma_e must be >= 0");
        if (!(gamma_r >= 0.0)) fail("gamma_r must be >= 0");
        if (!(pump >= 0.0)) fail("pump must be >= 0");
        if (gamma_out && !(*gamma_out >= 0.0)) fail("gamma_out must be >= 0");
        if (gamma_site && !(*gamma_site >= 0.0)) fail("gamma_site must be >= 0");
        if (!(a > 0.0)) fail("a must be > 0");
        if (n_sites < 1) fail("n_sites must be >= 1");
        if (pw_cutoff < 1) fail("pw_cutoff must be >= 1");
        if (k_points != 0 && k_points < n_sites) fail("k_points must be >= n_sites");
        if (!(n0 >= 0.0)) fail("n0 must be >= 0");
        if (!(sigma_density > 0.0)) fail("sigma_density must be > 0");
        if (!(omega_ge > 0.0)) fail("omega_ge must be > 0");
        if (quad_order < 2 || quad_panels < 1) fail("quadrature order/panels too small");
        if (tail_cells < 1) fail("tail_cells must be >= 1");
        if (!(dark_weight_tol > 0.0 && dark_weight_tol < 1.0)) fail("dark_weight_tol must be in (0,1)");
        if (!std::isfinite(c6)) fail("c6 must be finite");
        if (hopping_source == HoppingSource::power_law) {
            if (!(j1 > 0.0)) fail("power_law hopping needs j1 > 0");
            if (!gamma_site) fail("power_law hopping needs gamma_site");
        }
    }
};

struct ExactOptions {
    double dt = 0.0;          // 0: 1e-3 / max_rate
    double t_final = 100.0;
    int samples = 101;
    int n_traj = 2000;
    double ss_tol = 1e-8;
    double ss_t_max = 5000.0;
};

struct VariationalOptions {
    double tau = 0.0;         // 0: 0.01 / max_rate
    double t_final = 100.0;
    int samples = 101;
    int n_sweeps = 1;
    int max_iter = 600;
    double ss_tol = 1e-6;
    double ss_t_max = 5000.0;
};

struct G2Options {
    double tau_final = 50.0;
    int samples = 101;
};

struct ObservableOptions {
    double front_threshold = 0.1;
};

struct RunConfig {
    PhysicalConfig phys;
    ExactOptions exact;
    VariationalOptions var;
    G2Options g2;
    ObservableOptions obs;
    std::vector<std::string> plan;      // deferred resolutions and notes
    std::string normalized;             // fully resolved config, re-loadable
    std::string hash;                   // FNV-1a of `normalized`
};

// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

enum class Kind { frequency, real, length, integer, unsigned64, choice, rate_or_equal_j1, optional_frequency };

struct KeySpec {
    std::string section;
    std::string name;
    Kind kind;
    bool required = false;
};

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"", "seed", Kind::unsigned64},
        {"band_solver", "omega_ctrl", Kind::frequency, true},
        {"band_solver", "delta_e", Kind::frequency},
        {"band_solver", "gamma_e", Kind::frequency},
        {"band_solver", "delta2", Kind::frequency},
        {"band_solver", "a", Kind::length, true},
        {"band_solver", "n0", Kind::real},
        {"band_solver", "sigma_density", Kind::length},
        {"band_solver", "pw_cutoff", Kind::integer},
        {"band_solver", "k_points", Kind::integer},
        {"band_solver", "omega_ge", Kind::frequency},
        {"band_solver", "dark_weight_tol", Kind::real},
        {"lattice_model", "n_sites", Kind::integer, true},
        {"lattice_model", "c6", Kind::frequency, true},
        {"lattice_model", "gamma_r", Kind::frequency},
        {"lattice_model", "pump", Kind::frequency},
        {"lattice_model", "beta", Kind::frequency},
        {"lattice_model", "gamma_out", Kind::rate_or_equal_j1},
        {"lattice_model", "quad_order", Kind::integer},
        {"lattice_model", "quad_panels", Kind::integer},
        {"lattice_model", "tail_cells", Kind::integer},
        {"lattice_model", "hopping_source", Kind::choice},
        {"lattice_model", "j1", Kind::frequency},
        {"lattice_model", "hopping_exponent", Kind::real},
        {"lattice_model", "gamma_site", Kind::optional_frequency},
        {"exact_engine", "dt", Kind::real},
        {"exact_engine", "t_final", Kind::real},
        {"exact_engine", "samples", Kind::integer},
        {"exact_engine", "n_traj", Kind::integer},
        {"exact_engine", "ss_tol", Kind::real},
        {"exact_engine", "ss_t_max", Kind::real},
        {"variational_engine", "tau", Kind::real},
        {"variational_engine", "t_final", Kind::real},
        {"variational_engine", "samples", Kind::integer},
        {"variational_engine", "n_sweeps", Kind::integer},
        {"variational_engine", "max_iter", Kind::integer},
        {"variational_engine", "ss_tol", Kind::real},
        {"variational_engine", "ss_t_max", Kind::real},
        {"g2", "tau_final", Kind::real},
        {"g2", "samples", Kind::integer},
        {"observables", "front_threshold", Kind::real},
    };
    return table;
}

inline std::string qualified(const std::string& section, const std::string& name) {
    return section.empty() ? name : section + "." + name;
}

inline double parse_real(const std::string& key, const std::string& text) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("type mismatch for '" + key + "': expected a number, got '" + text + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("type mismatch for '" + key + "': expected an integer, got '" + text + "'");
    }
}

inline std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

// Strip trailing "# ..." / "; ..." comments; boost's INI reader only handles
// full-line comments.
inline std::string strip_inline_comments(std::istream& in) {
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find_first_of("#;");
        if (pos != std::string::npos) line.erase(pos);
        out << trim(line) << '\n';
    }
    return out.str();
}

} // namespace detail

// Resolved config as INI text in config units (MHz, um, us).
inline std::string normalized_config_text(const RunConfig& rc) {
    const PhysicalConfig& p = rc.phys;
    std::ostringstream o;
    auto f = [](double w) { return format_double(angular_to_mhz(w)); };
    auto d = [](double v) { return format_double(v); };
    o << "seed = " << p.seed << "\n\n";
    o << "[band_solver]\n"
      << "omega_ctrl = " << f(p.omega_ctrl) << "\n"
      << "delta_e = " << f(p.delta_e) << "\n"
      << "gamma_e = " << f(p.gamma_e) << "\n"
      << "delta2 = " << f(p.delta2) << "\n"
      << "a = " << d(p.a) << "\n"
      << "n0 = " << d(p.n0) << "\n"
      << "sigma_density = " << d(p.sigma_density) << "\n"
      << "pw_cutoff = " << p.pw_cutoff << "\n"
      << "k_points = " << p.resolved_k_points() << "\n"
      << "omega_ge = " << f(p.omega_ge) << "\n"
      << "dark_weight_tol = " << d(p.dark_weight_tol) << "\n\n";
    o << "[lattice_model]\n"
      << "n_sites = " << p.n_sites << "\n"
      << "c6 = " << f(p.c6) << "\n"
      << "gamma_r = " << f(p.gamma_r) << "\n"
      << "pump = " << f(p.pump) << "\n"
      << "beta = " << f(p.beta) << "\n"
      << "gamma_out = " << (p.gamma_out ? f(*p.gamma_out) : std::string("equal_J1")) << "\n"
      << "quad_order = " << p.quad_order << "\n"
      << "quad_panels = " << p.quad_panels << "\n"
      << "tail_cells = " << p.tail_cells << "\n"
      << "hopping_source = " << (p.hopping_source == HoppingSource::bands ? "bands" : "power_law") << "\n"
      << "j1 = " << f(p.j1) << "\n"
      << "hopping_exponent = " << d(p.hopping_exponent) << "\n";
    if (p.gamma_site) o << "gamma_site = " << f(*p.gamma_site) << "\n";
    o << "\n[exact_engine]\n"
      << "dt = " << d(rc.exact.dt) << "\n"
      << "t_final = " << d(rc.exact.t_final) << "\n"
      << "samples = " << rc.exact.samples << "\n"
      << "n_traj = " << rc.exact.n_traj << "\n"
      << "ss_tol = " << d(rc.exact.ss_tol) << "\n"
      << "ss_t_max = " << d(rc.exact.ss_t_max) << "\n\n";
    o << "[variational_engine]\n"
      << "tau = " << d(rc.var.tau) << "\n"
      << "t_final = " << d(rc.var.t_final) << "\n"
      << "samples = " << rc.var.samples << "\n"
      << "n_sweeps = " << rc.var.n_sweeps << "\n"
      << "max_iter = " << rc.var.max_iter << "\n"
      << "ss_tol = " << d(rc.var.ss_tol) << "\n"
      << "ss_t_max = " << d(rc.var.ss_t_max) << "\n\n";
    o << "[g2]\n"
      << "tau_final = " << d(rc.g2.tau_final) << "\n"
      << "samples = " << rc.g2.samples << "\n\n";
    o << "[observables]\n"
      << "front_threshold = " << d(rc.obs.front_threshold) << "\n";
    return o.str();
}

// Parse INI text into a validated RunConfig. Unknown keys, type mismatches and
// missing required keys raise ConfigError naming the offending keys.
inline RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    const std::string cleaned = detail::strip_inline_comments(in);
    std::istringstream stream(cleaned);
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(stream, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message());
    }

    using detail::Kind;
    std::map<std::string, const detail::KeySpec*> known;
    for (const auto& k : detail::key_table()) known[detail::qualified(k.section, k.name)] = &k;

    std::map<std::string, std::string> values;
    std::vector<std::string> unknown;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            values[name] = detail::trim(node.data());
        } else {
            for (const auto& [key, leaf] : node) {
                if (!leaf.empty()) throw ConfigError("nested section in config: " + name + "." + key);
                values[name + "." + key] = detail::trim(leaf.data());
            }
        }
    }
    for (const auto& [key, value] : values)
        if (!known.count(key)) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string msg = "unknown config key(s):";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw ConfigError(msg);
    }
    std::vector<std::string> missing;
    for (const auto& k : detail::key_table()) {
        const auto q = detail::qualified(k.section, k.name);
        if (k.required && !values.count(q)) missing.push_back(q);
    }
    if (!missing.empty()) {
        std::string msg = "missing required config key(s):";
        for (const auto& k : missing) msg += " '" + k + "'";
        throw ConfigError(msg);
    }

    RunConfig rc;
    PhysicalConfig& p = rc.phys;
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        return it->second;
    };
    auto freq = [&](const std::string& key, double& dst) {
        if (auto v = get(key)) dst = mhz_to_angular(detail::parse_real(key, *v));
    };
    auto real = [&](const std::string& key, double& dst) {
        if (auto v = get(key)) dst = detail::parse_real(key, *v);
    };
    auto integer = [&](const std::string& key, int& dst) {
        if (auto v = get(key)) dst = static_cast<int>(detail::parse_integer(key, *v));
    };

    if (auto v = get("seed")) {
        const long long s = detail::parse_integer("seed", *v);
        if (s < 0) throw ConfigError("type mismatch for 'seed': expected a non-negative integer");
        p.seed = static_cast<std::uint64_t>(s);
    }
    freq("band_solver.omega_ctrl", p.omega_ctrl);
    freq("band_solver.delta_e", p.delta_e);
    freq("band_solver.gamma_e", p.gamma_e);
    freq("band_solver.delta2", p.delta2);
    real("band_solver.a", p.a);
    real("band_solver.n0", p.n0);
    real("band_solver.sigma_density", p.sigma_density);
    integer("band_solver.pw_cutoff", p.pw_cutoff);
    integer("band_solver.k_points", p.k_points);
    freq("band_solver.omega_ge", p.omega_ge);
    real("band_solver.dark_weight_tol", p.dark_weight_tol);

    integer("lattice_model.n_sites", p.n_sites);
    freq("lattice_model.c6", p.c6);
    freq("lattice_model.gamma_r", p.gamma_r);
    freq("lattice_model.pump", p.pump);
    freq("lattice_model.beta", p.beta);
    if (auto v = get("lattice_model.gamma_out")) {
        if (*v == "equal_J1") {
            p.gamma_out.reset();
        } else {
            p.gamma_out = mhz_to_angular(detail::parse_real("lattice_model.gamma_out", *v));
        }
    }
    integer("lattice_model.quad_order", p.quad_order);
    integer("lattice_model.quad_panels", p.quad_panels);
    integer("lattice_model.tail_cells", p.tail_cells);
    if (auto v = get("lattice_model.hopping_source")) {
        if (*v == "bands") p.hopping_source = HoppingSource::bands;
        else if (*v == "power_law") p.hopping_source = HoppingSource::power_law;
        else throw ConfigError("type mismatch for 'lattice_model.hopping_source': expected bands|power_law, got '" + *v + "'");
    }
    freq("lattice_model.j1", p.j1);
    real("lattice_model.hopping_exponent", p.hopping_exponent);
    if (auto v = get("lattice_model.gamma_site"))
        p.gamma_site = mhz_to_angular(detail::parse_real("lattice_model.gamma_site", *v));

    real("exact_engine.dt", rc.exact.dt);
    real("exact_engine.t_final", rc.exact.t_final);
    integer("exact_engine.samples", rc.exact.samples);
    integer("exact_engine.n_traj", rc.exact.n_traj);
    real("exact_engine.ss_tol", rc.exact.ss_tol);
    real("exact_engine.ss_t_max", rc.exact.ss_t_max);

    real("variational_engine.tau", rc.var.tau);
    real("variational_engine.t_final", rc.var.t_final);
    integer("variational_engine.samples", rc.var.samples);
    integer("variational_engine.n_sweeps", rc.var.n_sweeps);
    integer("variational_engine.max_iter", rc.var.max_iter);
    real("variational_engine.ss_tol", rc.var.ss_tol);
    real("variational_engine.ss_t_max", rc.var.ss_t_max);

    real("g2.tau_final", rc.g2.tau_final);
    integer("g2.samples", rc.g2.samples);
    real("observables.front_threshold", rc.obs.front_threshold);

    p.validate();
    if (rc.exact.samples < 2 || rc.var.samples < 2 || rc.g2.samples < 2)
        throw ConfigError("samples must be >= 2");
    if (rc.exact.n_traj < 1) throw ConfigError("exact_engine.n_traj must be >= 1");
    if (rc.var.n_sweeps < 1) throw ConfigError("variational_engine.n_sweeps must be >= 1");
    if (!(rc.exact.t_final > 0.0 && rc.var.t_final > 0.0 && rc.g2.tau_final > 0.0))
        throw ConfigError("t_final / tau_final must be > 0");
    if (!(rc.obs.front_threshold > 0.0 && rc.obs.front_threshold < 1.0))
        throw ConfigError("observables.front_threshold must be in (0,1)");

    if (!p.gamma_out)
        rc.plan.push_back("gamma_out = equal_J1: resolved to |J1| after the band stage");
    if (p.hopping_source == HoppingSource::power_law)
        rc.plan.push_back("hopping_source = power_law: J_m = j1 / m^hopping_exponent, point-like V_ij, band stage skipped for the model");
    if (p.k_points == 0)
        rc.plan.push_back("k_points defaulted to max(2 n_sites, 64) = " + std::to_string(p.resolved_k_points()));

    rc.normalized = normalized_config_text(rc);
    rc.hash = fnv1a_hex(rc.normalized);
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in);
}

} // namespace polariton
