// app.hpp: pipeline orchestration behind the polariton-lattice command

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <boost/version.hpp>
#include <json.hpp>

#include "polariton/band_solver.hpp"
#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/exact_engine.hpp"
#include "polariton/io.hpp"
#include "polariton/lattice_model.hpp"
#include "polariton/observables.hpp"
#include "polariton/quantum_core.hpp"
#include "polariton/variational_engine.hpp"

namespace polariton {

inline constexpr const char* kVersion = "1.0.0";

inline const std::vector<std::string>& run_modes() {
    static const std::vector<std::string> modes = {"bands", "model", "exact", "wfmc", "variational",
                                                   "g2-exact", "g2-variational", "benchmark"};
    return modes;
}

struct RunRequest {
    std::string mode;
    std::string config_path;
    std::string out_dir = "runs";
    std::optional<std::uint64_t> seed;
};

struct RunOutcome {
    std::filesystem::path run_dir;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

// Loads, validates and resolves a config; a seed given on the command line
// replaces the file's seed before the config hash is taken.
inline RunConfig validate_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt) {
    RunConfig rc = load_config(path);
    if (seed) {
        rc.phys.seed = *seed;
        rc.normalized = normalized_config_text(rc);
        rc.hash = fnv1a_hex(rc.normalized);
    }
    return rc;
}

namespace detail {

inline std::string utc_stamp(std::chrono::system_clock::time_point tp, const char* fmt) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, fmt, &tm);
    return buf;
}

inline std::filesystem::path make_run_dir(const std::string& out, const std::string& hash,
                                          std::chrono::system_clock::time_point tp) {
    const std::filesystem::path base = std::filesystem::path(out) / (hash + "_" + utc_stamp(tp, "%Y%m%dT%H%M%SZ"));
    std::filesystem::path dir = base;
    for (int n = 1; std::filesystem::exists(dir); ++n) dir = base.string() + "_" + std::to_string(n);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace detail

// Runs one mode and writes its artifacts plus manifest.json. Throws the
// library's exception types on failure.
inline RunOutcome run_pipeline(const RunRequest& req) {
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    bool known = false;
    for (const auto& m : run_modes()) known = known || m == req.mode;
    if (!known) throw ConfigError("unknown mode '" + req.mode + "'");

    const RunConfig rc = validate_config(req.config_path, req.seed);
    const PhysicalConfig& p = rc.phys;
    RunOutcome out;
    out.run_dir = detail::make_run_dir(req.out_dir, rc.hash, started);
    json extra = json::object();
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text((out.run_dir / name).string(), text);
        out.files.push_back(name);
    };

    if (req.mode == "bands") {
        const BandStructure bs = solve_bands(p);
        emit("bands.csv", bands_csv(bs));
        try {
            const WannierBand wb = wannier_transform(bs, BandLabel::dark_upper, p.quad_order, p.quad_panels);
            emit("wannier.csv", wannier_csv(wb, std::max(1, p.n_sites - 1)));
            extra["band_gap"] = band_gap(bs);
            extra["J1"] = std::abs(wb.J(1));
        } catch (const LabelError& e) {
            out.warnings.push_back(e.what());
        }
    } else {
        const ModelBuild mb = build_model(p);
        const SpinModel& m = mb.model;
        for (const auto& w : m.warnings) out.warnings.push_back(w);
        const JumpSet jumps = make_jumps(m);
        if (mb.bands) emit("bands.csv", bands_csv(*mb.bands));
        if (mb.wannier) emit("wannier.csv", wannier_csv(*mb.wannier, std::max(1, p.n_sites - 1)));

        if (req.mode == "model") {
            emit("model.json", model_document(m, rc, mb.tail_weight).dump(2) + "\n");
        } else if (req.mode == "exact") {
            const auto grid = uniform_grid(rc.exact.t_final, rc.exact.samples);
            const ExactResult r = integrate_me(m, jumps, vacuum_density(m.n_sites), grid, rc.exact.dt);
            emit("dynamics.csv", series_csv(r.series));
        } else if (req.mode == "wfmc") {
            const auto grid = uniform_grid(rc.exact.t_final, rc.exact.samples);
            const WfmcResult r = wfmc_run(m, jumps, vacuum_state(m.n_sites), grid, rc.exact.n_traj, p.seed, rc.exact.dt);
            emit("dynamics.csv", series_csv(r.series));
            extra["jumps"] = r.jumps;
            if (r.renormalizations > 0)
                out.warnings.push_back("norm underflow renormalizations: " + std::to_string(r.renormalizations));
        } else if (req.mode == "variational") {
            VariationalEngine eng(m, jumps, rc.var);
            const auto ev = eng.sweep_evolve(ProductState::vacuum(m.n_sites), uniform_grid(rc.var.t_final, rc.var.samples));
            emit("var_dynamics.csv", series_csv(ev.series));
            std::ostringstream a;
            a << "t,site,alpha_x,alpha_y,alpha_z\n";
            for (std::size_t g = 0; g < ev.states.size(); ++g)
                for (int i = 0; i < m.n_sites; ++i) {
                    const auto& v = ev.states[g].alpha[i];
                    a << format_double(ev.series.time[g]) << ',' << i + 1 << ',' << format_double(v.x()) << ','
                      << format_double(v.y()) << ',' << format_double(v.z()) << '\n';
                }
            emit("alphas.csv", a.str());
            if (eng.stats().optimizer_warnings > 0)
                out.warnings.push_back("optimizer stalled without improvement on " +
                                       std::to_string(eng.stats().optimizer_warnings) + " site updates");
        } else if (req.mode == "g2-exact") {
            const SteadyStateOptions so{rc.exact.ss_tol, rc.exact.ss_t_max};
            emit("g2.csv", series_csv(g2_exact(m, jumps, uniform_grid(rc.g2.tau_final, rc.g2.samples), rc.exact.dt, so)));
        } else if (req.mode == "g2-variational") {
            VariationalEngine eng(m, jumps, rc.var);
            const auto ss = eng.steady_state();
            extra["steady_state_time"] = ss.t_reached;
            emit("var_g2.csv", series_csv(eng.g2_variational(ss.state, uniform_grid(rc.g2.tau_final, rc.g2.samples))));
        } else if (req.mode == "benchmark") {
            const auto grid = uniform_grid(rc.exact.t_final, rc.exact.samples);
            const ExactResult ex = integrate_me(m, jumps, vacuum_density(m.n_sites), grid, rc.exact.dt);
            const WfmcResult mc = wfmc_run(m, jumps, vacuum_state(m.n_sites), grid, rc.exact.n_traj, p.seed, rc.exact.dt);
            VariationalEngine eng(m, jumps, rc.var);
            const auto va = eng.sweep_evolve(ProductState::vacuum(m.n_sites), grid);
            ObservableSeries s;
            s.time = grid;
            s.add("i_out_exact") = ex.series["i_out"];
            s.add("i_out_wfmc") = mc.series["i_out"];
            s.add("i_out_wfmc_se") = mc.series["i_out_se"];
            s.add("i_out_variational") = va.series["i_out"];
            emit("benchmark.csv", series_csv(s));
        }
    }

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {
        {"config_hash", rc.hash},
        {"seed", p.seed},
        {"mode", req.mode},
        {"versions",
         {{"polariton_lattice", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}}},
        {"started", detail::utc_stamp(started, "%Y-%m-%dT%H:%M:%SZ")},
        {"elapsed_s", elapsed},
        {"config", rc.normalized},
        {"plan", rc.plan},
        {"files", out.files},
        {"warnings", out.warnings},
        {"results", extra},
    };
    write_text((out.run_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return out;
}

// CLI entry: 0 success, 2 configuration error, 3 numerical error, 1 other.
inline int run(const RunRequest& req, std::ostream& log = std::cerr) {
    try {
        const RunOutcome o = run_pipeline(req);
        for (const auto& w : o.warnings) log << "warning: " << w << '\n';
        log << "wrote " << o.run_dir.string() << '\n';
        return 0;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DimensionError& e) {
        log << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        log << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace polariton
