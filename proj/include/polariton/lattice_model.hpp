// lattice_model.hpp: interacting hard-core lattice model: blockade radii,
// regularized van der Waals matrix, effective decay and model assembly

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polariton/band_solver.hpp"
#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/threading.hpp"

namespace polariton {

struct SpinModel {
    int n_sites = 0;
    Eigen::MatrixXcd hopping;      // J_ij, Hermitian, zero diagonal
    Eigen::MatrixXd interaction;   // V_ij, symmetric, zero diagonal
    double beta = 0.0;
    double pump = 0.0;             // on site 0
    Eigen::VectorXd gamma_site;
    double gamma_out = 0.0;        // at sites 0 and N-1
    double j1 = 0.0;               // |J_1|, output-intensity prefactor
    int blockade_sites = 1;
    double r_b = 0.0;
    double r_b_tilde = 0.0;
    std::vector<std::string> warnings;
};

// Blockade radii (r~_b, r_b) = ((C6/|J1|)^(1/6), (C6 |Delta| / Omega^2)^(1/6)).
inline std::pair<double, double> blockade_radii(const PhysicalConfig& cfg, double j1) {
    if (cfg.c6 < 0.0) throw UnsupportedInteractionError("attractive interaction (c6 < 0) is not supported");
    if (cfg.c6 == 0.0) return {0.0, 0.0};
    if (j1 == 0.0) throw DomainError("blockade_radii: J1 must be nonzero");
    if (!(cfg.omega_ctrl > 0.0)) throw DomainError("blockade_radii: omega_ctrl must be > 0");
    const double delta = std::hypot(cfg.delta_e, cfg.gamma_e);
    return {std::pow(cfg.c6 / std::abs(j1), 1.0 / 6.0),
            std::pow(cfg.c6 * delta / (cfg.omega_ctrl * cfg.omega_ctrl), 1.0 / 6.0)};
}

// Density of a site-0 orbital restricted to a finite window.
struct SiteDensity {
    std::vector<double> z;
    std::vector<double> weight;
    std::vector<double> density;
    double total() const {
        double s = 0.0;
        for (std::size_t q = 0; q < z.size(); ++q) s += weight[q] * density[q];
        return s;
    }
};

// |w_0|^2 restricted to cells -tail_cells..tail_cells around site 0.
inline SiteDensity site_density(const WannierBand& wb, int tail_cells) {
    const int K = wb.k_points;
    const int T = std::min(tail_cells, K / 2 - 1 + (K % 2));
    const int centre = K / 2;  // cell index of site 0
    const std::vector<double> d = wb.density();
    SiteDensity sd;
    for (int l = centre - T; l <= centre + T; ++l) {
        if (l < 0 || l >= K) continue;
        for (int q = 0; q < wb.nodes_per_cell; ++q) {
            const int idx = l * wb.nodes_per_cell + q;
            sd.z.push_back(wb.z[idx]);
            sd.weight.push_back(wb.weight[idx]);
            sd.density.push_back(d[idx]);
        }
    }
    return sd;
}

// V_m = (C6/2) int int rho(z) rho(z') / (r_b^6 + (z - z' - m a)^6), m >= 1.
inline double interaction_at_distance(const SiteDensity& sd, double a, double c6, double r_b, int m) {
    const double rb6 = std::pow(r_b, 6);
    const double shift = m * a;
    double s = 0.0;
    const std::size_t n = sd.z.size();
    for (std::size_t p = 0; p < n; ++p) {
        const double wp = sd.weight[p] * sd.density[p];
        if (wp == 0.0) continue;
        double inner = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            const double d = sd.z[p] - sd.z[q] - shift;
            const double d2 = d * d;
            inner += sd.weight[q] * sd.density[q] / (rb6 + d2 * d2 * d2);
        }
        s += wp * inner;
    }
    return 0.5 * c6 * s;
}

struct InteractionResult {
    Eigen::MatrixXd V;
    double tail_weight = 0.0;              // weight of w_0 outside the window
    std::vector<std::string> warnings;
};

inline Eigen::MatrixXd toeplitz_interaction(const std::vector<double>& Vm, int n) {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) V(i, j) = Vm[std::abs(i - j)];
    return V;
}

// Interaction matrix from sampled Wannier densities. `refined`, if given,
// holds the same band sampled with doubled panels and is used to check the
// quadrature on V_1.
inline InteractionResult interaction_matrix(const WannierBand& wb, double r_b, const PhysicalConfig& cfg,
                                            const WannierBand* refined = nullptr) {
    const int N = cfg.n_sites;
    InteractionResult res;
    if (cfg.c6 < 0.0) throw UnsupportedInteractionError("attractive interaction (c6 < 0) is not supported");
    const SiteDensity sd = site_density(wb, cfg.tail_cells);
    res.tail_weight = std::max(0.0, wb.norm2() - sd.total());
    if (cfg.c6 == 0.0 || N < 2) {
        res.V = Eigen::MatrixXd::Zero(N, N);
        return res;
    }
    std::vector<double> Vm(N, 0.0);
    parallel_for(static_cast<std::size_t>(N - 1), [&](std::size_t m) {
        Vm[m + 1] = interaction_at_distance(sd, wb.a, cfg.c6, r_b, static_cast<int>(m + 1));
    });
    res.V = toeplitz_interaction(Vm, N);
    if (res.tail_weight > 1e-6)
        res.warnings.push_back("Wannier weight outside the interaction window is " + format_double(res.tail_weight));
    if (refined) {
        const double fine = interaction_at_distance(site_density(*refined, cfg.tail_cells), wb.a, cfg.c6, r_b, 1);
        const double rel = std::abs(fine - Vm[1]) / std::max(std::abs(fine), 1e-300);
        if (rel > 1e-4)
            res.warnings.push_back("interaction quadrature not converged: V_1 changes by " + format_double(rel) +
                                   " relative on doubling");
    }
    return res;
}

// Point-like orbitals: V_m = (C6/2) / (r_b^6 + (m a)^6).
inline Eigen::MatrixXd pointlike_interaction(double c6, double r_b, double a, int n) {
    if (c6 < 0.0) throw UnsupportedInteractionError("attractive interaction (c6 < 0) is not supported");
    std::vector<double> Vm(n, 0.0);
    for (int m = 1; m < n; ++m) Vm[m] = 0.5 * c6 / (std::pow(r_b, 6) + std::pow(m * a, 6));
    return toeplitz_interaction(Vm, n);
}

// gamma_i = gamma_r * int |w_r|^2, identical on every site.
inline Eigen::VectorXd effective_decay(const WannierBand& wb, const PhysicalConfig& cfg) {
    return Eigen::VectorXd::Constant(cfg.n_sites, cfg.gamma_r * wb.component_weight(rydberg));
}

inline int blockade_window(double r_b, double a) {
    return std::max(1, static_cast<int>(std::lround(r_b / a)));
}

inline void check_blockade_regime(SpinModel& m) {
    if (m.r_b > 0.0 && !(m.r_b > m.r_b_tilde))
        m.warnings.push_back("r_b = " + format_double(m.r_b) + " um does not exceed r~_b = " +
                             format_double(m.r_b_tilde) + " um");
}

inline SpinModel assemble_spin_model(const PhysicalConfig& cfg, const WannierBand& wb, const Eigen::MatrixXd& V,
                                     const Eigen::VectorXd& gamma) {
    const int N = cfg.n_sites;
    if (V.rows() != N || V.cols() != N || gamma.size() != N)
        throw ConfigError("assemble_spin_model: inputs disagree on the number of sites");
    if (2 * (N - 1) > wb.k_points)
        throw ConfigError("assemble_spin_model: k_points must be at least 2 (n_sites - 1)");
    SpinModel m;
    m.n_sites = N;
    m.hopping = Eigen::MatrixXcd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j) m.hopping(i, j) = wb.J(i - j);
    m.interaction = V;
    m.beta = cfg.beta;
    m.pump = cfg.pump;
    m.gamma_site = cfg.gamma_site ? Eigen::VectorXd::Constant(N, *cfg.gamma_site) : gamma;
    m.j1 = std::abs(wb.J(1));
    m.gamma_out = cfg.gamma_out ? *cfg.gamma_out : m.j1;
    const auto [rt, rb] = blockade_radii(cfg, m.j1 > 0.0 ? m.j1 : 1.0);
    m.r_b_tilde = m.j1 > 0.0 ? rt : 0.0;
    m.r_b = rb;
    m.blockade_sites = blockade_window(rb, cfg.a);
    check_blockade_regime(m);
    const double detune = 2.0 * wb.site_energy.real() - cfg.beta;
    if (!(std::abs(m.j1) < 0.1 * std::abs(detune)))
        m.warnings.push_back("lower dark band not far detuned: |J1 / (2 eps - beta)| = " +
                             format_double(std::abs(m.j1 / detune)) + " >= 0.1");
    return m;
}

// Model with J_m = j1 / m^p and point-like interactions.
inline SpinModel power_law_model(const PhysicalConfig& cfg) {
    if (!cfg.gamma_site) throw ConfigError("power_law hopping needs gamma_site");
    const int N = cfg.n_sites;
    SpinModel m;
    m.n_sites = N;
    m.hopping = Eigen::MatrixXcd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i != j) m.hopping(i, j) = cfg.j1 / std::pow(std::abs(i - j), cfg.hopping_exponent);
    m.beta = cfg.beta;
    m.pump = cfg.pump;
    m.gamma_site = Eigen::VectorXd::Constant(N, *cfg.gamma_site);
    m.j1 = std::abs(cfg.j1);
    m.gamma_out = cfg.gamma_out ? *cfg.gamma_out : m.j1;
    const auto [rt, rb] = blockade_radii(cfg, m.j1);
    m.r_b_tilde = rt;
    m.r_b = rb;
    m.blockade_sites = blockade_window(rb, cfg.a);
    m.interaction = pointlike_interaction(cfg.c6, rb, cfg.a, N);
    check_blockade_regime(m);
    return m;
}

struct ModelBuild {
    std::optional<BandStructure> bands;
    std::optional<WannierBand> wannier;
    double tail_weight = 0.0;
    SpinModel model;
};

// Full pipeline from config to lattice model.
inline ModelBuild build_model(const PhysicalConfig& cfg) {
    cfg.validate();
    ModelBuild out;
    if (cfg.hopping_source == HoppingSource::power_law) {
        out.model = power_law_model(cfg);
        return out;
    }
    out.bands = solve_bands(cfg);
    out.wannier = wannier_transform(*out.bands, BandLabel::dark_upper, cfg.quad_order, cfg.quad_panels);
    const WannierBand fine = wannier_transform(*out.bands, BandLabel::dark_upper, cfg.quad_order, 2 * cfg.quad_panels);
    const double j1 = std::abs(out.wannier->J(1));
    const auto radii = cfg.c6 > 0.0 && j1 > 0.0 ? blockade_radii(cfg, j1) : std::pair<double, double>{0.0, 0.0};
    InteractionResult V = interaction_matrix(*out.wannier, radii.second, cfg, &fine);
    out.tail_weight = V.tail_weight;
    out.model = assemble_spin_model(cfg, *out.wannier, V.V, effective_decay(*out.wannier, cfg));
    for (auto& w : V.warnings) out.model.warnings.push_back(std::move(w));
    return out;
}

} // namespace polariton
