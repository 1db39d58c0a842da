// exact_engine.hpp: reference dynamics for small lattices: master-equation
// integration, steady state, two-time correlations and quantum trajectories

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polariton/errors.hpp"
#include "polariton/observables.hpp"
#include "polariton/quantum_core.hpp"
#include "polariton/rng.hpp"
#include "polariton/threading.hpp"

namespace polariton {

// Largest of |J1|, P and the decay rates; interactions are not included.
inline double max_rate(const SpinModel& m) {
    double r = std::max(std::abs(m.j1), m.pump);
    r = std::max(r, m.gamma_out);
    if (m.gamma_site.size() > 0) r = std::max(r, m.gamma_site.maxCoeff());
    return r;
}

inline double default_dt(const SpinModel& m) {
    const double r = max_rate(m);
    return r > 0.0 ? 1e-3 / r : 1e-3;
}

inline void check_grid(const std::vector<double>& t) {
    if (t.empty()) throw std::invalid_argument("time grid is empty");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
}

// Number of equal substeps of at most dt covering `span`.
inline int substeps(double span, double dt) {
    return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
}

inline DensityMatrix rk4_step(const Liouvillian& L, const DensityMatrix& rho, double h) {
    const DensityMatrix k1 = L.apply(rho);
    const DensityMatrix k2 = L.apply(rho + 0.5 * h * k1);
    const DensityMatrix k3 = L.apply(rho + 0.5 * h * k2);
    const DensityMatrix k4 = L.apply(rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates rho from t_grid[0] through every grid time with fixed RK4 steps
// no larger than dt, calling record(index, rho) at each grid time. Throws if
// the trace drifts by more than 1e-6.
inline DensityMatrix propagate_density(const Liouvillian& L, DensityMatrix rho, const std::vector<double>& t_grid,
                                       double dt, const std::function<void(std::size_t, const DensityMatrix&)>& record) {
    check_grid(t_grid);
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const cplx tr0 = rho.trace();
    record(0, rho);
    for (std::size_t g = 1; g < t_grid.size(); ++g) {
        const double span = t_grid[g] - t_grid[g - 1];
        const int n = substeps(span, dt);
        const double h = span / n;
        for (int s = 0; s < n; ++s) rho = rk4_step(L, rho, h);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        const double drift = std::abs(rho.trace() - tr0);
        if (drift > 1e-6 * std::max(1.0, std::abs(tr0)))
            throw NumericalError("trace drift " + format_double(drift) + " at t = " + format_double(t_grid[g]) +
                                 "; reduce exact_engine.dt");
        record(g, rho);
    }
    return rho;
}

inline double population_of(const DensityMatrix& rho, int site) {
    const Eigen::Index bit = Eigen::Index{1} << site;
    double s = 0.0;
    for (Eigen::Index b = 0; b < rho.rows(); ++b)
        if (b & bit) s += rho(b, b).real();
    return s;
}

struct ExactResult {
    ObservableSeries series;
    DensityMatrix final_state;
};

// Populations of every site and I_out at each grid time.
inline ExactResult integrate_me(const SpinModel& m, const JumpSet& jumps, const DensityMatrix& rho0,
                                const std::vector<double>& t_grid, double dt = 0.0) {
    check_dim(m, rho0.rows());
    const Liouvillian L(m, jumps);
    ExactResult res;
    res.series.time = t_grid;
    std::vector<std::vector<double>*> pops;
    for (int i = 0; i < m.n_sites; ++i) pops.push_back(&res.series.add(pop_name(i)));
    auto& iout = res.series.add("i_out");
    res.final_state = propagate_density(L, rho0, t_grid, dt > 0.0 ? dt : default_dt(m),
                                        [&](std::size_t g, const DensityMatrix& rho) {
                                            for (int i = 0; i < m.n_sites; ++i)
                                                (*pops[i])[g] = population_of(rho, i);
                                            iout[g] = output_intensity(std::clamp((*pops.back())[g], 0.0, 1.0), m.j1);
                                        });
    return res;
}

struct SteadyStateOptions {
    double tol = 1e-8;
    double t_max = 5000.0;
};

struct SteadyState {
    DensityMatrix rho;
    double residual = 0.0;
    double t_reached = 0.0;
};

// Stable RK4 step for relaxation runs: bounded by the Liouvillian's spectral
// radius estimate rather than by max_rate.
inline double relaxation_dt(const Liouvillian& L) {
    const auto& H = L.heff();
    double gersh = 0.0;
    for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
        double s = 0.0;
        for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(H, r); it; ++it) s += std::abs(it.value());
        gersh = std::max(gersh, s);
    }
    double rates = 0.0;
    for (const Jump& j : L.jumps()) rates += j.rate;
    return 2.0 / std::max(2.0 * gersh + rates, 1e-12);
}

// Integrates from the vacuum until the trace norm of L[rho] drops below tol.
inline SteadyState steady_state(const SpinModel& m, const JumpSet& jumps, const SteadyStateOptions& opt = {}) {
    if (m.n_sites > 6) throw DimensionError("steady_state: exact density matrices limited to n_sites <= 6");
    const Liouvillian L(m, jumps);
    SteadyState ss;
    ss.rho = vacuum_density(m.n_sites);
    const double h = std::min(relaxation_dt(L), 0.05 / std::max(max_rate(m), 1e-12));
    const int chunk = 200;
    double t = 0.0;
    for (;;) {
        ss.residual = trace_norm(L.apply(ss.rho));
        ss.t_reached = t;
        if (ss.residual < opt.tol) return ss;
        if (t >= opt.t_max)
            throw NumericalError("steady state not reached by t = " + format_double(t) + " (residual " +
                                 format_double(ss.residual) + ")");
        for (int s = 0; s < chunk; ++s) ss.rho = rk4_step(L, ss.rho, h);
        ss.rho = 0.5 * (ss.rho + ss.rho.adjoint()).eval();
        ss.rho /= ss.rho.trace();
        t += chunk * h;
    }
}

// g2(tau) = Tr{n_N rho'(tau)} / <n_N>_ss^2 with rho' = s-_N rho_ss s+_N left
// unnormalized.
inline ObservableSeries g2_exact(const SpinModel& m, const JumpSet& jumps, const std::vector<double>& tau_grid,
                                 double dt = 0.0, const SteadyStateOptions& opt = {}) {
    const SteadyState ss = steady_state(m, jumps, opt);
    const int last = m.n_sites - 1;
    const double n_ss = population_of(ss.rho, last);
    if (n_ss < 1e-12) throw UndefinedCorrelationError("steady-state population of the last site vanishes");
    const Liouvillian L(m, jumps);
    std::vector<double> raw(tau_grid.size());
    propagate_density(L, lower_both_sides(ss.rho, last), tau_grid, dt > 0.0 ? dt : default_dt(m),
                      [&](std::size_t g, const DensityMatrix& rho) { raw[g] = population_of(rho, last); });
    ObservableSeries out;
    out.time_name = "tau";
    out.time = tau_grid;
    out.add("g2") = g2_normalize(raw, n_ss);
    return out;
}

struct WfmcResult {
    ObservableSeries series;   // pop_i, i_out and matching *_se columns
    long long jumps = 0;
    long long renormalizations = 0;
};

namespace detail {

using SparseH = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline PureState rk4_psi(const SparseH& H, const PureState& psi, double h) {
    const cplx mi(0.0, -1.0);
    const PureState k1 = mi * (H * psi);
    const PureState k2 = mi * (H * (psi + 0.5 * h * k1));
    const PureState k3 = mi * (H * (psi + 0.5 * h * k2));
    const PureState k4 = mi * (H * (psi + h * k3));
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// The RK4 map for a linear ODE is the polynomial T(h) = sum_{n<=4} (-i H h)^n / n!.
// For small bases T is cached as a dense matrix so a full step costs one matvec.
class Rk4Stepper {
public:
    explicit Rk4Stepper(const SparseH& H) : H_(H) {}

    PureState step(const PureState& psi, double h) {
        if (H_.rows() > kDenseLimit) return rk4_psi(H_, psi, h);
        if (h != h_cached_) {
            const Eigen::MatrixXcd A = cplx(0.0, -h) * Eigen::MatrixXcd(H_);
            const auto I = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
            T_ = I + A * (I + A * (0.5 * I + A * (I / 6.0 + A / 24.0)));
            h_cached_ = h;
        }
        return T_ * psi;
    }

private:
    static constexpr Eigen::Index kDenseLimit = 64;
    const SparseH& H_;
    Eigen::MatrixXcd T_;
    double h_cached_ = -1.0;
};

inline PureState lower(const PureState& psi, int site) {
    const Eigen::Index bit = Eigen::Index{1} << site;
    PureState out = PureState::Zero(psi.size());
    for (Eigen::Index b = 0; b < psi.size(); ++b)
        if (b & bit) out(b ^ bit) = psi(b);
    return out;
}

} // namespace detail

// First-order quantum trajectories: H_eff evolution, jump when the squared
// norm falls below a uniform draw (located by bisection to 1e-10 of the
// step), channel chosen with probability proportional to rate ||s- psi||^2.
inline WfmcResult wfmc_run(const SpinModel& m, const JumpSet& jumps, const PureState& psi0,
                           const std::vector<double>& t_grid, int n_traj, std::uint64_t seed, double dt = 0.0) {
    check_dim(m, psi0.size());
    check_grid(t_grid);
    if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
    const double step = dt > 0.0 ? dt : default_dt(m);
    const detail::SparseH H = effective_hamiltonian(m, jumps);
    const int N = m.n_sites;
    const std::size_t T = t_grid.size();
    const std::size_t stride = static_cast<std::size_t>(N) * T;
    std::vector<double> samples(static_cast<std::size_t>(n_traj) * stride);
    std::vector<long long> jump_count(n_traj, 0), renorm_count(n_traj, 0);

    parallel_for(static_cast<std::size_t>(n_traj), [&](std::size_t tr) {
        TrajectoryRng rng(seed, tr);
        double* out = samples.data() + tr * stride;
        PureState psi = psi0.normalized();
        detail::Rk4Stepper full(H);
        double threshold = rng.uniform();
        auto record = [&](std::size_t g) {
            const Eigen::VectorXd pop = populations(psi, N);
            for (int i = 0; i < N; ++i) out[g * N + i] = pop(i);
        };
        auto do_jump = [&] {
            std::vector<double> w(jumps.size());
            double total = 0.0;
            for (std::size_t c = 0; c < jumps.size(); ++c) {
                w[c] = jumps[c].rate * detail::lower(psi, jumps[c].site).squaredNorm();
                total += w[c];
            }
            if (!(total > 0.0)) {
                psi.normalize();
                ++renorm_count[tr];
            } else {
                const double u = rng.uniform() * total;
                std::size_t c = 0;
                double acc = w[0];
                while (acc < u && c + 1 < jumps.size()) acc += w[++c];
                psi = detail::lower(psi, jumps[c].site).normalized();
                ++jump_count[tr];
            }
            threshold = rng.uniform();
        };
        record(0);
        for (std::size_t g = 1; g < T; ++g) {
            const double span = t_grid[g] - t_grid[g - 1];
            const int n = substeps(span, step);
            const double h = span / n;
            for (int s = 0; s < n; ++s) {
                double rem = h;
                while (rem > 0.0) {
                    PureState trial = rem == h ? full.step(psi, h) : detail::rk4_psi(H, psi, rem);
                    if (trial.squaredNorm() >= threshold) {
                        psi = std::move(trial);
                        break;
                    }
                    double lo = 0.0, hi = rem;
                    while (hi - lo > 1e-10 * h) {
                        const double mid = 0.5 * (lo + hi);
                        if (detail::rk4_psi(H, psi, mid).squaredNorm() >= threshold) lo = mid;
                        else hi = mid;
                    }
                    psi = detail::rk4_psi(H, psi, hi);
                    rem -= hi;
                    do_jump();
                }
                if (psi.squaredNorm() < 1e-200) {
                    psi.normalize();
                    ++renorm_count[tr];
                }
            }
            record(g);
        }
    });

    WfmcResult res;
    res.series.time = t_grid;
    for (int i = 0; i < N; ++i) res.series.add(pop_name(i));
    res.series.add("i_out");
    for (int i = 0; i < N; ++i) res.series.add(pop_name(i) + "_se");
    res.series.add("i_out_se");
    for (int i = 0; i < N; ++i) {
        auto& mean_col = res.series.add(pop_name(i));
        auto& se_col = res.series.add(pop_name(i) + "_se");
        for (std::size_t g = 0; g < T; ++g) {
            KahanSum s;
            for (int tr = 0; tr < n_traj; ++tr) s.add(samples[tr * stride + g * N + i]);
            const double mean = s.value() / n_traj;
            KahanSum v;
            for (int tr = 0; tr < n_traj; ++tr) {
                const double d = samples[tr * stride + g * N + i] - mean;
                v.add(d * d);
            }
            mean_col[g] = mean;
            se_col[g] = n_traj > 1 ? std::sqrt(v.value() / (n_traj - 1) / n_traj) : 0.0;
        }
    }
    const auto& last = res.series[pop_name(N - 1)];
    const auto& last_se = res.series[pop_name(N - 1) + "_se"];
    auto& iout = res.series.add("i_out");
    auto& iout_se = res.series.add("i_out_se");
    for (std::size_t g = 0; g < T; ++g) {
        iout[g] = output_intensity(std::clamp(last[g], 0.0, 1.0), m.j1);
        iout_se[g] = std::abs(m.j1) * last_se[g];
    }
    for (int tr = 0; tr < n_traj; ++tr) {
        res.jumps += jump_count[tr];
        res.renormalizations += renorm_count[tr];
    }
    return res;
}

} // namespace polariton
