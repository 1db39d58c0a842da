// variational_engine.hpp: product-state dynamics under the blockade
// constraint, advanced by site-sequential implicit-midpoint minimization of
// pairwise trace-norm residuals
//
// Single site basis (|0> empty, |1> excited): rho = (1 + alpha . sigma) / 2,
// n = (1 + alpha_z) / 2, <s-> = (alpha_x - i alpha_y) / 2, vacuum (0, 0, -1).
// Two-site matrices use index 2 b_i + b_j.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polariton/errors.hpp"
#include "polariton/exact_engine.hpp"
#include "polariton/observables.hpp"
#include "polariton/quantum_core.hpp"

namespace polariton {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

namespace pauli {
inline Mat2 id() { return Mat2::Identity(); }
inline Mat2 x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 y() { Mat2 m; m << 0, cplx(0, 1), cplx(0, -1), 0; return m; }
inline Mat2 z() { Mat2 m; m << -1, 0, 0, 1; return m; }
inline Mat2 raise() { Mat2 m; m << 0, 0, 1, 0; return m; }
inline Mat2 lower() { Mat2 m; m << 0, 1, 0, 0; return m; }
inline Mat2 number() { Mat2 m; m << 0, 0, 0, 1; return m; }
inline Mat2 component(int mu) { return mu == 0 ? x() : mu == 1 ? y() : z(); }
} // namespace pauli

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    return out;
}

inline Mat2 bloch_to_rho(const Eigen::Vector3d& a) {
    return 0.5 * (pauli::id() + a.x() * pauli::x() + a.y() * pauli::y() + a.z() * pauli::z());
}

inline Eigen::Vector3d rho_to_bloch(const Mat2& rho) {
    return {(rho * pauli::x()).trace().real(), (rho * pauli::y()).trace().real(), (rho * pauli::z()).trace().real()};
}

inline Eigen::Vector3d ground_bloch() { return {0.0, 0.0, -1.0}; }

struct ProductState {
    std::vector<Eigen::Vector3d> alpha;

    static ProductState vacuum(int n) { return {std::vector<Eigen::Vector3d>(n, ground_bloch())}; }
    int size() const { return static_cast<int>(alpha.size()); }
    double population(int i) const { return 0.5 * (1.0 + alpha[i].z()); }
    cplx lowering(int i) const { return 0.5 * cplx(alpha[i].x(), -alpha[i].y()); }
    Eigen::VectorXd populations() const {
        Eigen::VectorXd p(size());
        for (int i = 0; i < size(); ++i) p(i) = population(i);
        return p;
    }
};

// Total jump rate acting on each site.
inline std::vector<double> site_loss(const SpinModel& m, const JumpSet& jumps) {
    std::vector<double> g(m.n_sites, 0.0);
    for (const Jump& j : jumps) g.at(j.site) += j.rate;
    return g;
}

// Lindblad action of a Hamiltonian H and jumps sqrt(rate_k) c_k on a matrix.
template <class Mat>
Mat lindblad(const Mat& H, const std::vector<std::pair<double, Mat>>& jumps, const Mat& R) {
    const cplx mi(0.0, -1.0);
    Mat out = mi * (H * R - R * H);
    for (const auto& [rate, c] : jumps) {
        const Mat cdc = c.adjoint() * c;
        out += rate * (c * R * c.adjoint() - 0.5 * (cdc * R + R * cdc));
    }
    return out;
}

// Site-local Hamiltonian: beta n + P sigma_x on site 0.
inline Mat2 local_hamiltonian(const SpinModel& m, int i) {
    Mat2 h = m.beta * pauli::number();
    if (i == 0) h += m.pump * pauli::x();
    return h;
}

// Two-site generator for sites (i, j), with every site-local term weighted
// 1 / (N - 1) so that summing over partners j counts each local term once.
inline Mat4 pair_liouvillian_apply(const SpinModel& m, const JumpSet& jumps, int i, int j, const Mat4& rho_pair) {
    if (i == j) throw std::invalid_argument("pair_liouvillian_apply: i == j");
    const double w = m.n_sites > 1 ? 1.0 / (m.n_sites - 1) : 1.0;
    const Mat2 I = pauli::id();
    Mat4 H = w * (kron(local_hamiltonian(m, i), I) + kron(I, local_hamiltonian(m, j)));
    H += -m.hopping(i, j) * kron(pauli::raise(), pauli::lower()) - m.hopping(j, i) * kron(pauli::lower(), pauli::raise());
    H += 2.0 * m.interaction(i, j) * kron(pauli::number(), pauli::number());
    std::vector<std::pair<double, Mat4>> c;
    for (const Jump& jp : jumps) {
        if (jp.site == i) c.emplace_back(w * jp.rate, kron(pauli::lower(), I));
        if (jp.site == j) c.emplace_back(w * jp.rate, kron(I, pauli::lower()));
    }
    return lindblad(H, c, rho_pair);
}

inline double trace_norm_hermitian(const Mat4& X) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(X, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

// Residual of one site update, affine in the candidate: X_j = C_j + sum_mu
// alpha_mu D_j[mu]. For N = 1 a single 2x2 term is embedded in the top-left
// block.
struct SiteResidual {
    std::vector<Mat4> C;
    std::vector<std::array<Mat4, 3>> D;

    double operator()(const Eigen::Vector3d& a) const {
        double s = 0.0;
        for (std::size_t j = 0; j < C.size(); ++j)
            s += trace_norm_hermitian(C[j] + a.x() * D[j][0] + a.y() * D[j][1] + a.z() * D[j][2]);
        return s;
    }

    // Minimizer of the summed squared Frobenius norms.
    Eigen::Vector3d least_squares() const {
        Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
        Eigen::Vector3d b = Eigen::Vector3d::Zero();
        for (std::size_t j = 0; j < C.size(); ++j)
            for (int mu = 0; mu < 3; ++mu) {
                b(mu) -= (D[j][mu].adjoint() * C[j]).trace().real();
                for (int nu = 0; nu < 3; ++nu) A(mu, nu) += (D[j][mu].adjoint() * D[j][nu]).trace().real();
            }
        return A.ldlt().solve(b);
    }
};

struct VariationalStats {
    long long site_updates = 0;
    long long optimizer_warnings = 0;
    long long evaluations = 0;
};

class VariationalEngine {
public:
    VariationalEngine(const SpinModel& m, const JumpSet& jumps, const VariationalOptions& opt = {})
        : m_(m), jumps_(jumps), opt_(opt), loss_(site_loss(m, jumps)) {}

    const SpinModel& model() const { return m_; }
    const VariationalOptions& options() const { return opt_; }
    const VariationalStats& stats() const { return stats_; }

    double tau() const {
        if (opt_.tau > 0.0) return opt_.tau;
        const double r = max_rate(m_);
        return r > 0.0 ? 0.01 / r : 0.01;
    }

    // Residual matrices for updating site i from `before` (site i at time t)
    // with all other sites taken from `latest`.
    SiteResidual build_residual(int i, const ProductState& before, const ProductState& latest, double tau) const {
        const int N = m_.n_sites;
        const Mat2 I = pauli::id();
        const Mat2 rho_i = bloch_to_rho(before.alpha[i]);
        std::vector<std::pair<double, Mat2>> c1;
        if (loss_[i] > 0.0) c1.emplace_back(loss_[i], pauli::lower());
        const Mat2 h_loc = local_hamiltonian(m_, i);
        SiteResidual R;

        if (N == 1) {
            auto L = [&](const Mat2& x) { return lindblad(h_loc, c1, x); };
            auto embed = [](const Mat2& x) {
                Mat4 out = Mat4::Zero();
                out.block<2, 2>(0, 0) = x;
                return out;
            };
            const Mat2 half = 0.5 * I;
            R.C.push_back(embed(half - rho_i - 0.5 * tau * (L(half) + L(rho_i))));
            std::array<Mat4, 3> d;
            for (int mu = 0; mu < 3; ++mu) {
                const Mat2 s = 0.5 * pauli::component(mu);
                d[mu] = embed(s - 0.5 * tau * L(s));
            }
            R.D.push_back(d);
            return R;
        }

        // Mean field on i from every other site, in the latest state.
        std::vector<cplx> plus(N);
        std::vector<double> dens(N);
        cplx plus_total = 0.0;
        double dens_total = 0.0;
        for (int k = 0; k < N; ++k) {
            if (k == i) continue;
            plus[k] = -m_.hopping(i, k) * latest.lowering(k);
            dens[k] = 2.0 * m_.interaction(i, k) * latest.population(k);
            plus_total += plus[k];
            dens_total += dens[k];
        }
        std::vector<std::pair<double, Mat4>> c2;
        if (loss_[i] > 0.0) c2.emplace_back(loss_[i], kron(pauli::lower(), I));

        R.C.reserve(N - 1);
        R.D.reserve(N - 1);
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            const cplx bp = plus_total - plus[j];
            const double bn = dens_total - dens[j];
            const Mat2 h_i = h_loc + bp * pauli::raise() + std::conj(bp) * pauli::lower() + bn * pauli::number();
            Mat4 H = kron(h_i, I);
            H += -m_.hopping(i, j) * kron(pauli::raise(), pauli::lower()) -
                 m_.hopping(j, i) * kron(pauli::lower(), pauli::raise());
            H += 2.0 * m_.interaction(i, j) * kron(pauli::number(), pauli::number());
            auto L = [&](const Mat4& x) { return lindblad(H, c2, x); };
            const Mat2 rho_j = bloch_to_rho(latest.alpha[j]);
            const Mat4 half_j = kron(0.5 * I, rho_j);
            const Mat4 ij = kron(rho_i, rho_j);
            R.C.push_back(half_j - ij - 0.5 * tau * (L(half_j) + L(ij)));
            std::array<Mat4, 3> d;
            for (int mu = 0; mu < 3; ++mu) {
                const Mat4 s = kron(0.5 * pauli::component(mu), rho_j);
                d[mu] = s - 0.5 * tau * L(s);
            }
            R.D.push_back(d);
        }
        return R;
    }

    // Largest population site i may take without violating any blockade
    // window that contains it, given the other sites in `state`.
    double population_cap(int i, const ProductState& state) const {
        const int N = m_.n_sites;
        const int w = m_.blockade_sites;
        double worst = 0.0;
        for (int c = std::max(0, i - w + 1); c <= std::min(N - 1, i + w - 1); ++c) {
            double s = 0.0;
            for (int j = std::max(0, c - w + 1); j <= std::min(N - 1, c + w - 1); ++j)
                if (j != i) s += state.population(j);
            worst = std::max(worst, s);
        }
        return 1.0 - worst;
    }

    // Projection onto the unit ball followed by the blockade clamp on alpha_z.
    Eigen::Vector3d project(int i, Eigen::Vector3d a, const ProductState& state) const {
        const double r = a.norm();
        if (r > 1.0) a /= r;
        const double cap = population_cap(i, state);
        if (cap < -1e-9)
            throw ConstraintError("blockade window around site " + std::to_string(i + 1) +
                                      " already holds more than one excitation",
                                  i);
        const double zmax = std::clamp(2.0 * cap - 1.0, -1.0, 1.0);
        if (a.z() > zmax) {
            a.z() = zmax;
            const double t = std::hypot(a.x(), a.y());
            const double tmax = std::sqrt(std::max(0.0, 1.0 - zmax * zmax));
            if (t > tmax) {
                a.x() *= tmax / t;
                a.y() *= tmax / t;
            }
        }
        return a;
    }

    // Constrained minimizer of the site residual: least-squares warm start,
    // then Nelder-Mead on the projected objective.
    Eigen::Vector3d minimize_site(int i, const ProductState& before, const ProductState& latest, double tau) {
        const SiteResidual R = build_residual(i, before, latest, tau);
        ++stats_.site_updates;
        auto f = [&](const Eigen::Vector3d& x) {
            ++stats_.evaluations;
            return R(project(i, x, latest));
        };
        Eigen::Vector3d x0 = R.least_squares();
        if (!x0.allFinite()) x0 = before.alpha[i];
        x0 = project(i, x0, latest);

        const double step = std::max(1e-7, 0.1 * (x0 - before.alpha[i]).norm());
        std::array<Eigen::Vector3d, 4> v;
        std::array<double, 4> fv;
        v[0] = x0;
        for (int d = 0; d < 3; ++d) {
            v[d + 1] = x0;
            v[d + 1](d) += step;
        }
        for (int s = 0; s < 4; ++s) fv[s] = f(v[s]);
        const double f_start = fv[0];

        int it = 0;
        for (; it < opt_.max_iter; ++it) {
            std::array<int, 4> idx{0, 1, 2, 3};
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            std::array<Eigen::Vector3d, 4> sv;
            std::array<double, 4> sf;
            for (int s = 0; s < 4; ++s) {
                sv[s] = v[idx[s]];
                sf[s] = fv[idx[s]];
            }
            v = sv;
            fv = sf;
            double diam = 0.0;
            for (int s = 1; s < 4; ++s) diam = std::max(diam, (v[s] - v[0]).norm());
            if (diam < 1e-13 || fv[3] - fv[0] <= 1e-16 + 1e-12 * fv[0]) break;

            const Eigen::Vector3d centroid = (v[0] + v[1] + v[2]) / 3.0;
            const Eigen::Vector3d xr = centroid + (centroid - v[3]);
            const double fr = f(xr);
            if (fr < fv[0]) {
                const Eigen::Vector3d xe = centroid + 2.0 * (centroid - v[3]);
                const double fe = f(xe);
                if (fe < fr) { v[3] = xe; fv[3] = fe; }
                else { v[3] = xr; fv[3] = fr; }
            } else if (fr < fv[2]) {
                v[3] = xr;
                fv[3] = fr;
            } else {
                const bool outside = fr < fv[3];
                const Eigen::Vector3d xc = outside ? Eigen::Vector3d(centroid + 0.5 * (xr - centroid))
                                                   : Eigen::Vector3d(centroid + 0.5 * (v[3] - centroid));
                const double fc = f(xc);
                if (fc < (outside ? fr : fv[3])) {
                    v[3] = xc;
                    fv[3] = fc;
                } else {
                    for (int s = 1; s < 4; ++s) {
                        v[s] = v[0] + 0.5 * (v[s] - v[0]);
                        fv[s] = f(v[s]);
                    }
                }
            }
        }
        int best = 0;
        for (int s = 1; s < 4; ++s)
            if (fv[s] < fv[best]) best = s;
        if (it >= opt_.max_iter && !(fv[best] < f_start)) ++stats_.optimizer_warnings;
        return project(i, v[best], latest);
    }

    // One time step: n_sweeps ascending passes, updates visible immediately.
    ProductState step(const ProductState& state, double tau) {
        ProductState next = state;
        for (int pass = 0; pass < std::max(1, opt_.n_sweeps); ++pass)
            for (int i = 0; i < m_.n_sites; ++i) next.alpha[i] = minimize_site(i, state, next, tau);
        check_feasible(next);
        return next;
    }

    void check_feasible(const ProductState& s) const {
        for (int i = 0; i < s.size(); ++i) {
            if (s.alpha[i].norm() > 1.0 + 1e-9) throw ConstraintError("Bloch vector outside the unit ball", i);
            double sum = 0.0;
            for (int j = std::max(0, i - m_.blockade_sites + 1); j <= std::min(s.size() - 1, i + m_.blockade_sites - 1); ++j)
                sum += s.population(j);
            if (sum > 1.0 + 1e-9) throw ConstraintError("blockade window exceeds one excitation", i);
        }
    }

    struct Evolution {
        ObservableSeries series;
        std::vector<ProductState> states;  // at each grid time
    };

    // Evolves through every grid time with steps no larger than tau.
    Evolution sweep_evolve(ProductState state, const std::vector<double>& t_grid) {
        check_grid(t_grid);
        if (state.size() != m_.n_sites) throw DimensionError("product state size does not match the model");
        const int N = m_.n_sites;
        Evolution ev;
        ev.series.time = t_grid;
        for (int i = 0; i < N; ++i) ev.series.add(pop_name(i));
        ev.series.add("i_out");
        auto record = [&](std::size_t g) {
            for (int i = 0; i < N; ++i) ev.series.columns[i].second[g] = state.population(i);
            ev.series.columns[N].second[g] = output_intensity(std::clamp(state.population(N - 1), 0.0, 1.0), m_.j1);
            ev.states.push_back(state);
        };
        record(0);
        const double t0 = tau();
        for (std::size_t g = 1; g < t_grid.size(); ++g) {
            const double span = t_grid[g] - t_grid[g - 1];
            const int n = substeps(span, t0);
            const double h = span / n;
            for (int s = 0; s < n; ++s) state = step(state, h);
            record(g);
        }
        return ev;
    }

    struct Steady {
        ProductState state;
        double change = 0.0;   // max |delta alpha| over the last step
        double t_reached = 0.0;
    };

    // Evolves from the vacuum until one step changes no Bloch component by
    // more than ss_tol.
    Steady steady_state() {
        Steady ss;
        ss.state = ProductState::vacuum(m_.n_sites);
        const double h = tau();
        double t = 0.0;
        for (;;) {
            const ProductState next = step(ss.state, h);
            double change = 0.0;
            for (int i = 0; i < m_.n_sites; ++i) change = std::max(change, (next.alpha[i] - ss.state.alpha[i]).cwiseAbs().maxCoeff());
            ss.state = next;
            t += h;
            ss.change = change;
            ss.t_reached = t;
            if (change < opt_.ss_tol) return ss;
            if (t >= opt_.ss_t_max)
                throw NumericalError("variational steady state not reached by t = " + format_double(t) +
                                     " (last change " + format_double(change) + ")");
        }
    }

    // State after a photon detection at the last site: walking inwards from
    // the second-to-last site, sites are reset to the ground state until their
    // accumulated steady-state population reaches one; the last site is reset
    // too. If the sum never reaches one every site is reset.
    static ProductState setback(const ProductState& ss) {
        ProductState s = ss;
        const int N = s.size();
        s.alpha[N - 1] = ground_bloch();
        double acc = 0.0;
        for (int i = N - 2; i >= 0; --i) {
            acc += ss.population(i);
            s.alpha[i] = ground_bloch();
            if (acc >= 1.0) break;
        }
        return s;
    }

    // g2(tau) = n_ss n_N(tau) / n_ss^2 after the setback.
    ObservableSeries g2_variational(const ProductState& state_ss, const std::vector<double>& tau_grid) {
        const int last = m_.n_sites - 1;
        const double n_ss = state_ss.population(last);
        if (n_ss < 1e-12) throw UndefinedCorrelationError("steady-state population of the last site vanishes");
        const Evolution ev = sweep_evolve(setback(state_ss), tau_grid);
        std::vector<double> raw(tau_grid.size());
        for (std::size_t g = 0; g < tau_grid.size(); ++g) raw[g] = n_ss * ev.states[g].population(last);
        ObservableSeries out;
        out.time_name = "tau";
        out.time = tau_grid;
        out.add("g2") = g2_normalize(raw, n_ss);
        return out;
    }

private:
    SpinModel m_;
    JumpSet jumps_;
    VariationalOptions opt_;
    std::vector<double> loss_;
    VariationalStats stats_;
};

// Residual D_i for a candidate, with site i and its partners taken from `state`.
inline double residual(const SpinModel& m, const JumpSet& jumps, int i, const Eigen::Vector3d& candidate,
                       const ProductState& state, double tau) {
    const VariationalEngine eng(m, jumps);
    return eng.build_residual(i, state, state, tau)(candidate);
}

} // namespace polariton
