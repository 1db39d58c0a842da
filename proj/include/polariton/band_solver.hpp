// band_solver.hpp: Bloch bands of the four-component light-matter model,
// dark-band identification, Wannier functions and hopping amplitudes
//
// Plane-wave basis index: 4 * p + c, p = n + M for G = 2 pi n / a, n in
// [-M, M], and component c in {0: forward photon, 1: backward photon,
// 2: intermediate state e, 3: Rydberg state r}.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/quadrature.hpp"
#include "polariton/threading.hpp"
#include "polariton/units.hpp"

namespace polariton {

using cplx = std::complex<double>;

enum class BandLabel { dark_upper, dark_lower, bright, other };

inline const char* to_string(BandLabel l) {
    switch (l) {
        case BandLabel::dark_upper: return "dark_upper";
        case BandLabel::dark_lower: return "dark_lower";
        case BandLabel::bright: return "bright";
        case BandLabel::other: return "other";
    }
    return "?";
}

enum Component : int { photon_forward = 0, photon_backward = 1, excited = 2, rydberg = 3 };

// Collective single-photon coupling prefactor [6 pi gamma_e c^3 / omega_ge^2]^(1/2).
inline double coupling_prefactor(const PhysicalConfig& cfg) {
    return std::sqrt(6.0 * kPi * cfg.gamma_e * kSpeedOfLight * kSpeedOfLight * kSpeedOfLight /
                     (cfg.omega_ge * cfg.omega_ge));
}

// Cell-periodic atomic density [um^-3]: Gaussians of width sigma at every
// lattice site, mean n0. Evaluated through its Fourier series so that wide
// Gaussians give an exactly uniform profile.
inline double atom_density(const PhysicalConfig& cfg, double z) {
    const double n0 = cfg.n0 * kPerCm3ToPerUm3;
    const double G1 = kTwoPi / cfg.a;
    double sum = 1.0;
    for (int p = 1;; ++p) {
        const double G = p * G1;
        const double f = std::exp(-0.5 * cfg.sigma_density * cfg.sigma_density * G * G);
        if (f < 1e-18) break;
        sum += 2.0 * f * std::cos(G * z);
    }
    return n0 * std::max(sum, 0.0);
}

// Fourier coefficients g_G = (1/a) int_cell g(z) exp(-i G z) dz of
// g(z) = g~ sqrt(n(z)), for G = 2 pi n / a with n = -2M..2M. Index n + 2M.
inline std::vector<cplx> coupling_fourier(const PhysicalConfig& cfg) {
    if (!(cfg.sigma_density > 0.0)) throw ConfigError("sigma_density must be > 0");
    if (!(cfg.a > 0.0)) throw ConfigError("a must be > 0");
    const int M = cfg.pw_cutoff;
    const double gt = coupling_prefactor(cfg);
    const auto rule = composite_gauss_legendre(-0.5 * cfg.a, 0.5 * cfg.a, 64, 16);
    std::vector<double> gz(rule.nodes.size());
    for (std::size_t q = 0; q < gz.size(); ++q) gz[q] = gt * std::sqrt(atom_density(cfg, rule.nodes[q]));
    std::vector<cplx> out(4 * M + 1);
    for (int n = -2 * M; n <= 2 * M; ++n) {
        const double G = kTwoPi * n / cfg.a;
        cplx s = 0.0;
        for (std::size_t q = 0; q < gz.size(); ++q)
            s += rule.weights[q] * gz[q] * std::polar(1.0, -G * rule.nodes[q]);
        out[n + 2 * M] = s / cfg.a;
    }
    return out;
}

inline Eigen::MatrixXcd bloch_hamiltonian(const PhysicalConfig& cfg, double k, const std::vector<cplx>& gG) {
    if (std::abs(k) > kPi / cfg.a * (1.0 + 1e-12))
        throw DomainError("bloch_hamiltonian: k outside the first Brillouin zone");
    const int M = cfg.pw_cutoff;
    const int np = 2 * M + 1;
    if (static_cast<int>(gG.size()) != 4 * M + 1) throw DimensionError("bloch_hamiltonian: coupling table size");
    const cplx delta(cfg.delta_e, -cfg.gamma_e);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(4 * np, 4 * np);
    for (int p = 0; p < np; ++p) {
        const double q = k + kTwoPi * (p - M) / cfg.a;
        H(4 * p + photon_forward, 4 * p + photon_forward) = kSpeedOfLight * q;
        H(4 * p + photon_backward, 4 * p + photon_backward) = -kSpeedOfLight * q;
        H(4 * p + excited, 4 * p + excited) = delta;
        H(4 * p + rydberg, 4 * p + rydberg) = cfg.delta2;
        H(4 * p + excited, 4 * p + rydberg) = cfg.omega_ctrl;
        H(4 * p + rydberg, 4 * p + excited) = cfg.omega_ctrl;
        for (int s = 0; s < np; ++s) {
            const cplx g = gG[p - s + 2 * M];
            H(4 * p + photon_forward, 4 * s + excited) = g;
            H(4 * p + photon_backward, 4 * s + excited) = g;
            H(4 * p + excited, 4 * s + photon_forward) = g;
            H(4 * p + excited, 4 * s + photon_backward) = g;
        }
    }
    return H;
}

inline Eigen::MatrixXcd bloch_hamiltonian(const PhysicalConfig& cfg, double k) {
    return bloch_hamiltonian(cfg, k, coupling_fourier(cfg));
}

struct BandStructure {
    PhysicalConfig cfg;
    std::vector<double> k_grid;
    std::vector<Eigen::VectorXcd> eigenvalues;   // per k, column order = tracked band index
    std::vector<Eigen::MatrixXcd> eigenvectors;  // per k, unit-norm columns
    Eigen::MatrixXd e_weight;                    // (k, band)
    std::vector<BandLabel> labels;

    int n_k() const { return static_cast<int>(k_grid.size()); }
    int n_bands() const { return labels.empty() ? 0 : static_cast<int>(labels.size()); }
    int k_zero_index() const {
        for (int i = 0; i < n_k(); ++i)
            if (k_grid[i] == 0.0) return i;
        throw DimensionError("k grid lacks k = 0");
    }
    int band_index(BandLabel l) const {
        for (int b = 0; b < n_bands(); ++b)
            if (labels[b] == l) return b;
        throw LabelError(std::string("no band labelled ") + to_string(l));
    }
    cplx energy(int ik, int band) const { return eigenvalues[ik](band); }
};

// k_m = 2 pi m / (K a), m = -floor(K/2) .. ceil(K/2) - 1.
inline std::vector<double> brillouin_grid(int K, double a) {
    std::vector<double> ks;
    ks.reserve(K);
    for (int m = -(K / 2); m <= (K + 1) / 2 - 1; ++m) ks.push_back(kTwoPi * m / (K * a));
    return ks;
}

namespace detail {

// Minimum-cost perfect assignment (Hungarian method with potentials).
// Returns col[row].
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col(n);
    for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
    return col;
}

inline double energy_scale(const Eigen::VectorXcd& e) {
    return std::max(1.0, e.cwiseAbs().maxCoeff());
}

// Eigenvalues closer than this are treated as degenerate. The photon lines
// make the spectrum span ~1e10 rad/us, so anything coarser than the
// eigensolver's own precision would merge distinct dark bands.
inline double degeneracy_tol(const Eigen::VectorXcd& e) {
    return 256.0 * std::numeric_limits<double>::epsilon() * energy_scale(e);
}

// Within each cluster of degenerate eigenvalues, rotate the eigenvectors to
// best match the previous k-point's vectors, provided the match is well
// conditioned. Leaves the basis unchanged otherwise.
inline void align_degenerate(Eigen::VectorXcd& vals, Eigen::MatrixXcd& vecs, const Eigen::MatrixXcd& prev) {
    const int n = static_cast<int>(vals.size());
    const double tol = degeneracy_tol(vals);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return vals(x).real() < vals(y).real() || (vals(x).real() == vals(y).real() && vals(x).imag() < vals(y).imag());
    });
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        const int a0 = order[s];
        if (seen[a0]) continue;
        std::vector<int> cluster;
        for (int t = s; t < n; ++t) {
            const int b = order[t];
            if (!seen[b] && std::abs(vals(b) - vals(a0)) < tol) cluster.push_back(b);
            if (vals(b).real() - vals(a0).real() > tol) break;
        }
        for (int b : cluster) seen[b] = 1;
        const int g = static_cast<int>(cluster.size());
        if (g < 2) continue;
        Eigen::MatrixXcd V(vecs.rows(), g);
        for (int c = 0; c < g; ++c) V.col(c) = vecs.col(cluster[c]);
        // Orthonormal basis of the cluster span.
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
        Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(V.rows(), g);
        Eigen::MatrixXcd proj = Q.adjoint() * prev;  // g x n
        std::vector<int> cols(n);
        std::iota(cols.begin(), cols.end(), 0);
        std::partial_sort(cols.begin(), cols.begin() + g, cols.end(),
                          [&](int x, int y) { return proj.col(x).norm() > proj.col(y).norm(); });
        Eigen::MatrixXcd B(g, g);
        for (int c = 0; c < g; ++c) B.col(c) = proj.col(cols[c]);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        if (svd.singularValues().minCoeff() < 0.5) continue;
        // Closest unitary to B: U V^T; new vectors Q * that.
        const Eigen::MatrixXcd R = svd.matrixU() * svd.matrixV().adjoint();
        const Eigen::MatrixXcd aligned = Q * R;
        for (int c = 0; c < g; ++c) vecs.col(cluster[c]) = aligned.col(c);
    }
}

} // namespace detail

// Diagonalize every k-point, track bands by maximal eigenvector overlap and
// label the dark pair. Dark candidates are bands with Omega > 0 whose largest
// e-weight over k stays below dark_weight_tol; the two closest to zero energy
// at k = 0 form the pair and are energy-ordered per k into dark_upper and
// dark_lower. Remaining candidates are "other", the rest "bright".
inline BandStructure solve_bands(const PhysicalConfig& cfg) {
    cfg.validate();
    const int K = cfg.resolved_k_points();
    const int M = cfg.pw_cutoff;
    const int dim = 4 * (2 * M + 1);
    const auto gG = coupling_fourier(cfg);

    BandStructure bs;
    bs.cfg = cfg;
    bs.k_grid = brillouin_grid(K, cfg.a);
    bs.eigenvalues.resize(K);
    bs.eigenvectors.resize(K);

    parallel_for(static_cast<std::size_t>(K), [&](std::size_t ik) {
        const double k = bs.k_grid[ik];
        const Eigen::MatrixXcd H = bloch_hamiltonian(cfg, k, gG);
        Eigen::VectorXcd vals;
        Eigen::MatrixXcd vecs;
        if (cfg.gamma_e == 0.0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
            if (es.info() != Eigen::Success)
                throw NumericalError("eigensolver failed at k = " + format_double(k));
            vals = es.eigenvalues().cast<cplx>();
            vecs = es.eigenvectors();
        } else {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H);
            if (es.info() != Eigen::Success)
                throw NumericalError("eigensolver failed at k = " + format_double(k));
            vals = es.eigenvalues();
            vecs = es.eigenvectors();
        }
        for (int c = 0; c < dim; ++c) vecs.col(c).normalize();
        std::vector<int> order(dim);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return vals(x).real() < vals(y).real(); });
        Eigen::VectorXcd sv(dim);
        Eigen::MatrixXcd svec(dim, dim);
        for (int c = 0; c < dim; ++c) {
            sv(c) = vals(order[c]);
            svec.col(c) = vecs.col(order[c]);
        }
        bs.eigenvalues[ik] = sv;
        bs.eigenvectors[ik] = svec;
    });

    // Track from the zone edge upwards by maximal overlap of cell-periodic parts.
    for (int ik = 1; ik < K; ++ik) {
        Eigen::VectorXcd& vals = bs.eigenvalues[ik];
        Eigen::MatrixXcd& vecs = bs.eigenvectors[ik];
        const Eigen::MatrixXcd& prev = bs.eigenvectors[ik - 1];
        detail::align_degenerate(vals, vecs, prev);
        const Eigen::MatrixXd overlap = (prev.adjoint() * vecs).cwiseAbs2();
        const std::vector<int> col = detail::hungarian(-overlap);
        Eigen::VectorXcd tv(dim);
        Eigen::MatrixXcd tvec(dim, dim);
        for (int b = 0; b < dim; ++b) {
            tv(b) = vals(col[b]);
            tvec.col(b) = vecs.col(col[b]);
        }
        vals = tv;
        vecs = tvec;
    }

    auto compute_weights = [&] {
        bs.e_weight.resize(K, dim);
        for (int ik = 0; ik < K; ++ik)
            for (int b = 0; b < dim; ++b) {
                double w = 0.0;
                for (int p = 0; p < 2 * M + 1; ++p) w += std::norm(bs.eigenvectors[ik](4 * p + excited, b));
                bs.e_weight(ik, b) = w;
            }
    };
    compute_weights();

    bs.labels.assign(dim, BandLabel::bright);
    if (!(cfg.omega_ctrl > 0.0)) return bs;  // no control field: no dark bands

    std::vector<int> candidates;
    for (int b = 0; b < dim; ++b)
        if (bs.e_weight.col(b).maxCoeff() < cfg.dark_weight_tol) candidates.push_back(b);
    for (int b : candidates) bs.labels[b] = BandLabel::other;
    if (candidates.size() < 2) return bs;

    const int k0 = bs.k_zero_index();
    std::sort(candidates.begin(), candidates.end(), [&](int x, int y) {
        return std::abs(bs.energy(k0, x).real()) < std::abs(bs.energy(k0, y).real());
    });
    const int up = candidates[0];
    const int lo = candidates[1];
    bs.labels[up] = BandLabel::dark_upper;
    bs.labels[lo] = BandLabel::dark_lower;

    for (int ik = 0; ik < K; ++ik) {
        if (bs.energy(ik, up).real() < bs.energy(ik, lo).real()) {
            std::swap(bs.eigenvalues[ik](up), bs.eigenvalues[ik](lo));
            bs.eigenvectors[ik].col(up).swap(bs.eigenvectors[ik].col(lo));
        }
    }
    // Degenerate pair at the crossing: pick the combination continuous with
    // the upper band on the positive-k side.
    if (k0 + 1 < K && std::abs(bs.energy(k0, up) - bs.energy(k0, lo)) < detail::degeneracy_tol(bs.eigenvalues[k0])) {
        Eigen::MatrixXcd V(dim, 2);
        V.col(0) = bs.eigenvectors[k0].col(up);
        V.col(1) = bs.eigenvectors[k0].col(lo);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
        const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, 2);
        const Eigen::VectorXcd c = Q.adjoint() * bs.eigenvectors[k0 + 1].col(up);
        if (c.norm() > 1e-3) {
            const Eigen::VectorXcd cu = c.normalized();
            const Eigen::Vector2cd cl(-std::conj(cu(1)), std::conj(cu(0)));
            bs.eigenvectors[k0].col(up) = Q * cu;
            bs.eigenvectors[k0].col(lo) = Q * cl;
        }
    }
    compute_weights();
    return bs;
}

// Smallest separation between any bright band and the upper dark band.
inline double band_gap(const BandStructure& bs) {
    const int up = bs.band_index(BandLabel::dark_upper);
    double gap = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int b = 0; b < bs.n_bands(); ++b) {
        if (bs.labels[b] != BandLabel::bright) continue;
        any = true;
        for (int ik = 0; ik < bs.n_k(); ++ik)
            gap = std::min(gap, std::abs(bs.energy(ik, b).real() - bs.energy(ik, up).real()));
    }
    if (!any) throw LabelError("band_gap: no bright band");
    return gap;
}

// The two dark branches followed straight through the k = 0 crossing: the
// energy-ordered bands are swapped on one side of the crossing according to
// which pairing gives larger eigenvector overlap across it.
struct DarkBranches {
    std::vector<double> k;
    std::vector<double> first;   // Re energy
    std::vector<double> second;
};

inline DarkBranches dark_branches(const BandStructure& bs) {
    const int up = bs.band_index(BandLabel::dark_upper);
    const int lo = bs.band_index(BandLabel::dark_lower);
    const int k0 = bs.k_zero_index();
    if (k0 == 0 || k0 + 1 >= bs.n_k()) throw DimensionError("dark_branches: k grid too small");
    const auto& vm = bs.eigenvectors[k0 - 1];
    const auto& vp = bs.eigenvectors[k0 + 1];
    const double straight = std::norm(vm.col(up).dot(vp.col(up))) + std::norm(vm.col(lo).dot(vp.col(lo)));
    const double crossed = std::norm(vm.col(up).dot(vp.col(lo))) + std::norm(vm.col(lo).dot(vp.col(up)));
    DarkBranches br;
    for (int ik = 0; ik < bs.n_k(); ++ik) {
        const bool swap = crossed > straight && ik > k0;
        br.k.push_back(bs.k_grid[ik]);
        br.first.push_back(bs.energy(ik, swap ? lo : up).real());
        br.second.push_back(bs.energy(ik, swap ? up : lo).real());
    }
    return br;
}

struct WannierBand {
    BandLabel band = BandLabel::dark_upper;
    double a = 0.0;
    int k_points = 0;
    cplx site_energy;                 // mean band energy
    std::vector<cplx> hopping;        // J_m for m = 0..K-1, periodic; J_0 = 0
    // Samples of w_0 over the supercell, cells ordered from -floor(K/2) up,
    // same node pattern in every cell. Translating by one site is a cyclic
    // shift by nodes_per_cell entries.
    std::vector<double> z;
    std::vector<double> weight;
    Eigen::MatrixXcd amplitude;       // (node, component)
    int nodes_per_cell = 0;

    // J_m for any integer m, with J_{-m} = conj(J_m).
    cplx J(int m) const {
        const int K = k_points;
        const int r = ((m % K) + K) % K;
        return hopping[r];
    }
    // |w_0|^2 summed over components at each node.
    std::vector<double> density() const {
        std::vector<double> d(z.size());
        for (std::size_t q = 0; q < z.size(); ++q) d[q] = amplitude.row(static_cast<Eigen::Index>(q)).squaredNorm();
        return d;
    }
    double component_weight(int c) const {
        double s = 0.0;
        for (std::size_t q = 0; q < z.size(); ++q) s += weight[q] * std::norm(amplitude(static_cast<Eigen::Index>(q), c));
        return s;
    }
    double norm2() const {
        double s = 0.0;
        for (int c = 0; c < 4; ++c) s += component_weight(c);
        return s;
    }
    // <w_i | w_j> on the sampled supercell, with w_j(z) = w_0(z - j a).
    cplx overlap(int i, int j) const {
        const int K = k_points;
        const int n = static_cast<int>(z.size());
        const int si = ((i % K) + K) % K * nodes_per_cell;
        const int sj = ((j % K) + K) % K * nodes_per_cell;
        cplx s = 0.0;
        for (int q = 0; q < n; ++q) {
            const int qi = (q - si + n) % n;
            const int qj = (q - sj + n) % n;
            for (int c = 0; c < 4; ++c) s += weight[q] * std::conj(amplitude(qi, c)) * amplitude(qj, c);
        }
        return s;
    }
};

// Phase convention per k: Rydberg G = 0 amplitude real and positive, falling
// back to the forward-photon G = 0 amplitude when the former vanishes.
inline Eigen::VectorXcd fix_gauge(const Eigen::VectorXcd& v, int M) {
    const cplx r = v(4 * M + rydberg);
    if (std::abs(r) >= 1e-8) return v * (std::abs(r) / r);
    const cplx f = v(4 * M + photon_forward);
    if (std::abs(f) >= 1e-8) return v * (std::abs(f) / f);
    throw GaugeError("gauge fixing failed: Rydberg and photon reference amplitudes vanish");
}

// Wannier function of one band and its hopping amplitudes
// J_m = -(1/K) sum_k exp(i k m a) (Re eps(k) - Re eps_mean).
inline WannierBand wannier_transform(const BandStructure& bs, BandLabel label, int quad_order = 32, int quad_panels = 4) {
    const int band = bs.band_index(label);
    const PhysicalConfig& cfg = bs.cfg;
    const int K = bs.n_k();
    const int M = cfg.pw_cutoff;
    const int np = 2 * M + 1;
    const double a = cfg.a;

    WannierBand wb;
    wb.band = label;
    wb.a = a;
    wb.k_points = K;

    cplx mean = 0.0;
    for (int ik = 0; ik < K; ++ik) mean += bs.energy(ik, band);
    mean /= static_cast<double>(K);
    wb.site_energy = mean;
    wb.hopping.assign(K, 0.0);
    for (int m = 1; m < K; ++m) {
        cplx s = 0.0;
        for (int ik = 0; ik < K; ++ik)
            s += std::polar(1.0, bs.k_grid[ik] * m * a) * (bs.energy(ik, band).real() - mean.real());
        wb.hopping[m] = -s / static_cast<double>(K);
    }

    // Cell-periodic parts u_k on one cell's node pattern.
    const auto cell = composite_gauss_legendre(-0.5 * a, 0.5 * a, quad_panels, quad_order);
    const int nc = static_cast<int>(cell.nodes.size());
    wb.nodes_per_cell = nc;
    std::vector<Eigen::MatrixXcd> u(K, Eigen::MatrixXcd::Zero(nc, 4));
    for (int ik = 0; ik < K; ++ik) {
        const Eigen::VectorXcd v = fix_gauge(bs.eigenvectors[ik].col(band), M);
        for (int q = 0; q < nc; ++q)
            for (int p = 0; p < np; ++p) {
                const cplx ph = std::polar(1.0, kTwoPi * (p - M) / a * cell.nodes[q]);
                for (int c = 0; c < 4; ++c) u[ik](q, c) += v(4 * p + c) * ph;
            }
    }
    const int first_cell = -(K / 2);
    const int n = K * nc;
    wb.z.resize(n);
    wb.weight.resize(n);
    wb.amplitude = Eigen::MatrixXcd::Zero(n, 4);
    const double norm = 1.0 / (K * std::sqrt(a));
    for (int l = 0; l < K; ++l) {
        for (int q = 0; q < nc; ++q) {
            const int idx = l * nc + q;
            // Cell-periodic part is sampled at the local node; the Bloch phase
            // uses the absolute position.
            const double zz = (first_cell + l) * a + cell.nodes[q];
            wb.z[idx] = zz;
            wb.weight[idx] = cell.weights[q];
            for (int ik = 0; ik < K; ++ik)
                wb.amplitude.row(idx) += std::polar(norm, bs.k_grid[ik] * zz) * u[ik].row(q);
        }
    }
    return wb;
}

// eps(k) - eps_mean rebuilt from the hoppings: -sum_m J_m exp(-i k m a).
inline cplx reconstruct_dispersion(const WannierBand& wb, double k) {
    cplx s = 0.0;
    for (int m = 0; m < wb.k_points; ++m) s += wb.hopping[m] * std::polar(1.0, -k * m * wb.a);
    return -s;
}

} // namespace polariton
