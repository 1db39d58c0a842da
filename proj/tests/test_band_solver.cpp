#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "polariton/band_solver.hpp"

using namespace polariton;

namespace {

PhysicalConfig fig2() {
    PhysicalConfig c;
    c.omega_ctrl = mhz_to_angular(18.0);
    c.delta_e = mhz_to_angular(20.0);
    c.gamma_e = mhz_to_angular(6.0);
    c.a = 0.532;
    c.n_sites = 12;
    c.c6 = 1.0;
    return c;
}

PhysicalConfig dense() {
    PhysicalConfig c = fig2();
    c.n0 = 1e22;
    return c;
}

const BandStructure& dense_bands() {
    static const BandStructure bs = solve_bands(dense());
    return bs;
}

const WannierBand& dense_wannier() {
    static const WannierBand wb = wannier_transform(dense_bands(), BandLabel::dark_upper);
    return wb;
}

// Independent real-space evaluation of the cell-average of g~ sqrt(n(z)):
// explicit sum of neighbouring Gaussians, trapezoid rule.
double g0_trapezoid(const PhysicalConfig& c, int points) {
    const double n0 = c.n0 * 1e-12;
    const double peak = n0 * c.a / (std::sqrt(2.0 * kPi) * c.sigma_density);
    double s = 0.0;
    for (int q = 0; q <= points; ++q) {
        const double z = -0.5 * c.a + c.a * q / points;
        double n = 0.0;
        for (int l = -6; l <= 6; ++l) {
            const double d = (z - l * c.a) / c.sigma_density;
            n += peak * std::exp(-0.5 * d * d);
        }
        s += (q == 0 || q == points ? 0.5 : 1.0) * std::sqrt(n);
    }
    return coupling_prefactor(c) * s / points;
}

} // namespace

TEST(CouplingFourier, UniformDensityHasOnlyTheZeroMode) {
    PhysicalConfig c = fig2();
    c.sigma_density = 50.0;
    c.pw_cutoff = 4;
    const auto g = coupling_fourier(c);
    const int M = c.pw_cutoff;
    EXPECT_NEAR(g[2 * M].real(), coupling_prefactor(c) * std::sqrt(c.n0 * 1e-12), 1e-10 * std::abs(g[2 * M]));
    for (int n = -2 * M; n <= 2 * M; ++n)
        if (n != 0) EXPECT_LT(std::abs(g[n + 2 * M]), 1e-12 * std::abs(g[2 * M])) << n;
}

TEST(CouplingFourier, ZeroModeMatchesRealSpaceQuadrature) {
    const PhysicalConfig c = fig2();
    const auto g = coupling_fourier(c);
    const double oracle = g0_trapezoid(c, 10000);
    EXPECT_NEAR(g[2 * c.pw_cutoff].real(), oracle, 1e-6 * oracle);
    EXPECT_LT(std::abs(g[2 * c.pw_cutoff].imag()), 1e-9 * oracle);
}

TEST(CouplingFourier, ConjugateSymmetricAndSqrtHomogeneous) {
    PhysicalConfig c = fig2();
    const auto g = coupling_fourier(c);
    c.n0 *= 2.0;
    const auto g2 = coupling_fourier(c);
    const int M = c.pw_cutoff;
    for (int n = 0; n <= 2 * M; ++n) {
        EXPECT_NEAR(std::abs(g[2 * M + n] - std::conj(g[2 * M - n])), 0.0, 1e-12 * std::abs(g[2 * M]));
        EXPECT_NEAR(std::abs(g2[2 * M + n] - std::sqrt(2.0) * g[2 * M + n]), 0.0, 1e-12 * std::abs(g2[2 * M]));
    }
}

TEST(CouplingFourier, RejectsNonPositiveWidth) {
    PhysicalConfig c = fig2();
    c.sigma_density = 0.0;
    EXPECT_THROW(coupling_fourier(c), ConfigError);
}

TEST(BlochHamiltonian, DimensionAndHermiticityWithoutLoss) {
    PhysicalConfig c = fig2();
    c.pw_cutoff = 3;
    c.gamma_e = 0.0;
    const auto H = bloch_hamiltonian(c, 0.3 * kPi / c.a);
    EXPECT_EQ(H.rows(), 4 * 7);
    EXPECT_LT((H - H.adjoint()).norm(), 1e-12 * H.norm());
    c.gamma_e = mhz_to_angular(6.0);
    const auto Hl = bloch_hamiltonian(c, 0.3 * kPi / c.a);
    EXPECT_GT((Hl - Hl.adjoint()).norm(), 1.0);
}

TEST(BlochHamiltonian, UncoupledMatterBlockOracle) {
    PhysicalConfig c = fig2();
    c.pw_cutoff = 2;
    c.n0 = 0.0;
    c.gamma_e = 0.0;
    const double k = 0.2 * kPi / c.a;
    const auto H = bloch_hamiltonian(c, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const double D = c.delta_e, W = c.omega_ctrl;
    std::vector<double> expected;
    for (int n = -2; n <= 2; ++n) {
        const double q = k + kTwoPi * n / c.a;
        expected.push_back(kSpeedOfLight * q);
        expected.push_back(-kSpeedOfLight * q);
        expected.push_back(0.5 * (D + std::sqrt(D * D + 4 * W * W)));
        expected.push_back(0.5 * (D - std::sqrt(D * D + 4 * W * W)));
    }
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < H.rows(); ++i)
        EXPECT_NEAR(es.eigenvalues()(i), expected[i], 1e-9 * std::max(1.0, std::abs(expected[i])));
}

TEST(BlochHamiltonian, RejectsMomentumOutsideZone) {
    PhysicalConfig c = fig2();
    c.pw_cutoff = 1;
    EXPECT_THROW(bloch_hamiltonian(c, 1.01 * kPi / c.a), DomainError);
    EXPECT_NO_THROW(bloch_hamiltonian(c, kPi / c.a));
}

TEST(BrillouinGrid, OrderingAndZero) {
    const auto ks = brillouin_grid(8, 0.5);
    ASSERT_EQ(ks.size(), 8u);
    EXPECT_DOUBLE_EQ(ks.front(), -kTwoPi * 4 / (8 * 0.5));
    EXPECT_DOUBLE_EQ(ks[4], 0.0);
    EXPECT_EQ(brillouin_grid(5, 1.0).size(), 5u);
    EXPECT_DOUBLE_EQ(brillouin_grid(5, 1.0)[2], 0.0);
}

TEST(Hungarian, MatchesBruteForceOnRandomCosts) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd cost(5, 5);
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) cost(r, c) = u(rng);
        const auto col = detail::hungarian(cost);
        std::vector<int> perm = {0, 1, 2, 3, 4};
        double best = 1e300;
        do {
            double s = 0.0;
            for (int r = 0; r < 5; ++r) s += cost(r, perm[r]);
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        double got = 0.0;
        std::vector<int> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        for (int r = 0; r < 5; ++r) {
            EXPECT_EQ(sorted[r], r);
            got += cost(r, col[r]);
        }
        EXPECT_NEAR(got, best, 1e-12);
    }
}

TEST(SolveBands, LosslessEigenvaluesAreReal) {
    PhysicalConfig c = dense();
    c.gamma_e = 0.0;
    c.pw_cutoff = 4;
    c.k_points = 16;
    const BandStructure bs = solve_bands(c);
    for (int ik = 0; ik < bs.n_k(); ++ik)
        for (int b = 0; b < bs.n_bands(); ++b)
            EXPECT_LE(std::abs(bs.energy(ik, b).imag()), 1e-10 * std::max(1.0, std::abs(bs.energy(ik, b))));
}

TEST(SolveBands, EigenpairCountAndGrid) {
    const BandStructure& bs = dense_bands();
    EXPECT_EQ(bs.n_k(), 64);
    EXPECT_EQ(bs.n_bands(), 4 * (2 * 15 + 1));
    for (int ik = 0; ik < bs.n_k(); ++ik) EXPECT_EQ(bs.eigenvalues[ik].size(), bs.n_bands());
}

TEST(SolveBands, DenseMediumHasOneDarkPairCrossingAtZero) {
    const BandStructure& bs = dense_bands();
    const int up = bs.band_index(BandLabel::dark_upper);
    const int lo = bs.band_index(BandLabel::dark_lower);
    const int k0 = bs.k_zero_index();
    const double scale = std::abs(bs.energy(k0 + 1, up).real());
    EXPECT_LT(std::abs(bs.energy(k0, up) - bs.energy(k0, lo)), 1e-6 * scale);
    EXPECT_LT(std::abs(bs.energy(k0, up).real()), 1e-6 * scale);
    // At k = 0 the pair is exactly dark; away from it the e-weight grows but
    // stays below the labelling threshold.
    EXPECT_LT(bs.e_weight(k0, up), 1e-12);
    EXPECT_LT(bs.e_weight(k0, lo), 1e-12);
    for (int ik = 0; ik < bs.n_k(); ++ik) {
        EXPECT_LT(bs.e_weight(ik, up), bs.cfg.dark_weight_tol);
        EXPECT_LT(bs.e_weight(ik, lo), bs.cfg.dark_weight_tol);
    }
}

TEST(SolveBands, DarkPairIsSymmetricUnderKReflection) {
    const BandStructure& bs = dense_bands();
    const int up = bs.band_index(BandLabel::dark_upper);
    const int lo = bs.band_index(BandLabel::dark_lower);
    const int k0 = bs.k_zero_index();
    for (int d = 1; k0 - d >= 0 && k0 + d < bs.n_k(); ++d) {
        const double scale = std::abs(bs.energy(k0 + d, up).real());
        EXPECT_NEAR(bs.energy(k0 + d, up).real(), bs.energy(k0 - d, up).real(), 1e-6 * scale);
        EXPECT_NEAR(bs.energy(k0 + d, lo).real(), bs.energy(k0 - d, lo).real(), 1e-6 * scale);
    }
}

TEST(SolveBands, DarkBranchesAreLinearNearZero) {
    const BandStructure& bs = dense_bands();
    const DarkBranches br = dark_branches(bs);
    std::vector<double> x, y1, y2;
    for (std::size_t i = 0; i < br.k.size(); ++i)
        if (std::abs(br.k[i]) < 0.3 * kPi / bs.cfg.a) {
            x.push_back(br.k[i]);
            y1.push_back(br.first[i]);
            y2.push_back(br.second[i]);
        }
    auto r2 = [&](const std::vector<double>& y) {
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        return sxy * sxy / (sxx * syy);
    };
    EXPECT_GT(r2(y1), 0.99);
    EXPECT_GT(r2(y2), 0.99);
}

TEST(SolveBands, TrackingKeepsLabelsContinuous) {
    const BandStructure& bs = dense_bands();
    const int up = bs.band_index(BandLabel::dark_upper);
    for (int ik = 1; ik < bs.n_k(); ++ik) {
        if (ik == bs.k_zero_index() || ik == bs.k_zero_index() + 1) continue;
        const double ov = std::abs(bs.eigenvectors[ik - 1].col(up).dot(bs.eigenvectors[ik].col(up)));
        EXPECT_GT(ov, 0.5) << "k index " << ik;
    }
}

TEST(SolveBands, NoControlFieldMeansNoDarkPair) {
    PhysicalConfig c = dense();
    c.omega_ctrl = 0.0;
    c.pw_cutoff = 3;
    c.k_points = 12;
    const BandStructure bs = solve_bands(c);
    EXPECT_THROW(bs.band_index(BandLabel::dark_upper), LabelError);
    EXPECT_THROW(band_gap(bs), LabelError);
}

TEST(SolveBands, PlaneWaveCutoffConvergence) {
    PhysicalConfig c = dense();
    c.k_points = 16;
    const BandStructure a = solve_bands(c);
    c.pw_cutoff += 5;
    const BandStructure b = solve_bands(c);
    for (BandLabel l : {BandLabel::dark_upper, BandLabel::dark_lower}) {
        const int ia = a.band_index(l), ib = b.band_index(l);
        double scale = 0.0;
        for (int ik = 0; ik < a.n_k(); ++ik) scale = std::max(scale, std::abs(a.energy(ik, ia)));
        for (int ik = 0; ik < a.n_k(); ++ik)
            EXPECT_LT(std::abs(a.energy(ik, ia) - b.energy(ik, ib)), 1e-4 * scale) << to_string(l) << " k " << ik;
    }
}

TEST(BandGap, LargeComparedWithHopping) {
    const double gap = band_gap(dense_bands());
    EXPECT_GT(gap, 0.0);
    EXPECT_GT(gap, 10.0 * std::abs(dense_wannier().J(1)));
}

TEST(Wannier, NormalizedAndOrthogonal) {
    const WannierBand& wb = dense_wannier();
    EXPECT_NEAR(wb.norm2(), 1.0, 1e-6);
    EXPECT_NEAR(std::abs(wb.overlap(0, 0)), 1.0, 1e-6);
    for (int j : {1, 2, 5})
        EXPECT_LT(std::abs(wb.overlap(0, j)), 1e-6) << j;
}

TEST(Wannier, HoppingHermitianAndReconstructsDispersion) {
    const WannierBand& wb = dense_wannier();
    const BandStructure& bs = dense_bands();
    const int up = bs.band_index(BandLabel::dark_upper);
    double scale = 0.0;
    for (int ik = 0; ik < bs.n_k(); ++ik) scale = std::max(scale, std::abs(bs.energy(ik, up).real()));
    for (int m = 1; m < 10; ++m) EXPECT_LT(std::abs(wb.J(-m) - std::conj(wb.J(m))), 1e-12 * scale);
    for (int ik = 0; ik < bs.n_k(); ++ik) {
        const cplx rebuilt = reconstruct_dispersion(wb, bs.k_grid[ik]);
        EXPECT_NEAR(rebuilt.real(), bs.energy(ik, up).real() - wb.site_energy.real(), 1e-10 * scale);
        EXPECT_NEAR(rebuilt.imag(), 0.0, 1e-10 * scale);
    }
}

TEST(Wannier, HoppingDecaysAsInverseSquare) {
    const WannierBand& wb = dense_wannier();
    std::vector<double> x, y;
    for (int m = 3; m <= 10; ++m) {
        x.push_back(std::log(m));
        y.push_back(std::log(std::abs(wb.J(m))));
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -2.0, 0.3);
}

TEST(Wannier, FlatBandHasNoHopping) {
    BandStructure bs = dense_bands();
    const int up = bs.band_index(BandLabel::dark_upper);
    for (auto& v : bs.eigenvalues) v(up) = cplx(3.0, -0.1);
    const WannierBand wb = wannier_transform(bs, BandLabel::dark_upper, 8, 2);
    for (int m = 1; m < bs.n_k(); ++m) EXPECT_LT(std::abs(wb.J(m)), 1e-12);
    EXPECT_NEAR(wb.site_energy.real(), 3.0, 1e-12);
}

TEST(Wannier, GaugeFallsBackToPhotonThenFails) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(12);
    const int M = 1;
    v(4 * M + photon_forward) = cplx(0.0, 2.0);
    const auto g = fix_gauge(v, M);
    EXPECT_NEAR(g(4 * M + photon_forward).real(), 2.0, 1e-15);
    v(4 * M + rydberg) = cplx(-1.0, 0.0);
    EXPECT_NEAR(fix_gauge(v, M)(4 * M + rydberg).real(), 1.0, 1e-15);
    EXPECT_THROW(fix_gauge(Eigen::VectorXcd::Zero(12), M), GaugeError);
}
