#include <cmath>

#include <gtest/gtest.h>

#include "polariton/exact_engine.hpp"
#include "test_support.hpp"

using namespace polariton;
using namespace testing_support;

namespace {

SpinModel single_site(double pump, double gamma_site, double gamma_out) {
    SpinModel m;
    m.n_sites = 1;
    m.hopping = Eigen::MatrixXcd::Zero(1, 1);
    m.interaction = Eigen::MatrixXd::Zero(1, 1);
    m.pump = pump;
    m.gamma_site = Eigen::VectorXd::Constant(1, gamma_site);
    m.gamma_out = gamma_out;
    m.j1 = 1.0;
    return m;
}

} // namespace

TEST(ExactDynamics, VacuumStaysEmptyWithoutPump) {
    SpinModel m = random_model(3, 1);
    m.pump = 0.0;
    const ExactResult r = integrate_me(m, make_jumps(m), vacuum_density(3), uniform_grid(5.0, 11));
    for (int i = 0; i < 3; ++i)
        for (double p : r.series[pop_name(i)]) EXPECT_EQ(p, 0.0);
}

TEST(ExactDynamics, RabiOscillationOfClosedSite) {
    const SpinModel m = single_site(1.3, 0.0, 0.0);
    const auto grid = uniform_grid(4.0, 41);
    const ExactResult r = integrate_me(m, make_jumps(m), vacuum_density(1), grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
        EXPECT_NEAR(r.series["pop_1"][g], std::pow(std::sin(1.3 * grid[g]), 2), 1e-9);
}

TEST(ExactDynamics, TraceAndHermiticityPreserved) {
    const SpinModel m = random_model(3, 2);
    const ExactResult r = integrate_me(m, make_jumps(m), vacuum_density(3), uniform_grid(3.0, 7));
    EXPECT_LT(std::abs(r.final_state.trace() - 1.0), 1e-8);
    EXPECT_LT((r.final_state - r.final_state.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.final_state);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
}

TEST(ExactDynamics, OutputIntensityIsJ1TimesLastPopulation) {
    const SpinModel m = random_model(2, 3);
    const ExactResult r = integrate_me(m, make_jumps(m), vacuum_density(2), uniform_grid(2.0, 5));
    for (std::size_t g = 0; g < 5; ++g) EXPECT_DOUBLE_EQ(r.series["i_out"][g], m.j1 * r.series["pop_2"][g]);
}

TEST(ExactDynamics, BadGridsRejected) {
    const SpinModel m = random_model(2, 4);
    EXPECT_THROW(integrate_me(m, make_jumps(m), vacuum_density(2), {}), std::invalid_argument);
    EXPECT_THROW(integrate_me(m, make_jumps(m), vacuum_density(2), {0.0, 1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(integrate_me(m, make_jumps(m), vacuum_density(3), {0.0, 1.0}), DimensionError);
}

TEST(SteadyState, SingleSiteOpticalBloch) {
    for (const auto& [P, gs, go] : {std::tuple{0.5, 0.3, 0.2}, std::tuple{2.0, 0.05, 1.0}, std::tuple{0.1, 1.0, 0.0}}) {
        const SpinModel m = single_site(P, gs, go);
        const SteadyState ss = steady_state(m, make_jumps(m), {1e-10, 5000.0});
        const double gt = gs + go;
        EXPECT_NEAR(population_of(ss.rho, 0), P * P / (2 * P * P + gt * gt / 4), 1e-7);
        EXPECT_LT(ss.residual, 1e-10);
    }
}

TEST(SteadyState, PureDecayRelaxesToVacuum) {
    SpinModel m = random_model(3, 5);
    m.pump = 0.0;
    const SteadyState ss = steady_state(m, make_jumps(m));
    EXPECT_NEAR(std::abs(ss.rho(0, 0)), 1.0, 1e-12);
    EXPECT_LT(ss.residual, 1e-8);
}

TEST(SteadyState, RandomModelIsStationary) {
    const SpinModel m = random_model(3, 6);
    const JumpSet jumps = make_jumps(m);
    const SteadyState ss = steady_state(m, jumps);
    EXPECT_LT(trace_norm(liouvillian_apply(m, jumps, ss.rho)), 1e-8);
    EXPECT_NEAR(ss.rho.trace().real(), 1.0, 1e-12);
    EXPECT_THROW(steady_state(random_model(7, 1), make_jumps(random_model(7, 1))), DimensionError);
}

TEST(SteadyState, UnreachableWithinBudgetThrows) {
    const SpinModel m = random_model(3, 7);
    EXPECT_THROW(steady_state(m, make_jumps(m), {1e-14, 0.1}), NumericalError);
}

TEST(G2Exact, AntibunchedAtZeroAndUncorrelatedAtLongDelay) {
    const SpinModel m = random_model(3, 8);
    const ObservableSeries g = g2_exact(m, make_jumps(m), uniform_grid(60.0, 121));
    EXPECT_NEAR(g["g2"].front(), 0.0, 1e-14);
    EXPECT_NEAR(g["g2"].back(), 1.0, 1e-4);
    EXPECT_EQ(g.time_name, "tau");
}

TEST(G2Exact, SingleSiteResonanceFluorescence) {
    // Resonant two-level fluorescence with Rabi frequency 2P:
    // g2 = 1 - exp(-3 gamma tau / 4) (cos mu tau + 3 gamma / (4 mu) sin mu tau), mu^2 = 4 P^2 - gamma^2 / 16.
    const double P = 1.0, gam = 0.4;
    const SpinModel m = single_site(P, gam, 0.0);
    const auto grid = uniform_grid(30.0, 61);
    const ObservableSeries g = g2_exact(m, make_jumps(m), grid);
    const double mu = std::sqrt(4 * P * P - gam * gam / 16);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        const double expect = 1.0 - std::exp(-0.75 * gam * t) * (std::cos(mu * t) + 0.75 * gam / mu * std::sin(mu * t));
        EXPECT_NEAR(g["g2"][k], expect, 1e-6) << "tau = " << t;
    }
}

TEST(G2Exact, VanishingPopulationThrows) {
    SpinModel m = random_model(2, 9);
    m.pump = 0.0;
    EXPECT_THROW(g2_exact(m, make_jumps(m), uniform_grid(1.0, 3)), UndefinedCorrelationError);
}

TEST(Wfmc, AgreesWithMasterEquation) {
    const SpinModel m = random_model(3, 10);
    const JumpSet jumps = make_jumps(m);
    const auto grid = uniform_grid(4.0, 9);
    const ExactResult ex = integrate_me(m, jumps, vacuum_density(3), grid);
    const WfmcResult mc = wfmc_run(m, jumps, vacuum_state(3), grid, 2000, 77);
    EXPECT_GT(mc.jumps, 0);
    for (int i = 0; i < 3; ++i)
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double se = mc.series[pop_name(i) + "_se"][g];
            EXPECT_LE(std::abs(mc.series[pop_name(i)][g] - ex.series[pop_name(i)][g]), 4.0 * se + 1e-9)
                << pop_name(i) << " t = " << grid[g];
        }
}

TEST(Wfmc, BitReproducibleUnderFixedSeed) {
    const SpinModel m = random_model(3, 11);
    const JumpSet jumps = make_jumps(m);
    const auto grid = uniform_grid(2.0, 5);
    const WfmcResult a = wfmc_run(m, jumps, vacuum_state(3), grid, 50, 5);
    const WfmcResult b = wfmc_run(m, jumps, vacuum_state(3), grid, 50, 5);
    const WfmcResult c = wfmc_run(m, jumps, vacuum_state(3), grid, 50, 6);
    EXPECT_EQ(a.series["pop_3"], b.series["pop_3"]);
    EXPECT_EQ(a.series["i_out_se"], b.series["i_out_se"]);
    EXPECT_EQ(a.jumps, b.jumps);
    EXPECT_NE(a.series["pop_3"], c.series["pop_3"]);
}

TEST(Wfmc, LosslessLimitIsUnitary) {
    SpinModel m = random_model(3, 12);
    m.gamma_site.setZero();
    m.gamma_out = 0.0;
    const JumpSet jumps = make_jumps(m);
    const auto grid = uniform_grid(2.0, 5);
    const ExactResult ex = integrate_me(m, jumps, vacuum_density(3), grid);
    const WfmcResult mc = wfmc_run(m, jumps, vacuum_state(3), grid, 4, 1);
    EXPECT_EQ(mc.jumps, 0);
    for (int i = 0; i < 3; ++i)
        for (std::size_t g = 0; g < grid.size(); ++g) {
            EXPECT_NEAR(mc.series[pop_name(i)][g], ex.series[pop_name(i)][g], 1e-8);
            EXPECT_NEAR(mc.series[pop_name(i) + "_se"][g], 0.0, 1e-12);
        }
}

TEST(Wfmc, RejectsBadArguments) {
    const SpinModel m = random_model(2, 13);
    EXPECT_THROW(wfmc_run(m, make_jumps(m), vacuum_state(2), {0.0, 1.0}, 0, 1), std::invalid_argument);
    EXPECT_THROW(wfmc_run(m, make_jumps(m), vacuum_state(3), {0.0, 1.0}, 1, 1), DimensionError);
}
