#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "spdestab/ensemble.hpp"
#include "spdestab/evolve.hpp"
#include "spdestab/oracle.hpp"

using namespace spdestab;

namespace {

ModelSpec heat(double mu = 1.0) {
    ModelSpec m;
    m.op = ModelSpec::Operator::laplacian;
    m.mu = mu;
    return m;
}

ModelSpec scalar_sde(ReactionSpec f, NoiseLawSpec g) {
    ModelSpec m;
    m.op = ModelSpec::Operator::none;
    m.reaction = f;
    m.noise = g;
    return m;
}

}  // namespace

TEST(SpdeStep, ImplicitSingleModeDecay) {
    const auto g = build_grid(1.0, 31);
    const auto e = principal_eigenpair(g, EigenMode::discrete);
    const double dt = 1e-3;
    const auto r = spde_step(e.phi1, heat(0.7), {NoiseKind::scalar, dt, {0.0}}, dt);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(r.state.values[i], e.phi1.values[i] / (1.0 + dt * 0.7 * e.lambda1), 1e-12);
}

TEST(SpdeStep, MatchesDenseSolve) {
    const auto g = build_grid(1.0, 12);
    const auto u = Field::sample(g, [](double x) { return x * x - 0.3 * x + std::cos(5.0 * x); });
    const double dt = 0.01, h = g.spacing();
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) += 2.0 * dt / (h * h);
        if (i > 0) a(i, i - 1) = -dt / (h * h);
        if (i + 1 < n) a(i, i + 1) = -dt / (h * h);
    }
    const Eigen::VectorXd want = a.lu().solve(Eigen::Map<const Eigen::VectorXd>(u.values.data(), n));
    const auto r = spde_step(u, heat(), {NoiseKind::scalar, dt, {0.0}}, dt);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(r.state.values[static_cast<std::size_t>(i)], want(i), 1e-12);
}

TEST(SpdeStep, OperatorFreeMultiplicative) {
    const auto g = build_grid(1.0, 5);
    auto m = scalar_sde(ReactionSpec::none(), NoiseLawSpec::multiplicative(1.0));
    const auto u = Field::sample(g, [](double x) { return 1.0 + x; });
    const auto r = spde_step(u, m, {NoiseKind::scalar, 0.01, {0.05}}, 0.01);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(r.state.values[i], u.values[i] * 1.05);
}

TEST(SpdeStep, RejectsWrongIncrement) {
    const auto g = build_grid(1.0, 5);
    EXPECT_THROW(spde_step(Field(g), heat(), {NoiseKind::white, 0.01, std::vector<double>(5)}, 0.01), InvalidArgument);
    EXPECT_THROW(spde_step(Field(g), heat(), {NoiseKind::scalar, 0.01, {0.0, 0.0}}, 0.01), InvalidArgument);
    EXPECT_THROW(spde_step(Field(g), heat(), {NoiseKind::scalar, 0.01, {0.0}}, 0.0), InvalidArgument);
}

TEST(SdeStep, SchemeDefinition) {
    EXPECT_DOUBLE_EQ(sde_step(1.0, scalar_sde(ReactionSpec::none(), NoiseLawSpec::multiplicative(1.0)), 0.1, 0.3), 1.1);
    const double a = 0.5, s = 1.2, dt = 0.01, dw = -0.07;
    EXPECT_DOUBLE_EQ(sde_step(1.0, scalar_sde(ReactionSpec::linear(a), NoiseLawSpec::multiplicative(s)), dw, dt),
                     1.0 + a * dt + s * dw);
    const auto cubic = scalar_sde(ReactionSpec::sde_drift(0.0, 0.0, 2.0, 2.0, 3.0), NoiseLawSpec::none());
    EXPECT_DOUBLE_EQ(sde_step(0.5, cubic, 0.3, dt), 0.5 + dt * 2.0 * 0.125);
}

TEST(SimulatePath, HeatIsContraction) {
    const auto g = build_grid(1.0, 40);
    const auto u0 = Field::sample(g, [](double x) { return std::sin(7.0 * x) + x; });
    const auto tr = simulate_path(heat(), u0, 0.05, 1e-3, {1, 0});
    for (std::size_t k = 1; k < tr.states.size(); ++k)
        EXPECT_LE(l2_norm_sq(g, tr.states[k]), l2_norm_sq(g, tr.states[k - 1]) + 1e-15);
}

TEST(SimulatePath, HeatPreservesSignWithoutClipping) {
    const auto g = build_grid(1.0, 40);
    const auto u0 = Field::sample(g, [](double x) { return x < 0.3 ? 1.0 : 0.0; });
    const auto tr = simulate_path(heat(), u0, 0.1, 1e-3, {1, 0});
    for (const auto& s : tr.states)
        for (double v : s) EXPECT_GE(v, 0.0);
    EXPECT_EQ(tr.clipped_steps, 0u);
}

TEST(SimulatePath, LogisticOdeFixedPoint) {
    auto m = scalar_sde(ReactionSpec::logistic(1.0, 1.0, 3.0), NoiseLawSpec::none());
    const auto tr = simulate_sde_path(m, 0.1, 20.0, 1e-3, {1, 0});
    EXPECT_NEAR(tr.states.back()[0], 1.0, 1e-3);
}

TEST(SimulatePath, Deterministic) {
    const auto g = build_grid(1.0, 16);
    auto m = heat();
    m.reaction = ReactionSpec::linear(-1.0);
    m.noise = NoiseLawSpec::multiplicative(0.8);
    const auto u0 = principal_eigenpair(g, EigenMode::discrete).phi1;
    const auto a = simulate_path(m, u0, 0.2, 1e-3, {9, 4});
    const auto b = simulate_path(m, u0, 0.2, 1e-3, {9, 4});
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.wiener, b.wiener);
    const auto c = simulate_path(m, u0, 0.2, 1e-3, {9, 5});
    EXPECT_NE(a.states.back(), c.states.back());
}

TEST(SimulatePath, SaveStrideKeepsEndpoints) {
    const auto g = build_grid(1.0, 8);
    SimulationOptions o;
    o.save_stride = 30;
    const auto tr = simulate_path(heat(), Field(g, std::vector<double>(8, 1.0)), 0.1, 1e-3, {1, 0}, o);
    ASSERT_EQ(tr.times.size(), 5u);  // 0, 30, 60, 90, 100
    EXPECT_DOUBLE_EQ(tr.times.back(), 0.1);
}

TEST(SimulatePath, RejectsNonIntegerStepCount) {
    const auto g = build_grid(1.0, 8);
    EXPECT_THROW(simulate_path(heat(), Field(g), 0.1, 0.03, {1, 0}), InvalidArgument);
}

TEST(SimulatePath, PLaplacianSplitsSteps) {
    const auto g = build_grid(1.0, 32);
    ModelSpec m;
    m.op = ModelSpec::Operator::p_laplacian;
    m.p = 4.0;
    const auto u0 = Field::sample(g, [](double x) { return 2.0 * std::sin(3.14159 * x); });
    const auto tr = simulate_path(m, u0, 0.01, 1e-3, {1, 0});
    EXPECT_GT(tr.substeps, 0u);
    EXPECT_FALSE(tr.overflow);
    EXPECT_LT(l2_norm_sq(g, tr.states.back()), l2_norm_sq(g, u0.values));
}

TEST(SimulatePath, OverflowIsRecorded) {
    auto m = scalar_sde(ReactionSpec::sde_drift(0.0, 0.0, 2.0, 1.0, 3.0), NoiseLawSpec::none());
    SimulationOptions o;
    o.blowup_threshold = 1e6;
    const auto tr = simulate_sde_path(m, 1.0, 1.0, 1e-4, {1, 0}, o);
    EXPECT_TRUE(tr.overflow);
    // deterministic escape time 1/(2 k1 x0^2) = 0.5
    EXPECT_NEAR(tr.overflow_time, 0.5, 0.025);
}

TEST(SimulateCoupled, ConstantDataMatchesSde) {
    const auto g = build_grid(1.0, 6);
    auto spde = scalar_sde(ReactionSpec::linear(-1.0), NoiseLawSpec::multiplicative(1.0));
    std::vector<ModelSpec> sdes{spde};
    const auto res = simulate_coupled(spde, sdes, Field(g, std::vector<double>(6, 0.3)), {0.3}, 0.2, 1e-3, {2, 0});
    ASSERT_EQ(res.spde.states.size(), res.sdes[0].states.size());
    for (std::size_t k = 0; k < res.spde.states.size(); ++k)
        for (double v : res.spde.states[k]) EXPECT_NEAR(v, res.sdes[0].states[k][0], 1e-10);
}

TEST(SimulateCoupled, SameDriverForAllParticipants) {
    const auto g = build_grid(1.0, 10);
    auto spde = heat();
    spde.reaction = ReactionSpec::linear(-1.0);
    spde.noise = NoiseLawSpec::multiplicative(1.0);
    auto sde = scalar_sde(ReactionSpec::linear(-1.0), NoiseLawSpec::multiplicative(1.0));
    const auto res = simulate_coupled(spde, {sde, sde}, Field(g, std::vector<double>(10, 0.05)), {0.2, -0.2}, 0.1,
                                      1e-3, {3, 0});
    ASSERT_EQ(res.driver_checksums.size(), 3u);
    EXPECT_EQ(res.driver_checksums[0], res.driver_checksums[1]);
    EXPECT_EQ(res.driver_checksums[1], res.driver_checksums[2]);
    EXPECT_EQ(res.spde.wiener, res.sdes[0].wiener);
}

TEST(SimulateCoupled, DeterministicSandwich) {
    const auto g = build_grid(1.0, 32);
    auto spde = heat();
    spde.reaction = ReactionSpec::linear(-1.0);
    auto sde = scalar_sde(ReactionSpec::linear(-1.0), NoiseLawSpec::none());
    const double delta = 0.1;
    const auto u0 = Field::sample(g, [&](double x) { return delta * std::sin(9.0 * x); });
    const auto res = simulate_coupled(spde, {sde, sde}, u0, {-2.0 * delta, 2.0 * delta}, 0.2, 1e-3, {1, 0});
    for (std::size_t k = 0; k < res.spde.states.size(); ++k) {
        for (double v : res.spde.states[k]) {
            EXPECT_LE(v, res.sdes[1].states[k][0]);
            EXPECT_GE(v, res.sdes[0].states[k][0]);
        }
    }
}

TEST(SimulateCoupled, RejectsFieldNoise) {
    const auto g = build_grid(1.0, 6);
    auto spde = heat();
    spde.noise = NoiseLawSpec::white_multiplicative(1.0);
    EXPECT_THROW(simulate_coupled(spde, {}, Field(g), {}, 0.1, 1e-2, {1, 0}), InvalidArgument);
}

TEST(ProjectPhi1, ConstantZeroAndMode) {
    const auto g = build_grid(1.0, 255);
    const auto e = principal_eigenpair(g, EigenMode::discrete);
    Trajectory tr;
    tr.times = {0.0, 1.0, 2.0};
    std::vector<double> two_phi(e.phi1.values);
    for (double& v : two_phi) v *= 2.0;
    tr.states = {std::vector<double>(g.size(), 1.0), std::vector<double>(g.size(), 0.0), two_phi};
    const auto v = project_phi1(tr, e);
    EXPECT_NEAR(v[0], 1.0, 1e-12);
    EXPECT_EQ(v[1], 0.0);
    // continuum: 2 int_0^1 (pi/2)^2 sin^2(pi x) dx = pi^2 / 4
    EXPECT_NEAR(v[2], std::numbers::pi * std::numbers::pi / 4.0, 1e-4);
}

TEST(StrongConvergence, GbmHalvingFactor) {
    const double a = 0.5, s = 1.0, T = 1.0, dt = 2e-3;
    const auto m = scalar_sde(ReactionSpec::linear(a), NoiseLawSpec::multiplicative(s));
    const std::size_t paths = 2000, fine_steps = 2 * step_count(T, dt);
    // Coarse and fine schemes share one Brownian path; both are compared with the exact solution on it.
    const auto errs = parallel_map(paths, 1, [&](std::size_t i) {
        const auto dw = scalar_increments({77, i}, dt / 2.0, fine_steps);
        double fine = 1.0, coarse = 1.0, w = 0.0;
        for (std::size_t k = 0; k < fine_steps; k += 2) {
            fine = sde_step(fine, m, dw[k], dt / 2.0);
            fine = sde_step(fine, m, dw[k + 1], dt / 2.0);
            coarse = sde_step(coarse, m, dw[k] + dw[k + 1], dt);
            w += dw[k] + dw[k + 1];
        }
        const double exact = gbm_exact(1.0, a, s, T, w);
        return std::pair{(coarse - exact) * (coarse - exact), (fine - exact) * (fine - exact)};
    });
    double ec = 0.0, ef = 0.0;
    for (const auto& [c, f] : errs) {
        ec += c;
        ef += f;
    }
    EXPECT_GE(std::sqrt(ec / ef), 1.3);
}

TEST(ParallelMap, OrderIndependentOfJobs) {
    auto f = [](std::size_t i) { return static_cast<double>(i * i); };
    EXPECT_EQ(parallel_map(100, 1, f), parallel_map(100, 4, f));
}

TEST(ParallelMap, PropagatesExceptions) {
    EXPECT_THROW(parallel_map(50, 3,
                              [](std::size_t i) -> int {
                                  if (i == 17) throw InvalidArgument("boom");
                                  return 0;
                              }),
                 InvalidArgument);
}
