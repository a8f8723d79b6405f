#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "spdestab/ensemble.hpp"
#include "spdestab/evolve.hpp"
#include "spdestab/oracle.hpp"
#include "spdestab/stats.hpp"

using namespace spdestab;

TEST(GbmMoment, AgainstLognormalQuadrature) {
    // X_1 = exp(-1/2 + W_1); E X^2 = int e^{2(-1/2 + w)} N(w) dw
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double w) { return std::exp(2.0 * (-0.5 + w)) * std::exp(-w * w / 2.0) / std::sqrt(2.0 * std::numbers::pi); },
        -40.0, 40.0, 15, 1e-14);
    EXPECT_NEAR(gbm_moment(1.0, 0.0, 1.0, 2.0, 1.0), std::numbers::e, 1e-12);
    EXPECT_NEAR(q, std::numbers::e, 1e-10);
}

TEST(GbmMoment, Limits) {
    EXPECT_EQ(gbm_moment(2.0, 0.3, 1.0, 0.0, 5.0), 1.0);
    EXPECT_NEAR(gbm_moment(2.0, 0.3, 0.0, 3.0, 1.5), 8.0 * std::exp(3.0 * 0.3 * 1.5), 1e-12);
    EXPECT_THROW(gbm_moment(1.0, 0.0, 1.0, 2.0, -1.0), InvalidArgument);
}

TEST(GbmMoment, LognormalTowerIdentity) {
    for (double a : {-1.0, 0.0, 0.7})
        for (double s : {0.2, 1.0, 1.5})
            for (double t : {0.1, 1.0, 3.0}) {
                const double m1 = gbm_moment(1.3, a, s, 1.0, t);
                EXPECT_NEAR(gbm_moment(1.3, a, s, 2.0, t), m1 * m1 * std::exp(s * s * t),
                            1e-12 * gbm_moment(1.3, a, s, 2.0, t));
            }
}

TEST(ModalCoefficients, Parseval) {
    const auto g = build_grid(1.0, 20);
    const auto u = Field::sample(g, [](double x) { return std::exp(x) * std::sin(4.0 * x); });
    const auto c = sine_modal_coefficients(g, u.values);
    double s = 0.0;
    for (double v : c) s += v * v;
    EXPECT_NEAR(s, l2_norm_sq(g, u.values), 1e-12);
}

TEST(AdditiveHeat, NoiseFreeSingleMode) {
    const auto g = build_grid(1.0, 31);
    const auto e = principal_eigenpair(g, EigenMode::discrete);
    const double n0 = l2_norm_sq(g, e.phi1.values);
    for (double t : {0.0, 0.1, 0.5})
        EXPECT_NEAR(additive_heat_ms(e.phi1, 1.0, 0.0, g, t), n0 * std::exp(-2.0 * e.lambda1 * t), 1e-12 * n0);
}

TEST(AdditiveHeat, NoiseFreeMatchesSemigroup) {
    // exp(t Lap_h) applied through the dense eigendecomposition
    const auto g = build_grid(2.0, 24);
    const auto u0 = Field::sample(g, [](double x) { return x * (2.0 - x) + 0.3 * std::sin(5.0 * x); });
    const auto n = static_cast<Eigen::Index>(g.size());
    const double h = g.spacing();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lap(i, i) = -2.0 / (h * h);
        if (i > 0) lap(i, i - 1) = 1.0 / (h * h);
        if (i + 1 < n) lap(i, i + 1) = 1.0 / (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    const double t = 0.05, mu = 0.8;
    const Eigen::VectorXd d = (mu * t * es.eigenvalues()).array().exp();
    const Eigen::VectorXd ut =
        es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(u0.values.data(), n);
    const double want = h * ut.squaredNorm();
    EXPECT_NEAR(additive_heat_ms(u0, mu, 0.0, g, t), want, 1e-12 * want);
}

TEST(AdditiveHeat, StationaryLimit) {
    const auto g = build_grid(1.0, 31);
    const Field zero(g);
    const double s = additive_heat_stationary(1.0, 0.3, g);
    EXPECT_GT(s, 0.0);
    EXPECT_NEAR(additive_heat_ms(zero, 1.0, 0.3, g, 50.0), s, 1e-12 * s);
    // Continuum: sigma^2 sum_{k odd} 8/(k pi)^2 / (2 (k pi)^2) = (4 sigma^2/pi^4)(pi^4/96) = sigma^2/24 on (0,1).
    EXPECT_NEAR(s, 0.09 / 24.0, 0.02 * 0.09 / 24.0);
    EXPECT_LE(s, 0.09 * 1.0 / (2.0 * principal_eigenpair(g, EigenMode::discrete).lambda1));
}

TEST(AdditiveHeat, ExactCurveBelowBoundWhenHypothesisHolds) {
    for (double sigma : {0.1, 0.5, 1.0, 2.0}) {
        for (long n : {15L, 63L}) {
            const auto g = build_grid(1.0, n);
            const auto e = principal_eigenpair(g, EigenMode::discrete);
            auto u0 = e.phi1;
            const double scale = 1.0 / std::sqrt(l2_norm_sq(g, u0.values));
            for (double& v : u0.values) v *= scale;
            if (!(sigma * sigma < 2.0 * e.lambda1)) continue;
            for (double t = 0.0; t <= 2.0; t += 0.05) {
                const double exact = additive_heat_ms(u0, 1.0, sigma, g, t);
                EXPECT_LE(exact, additive_heat_bound(1.0, sigma, 1.0, e.lambda1, 1.0, t) + 1e-12);
                EXPECT_LE(exact, 1.0 + 1e-12);
            }
        }
    }
}

TEST(AdditiveHeat, MatchesSimulationStationaryGrowth) {
    const auto g = build_grid(1.0, 15);
    ModelSpec m;
    m.noise = NoiseLawSpec::additive(0.5);
    const std::size_t paths = 400;
    const double T = 0.2, dt = 1e-3;
    const auto ens = parallel_map(paths, 1, [&](std::size_t i) { return simulate_path(m, Field(g), T, dt, {5, i}); });
    const auto st = ms_norm(ens, g);
    const double want = additive_heat_ms(Field(g), 1.0, 0.5, g, T);
    EXPECT_NEAR(st.mean.back(), want, std::max(3.0 * st.std_error.back(), 0.05 * want));
}

TEST(AdditiveHeatScheme, MatchesDenseResolventPowers) {
    // E||u_n||^2 = h |R^n u0|^2 + sigma^2 dt h sum_{j=1..n} |R^j 1|^2 with R = (I - dt mu Lap_h)^{-1}
    const auto g = build_grid(1.5, 12);
    const auto u0 = Field::sample(g, [](double x) { return std::cos(2.0 * x) + x; });
    const auto n = static_cast<Eigen::Index>(g.size());
    const double h = g.spacing(), mu = 0.7, dt = 2e-3, sigma = 0.4;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) += 2.0 * dt * mu / (h * h);
        if (i > 0) a(i, i - 1) = -dt * mu / (h * h);
        if (i + 1 < n) a(i, i + 1) = -dt * mu / (h * h);
    }
    const Eigen::MatrixXd r = a.inverse();
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.values.data(), n);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    double noise = 0.0;
    for (std::size_t steps = 1; steps <= 60; ++steps) {
        u = r * u;
        one = r * one;
        noise += sigma * sigma * dt * h * one.squaredNorm();
        const double want = h * u.squaredNorm() + noise;
        EXPECT_NEAR(additive_heat_ms_scheme(u0, mu, sigma, g, dt, steps), want, 1e-12 * want) << steps;
    }
    EXPECT_NEAR(additive_heat_ms_scheme(u0, mu, sigma, g, dt, 0), l2_norm_sq(g, u0.values), 1e-12);
}

TEST(AdditiveHeatScheme, ConvergesToContinuum) {
    const auto g = build_grid(1.0, 31);
    const auto u0 = principal_eigenpair(g, EigenMode::discrete).phi1;
    const double want = additive_heat_ms(u0, 1.0, 0.3, g, 0.5);
    double prev = std::numeric_limits<double>::infinity();
    for (double dt : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const auto steps = static_cast<std::size_t>(std::llround(0.5 / dt));
        const double err = std::abs(additive_heat_ms_scheme(u0, 1.0, 0.3, g, dt, steps) - want);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-4 * want);
}

TEST(AdditiveHeatScheme, EnergyEstimateBoundsTheScheme) {
    for (double sigma : {0.0, 0.3, 2.0}) {
        for (double dt : {1e-3, 1e-2}) {
            const auto g = build_grid(1.0, 31);
            const auto e = principal_eigenpair(g, EigenMode::discrete);
            auto u0 = e.phi1;
            const double scale = 1.0 / std::sqrt(l2_norm_sq(g, u0.values));
            for (double& v : u0.values) v *= scale;
            for (std::size_t n = 0; n <= 400; n += 20) {
                const double m = additive_heat_ms_scheme(u0, 1.0, sigma, g, dt, n);
                EXPECT_LE(m, additive_heat_bound_scheme(1.0, sigma, 1.0, e.lambda1, 1.0, dt, n) * (1.0 + 1e-12));
            }
        }
    }
}

TEST(SingleMode, Values) {
    const double n = 1.2337;
    EXPECT_NEAR(single_mode_multiplicative_ms(2.0, 0.5, 3.0, 0.0, 0.4, n), 4.0 * n * std::exp(2.0 * (0.5 - 3.0) * 0.4),
                1e-12);
    EXPECT_NEAR(single_mode_multiplicative_ms(1.5, 9.0, 9.0, 1.0, 1.0, n), 2.25 * n * std::numbers::e, 1e-12);
    EXPECT_DOUBLE_EQ(single_mode_multiplicative_ms(1.5, 2.0, 9.0, 1.0, 0.0, n), 2.25 * n);
}

TEST(T32Envelope, Values) {
    EXPECT_EQ(t32_envelope(3.0, 1.0, 1.0, 0.0), 3.0);
    for (double t : {0.5, 2.0, 10.0}) EXPECT_NEAR(t32_envelope(2.0, -0.5, 1.0, t), 2.0, 1e-15);
    EXPECT_NEAR(t32_envelope(1.0, 1.0, 1.0, 1.0), std::exp(-1.5), 1e-15);
    EXPECT_NEAR(t32_envelope(1.0, 1.0, 1.0, 1.0), 0.2231, 1e-4);
}

TEST(T32MeanFactor, Readings) {
    EXPECT_NEAR(t32_mean_factor_printed(2.0, 0.5, 1.0), 2.0 * std::exp(-0.5), 1e-15);
    EXPECT_NEAR(t32_mean_factor_proof(2.0, 0.5, 3.0, 1.0), 2.0 * std::exp(-2.5), 1e-15);
}

TEST(Oracles, MonotoneWhenIndexNegative) {
    const auto c = make_curve({0.0, 0.1, 0.2, 0.5, 1.0},
                              [](double t) { return single_mode_multiplicative_ms(1.0, 1.0, 9.87, 1.0, t, 0.5); }, "mode");
    for (std::size_t k = 1; k < c.values.size(); ++k) EXPECT_LT(c.values[k], c.values[k - 1]);
    EXPECT_EQ(c.provenance, "mode");
}
