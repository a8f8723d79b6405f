#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spdestab/noise.hpp"

using namespace spdestab;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(ScalarIncrements, Moments) {
    const double dt = 0.01;
    const std::size_t steps = 100000;
    const auto x = scalar_increments({42, 0}, dt, steps);
    EXPECT_LE(std::abs(mean(x)), 4.0 * std::sqrt(dt / steps));
    EXPECT_NEAR(variance(x), dt, 0.05 * dt);
}

TEST(ScalarIncrements, Deterministic) {
    EXPECT_EQ(scalar_increments({7, 3}, 0.1, 1000), scalar_increments({7, 3}, 0.1, 1000));
    EXPECT_NE(scalar_increments({7, 3}, 0.1, 10), scalar_increments({7, 4}, 0.1, 10));
    EXPECT_NE(scalar_increments({7, 3}, 0.1, 10), scalar_increments({8, 3}, 0.1, 10));
}

TEST(ScalarIncrements, VarianceLinearInDt) {
    const auto a = scalar_increments({1, 0}, 0.01, 100000);
    const auto b = scalar_increments({2, 0}, 0.04, 100000);
    EXPECT_NEAR(variance(b) / variance(a), 4.0, 0.2);
}

TEST(ScalarIncrements, StreamsIndependentAcrossPathIndex) {
    const auto a = scalar_increments({99, 0}, 1.0, 100000);
    const auto b = scalar_increments({99, 1}, 1.0, 100000);
    EXPECT_LE(std::abs(correlation(a, b)), 0.02);
}

TEST(ScalarIncrements, RejectsNonPositiveDt) { EXPECT_THROW(scalar_increments({1, 0}, 0.0, 5), InvalidArgument); }

TEST(FieldFactor, ConstantKernelIsRankOne) {
    const auto g = build_grid(1.0, 4);
    const auto cov = CovarianceSpec::constant(1.0);
    const auto f = field_factor(cov, g);
    EXPECT_EQ(f.rank(), 1);
    EXPECT_LE(factor_reconstruction_error(f, cov), 1e-12);
    const Eigen::MatrixXd q = f.matrix * f.matrix.transpose();
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(q(i, j), 1.0, 1e-12);
    const auto inc = field_increments(f, {5, 0}, 0.1);
    for (double v : inc.values) EXPECT_NEAR(v, inc.values[0], 1e-12);
}

TEST(FieldFactor, ZeroAmplitudeGivesZeroIncrements) {
    const auto g = build_grid(1.0, 6);
    const auto f = field_factor(CovarianceSpec::constant(0.0), g);
    EXPECT_EQ(f.rank(), 0);
    const auto inc = field_increments(f, {5, 0}, 0.1);
    for (double v : inc.values) EXPECT_EQ(v, 0.0);
}

TEST(FieldFactor, SquaredExponentialApproachesConstant) {
    const auto g = build_grid(1.0, 20);
    const Eigen::MatrixXd qc = covariance_matrix(CovarianceSpec::constant(1.0), g);
    double prev = INFINITY;
    for (double ell : {10.0, 100.0, 1000.0}) {
        const double d = (covariance_matrix(CovarianceSpec::squared_exponential(1.0, ell), g) - qc).cwiseAbs().maxCoeff();
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(FieldFactor, SquaredExponentialReconstruction) {
    const auto g = build_grid(1.0, 32);
    const auto cov = CovarianceSpec::squared_exponential(0.7, 0.3);
    const auto f = field_factor(cov, g);
    EXPECT_LE(factor_reconstruction_error(f, cov), 1e-10);
    EXPECT_GE(cov.inf_bound(g), 0.0);
    EXPECT_LE(cov.inf_bound(g), 0.7 * std::exp(-1.0 / 0.09) * (1.0 + 1e-12));
}

TEST(FieldFactor, RejectsBadSpec) {
    const auto g = build_grid(1.0, 4);
    EXPECT_THROW(field_factor(CovarianceSpec::constant(-1.0), g), InvalidArgument);
    EXPECT_THROW(field_factor(CovarianceSpec::squared_exponential(1.0, 0.0), g), InvalidArgument);
}

TEST(FieldIncrements, EmpiricalCovariance) {
    const auto g = build_grid(1.0, 5);
    const auto cov = CovarianceSpec::squared_exponential(1.0, 0.4);
    const auto f = field_factor(cov, g);
    const double dt = 0.02;
    const std::size_t draws = 100000;
    GaussianStream s({11, 0});
    std::vector<double> out(5), scratch;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    for (std::size_t k = 0; k < draws; ++k) {
        draw_field(s, f, dt, out, scratch);
        const Eigen::Map<Eigen::VectorXd> v(out.data(), 5);
        acc += v * v.transpose();
    }
    acc /= static_cast<double>(draws);
    const Eigen::MatrixXd want = dt * covariance_matrix(cov, g);
    EXPECT_LE((acc - want).cwiseAbs().maxCoeff(), 0.05 * want.cwiseAbs().maxCoeff());
}

TEST(FieldIncrements, ZeroDtAndReproducible) {
    const auto g = build_grid(1.0, 6);
    const auto f = field_factor(CovarianceSpec::squared_exponential(1.0, 0.5), g);
    for (double v : field_increments(f, {3, 2}, 0.0).values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(field_increments(f, {3, 2}, 0.1).values, field_increments(f, {3, 2}, 0.1).values);
}

TEST(WhiteIncrements, VarianceAndIndependence) {
    const auto g = build_grid(1.0, 9);
    const double dt = 1e-3;
    const std::size_t draws = 100000;
    GaussianStream s({21, 0});
    std::vector<std::vector<double>> cols(3, std::vector<double>(draws));
    std::vector<double> out(g.size());
    for (std::size_t k = 0; k < draws; ++k) {
        draw_white(s, g, dt, out);
        for (std::size_t j = 0; j < 3; ++j) cols[j][k] = out[j * 4];
    }
    for (const auto& c : cols) EXPECT_NEAR(variance(c), dt / g.spacing(), 0.05 * dt / g.spacing());
    EXPECT_LE(std::abs(correlation(cols[0], cols[1])), 0.02);
    EXPECT_LE(std::abs(correlation(cols[1], cols[2])), 0.02);
}

TEST(WhiteIncrements, ZeroDt) {
    const auto g = build_grid(1.0, 7);
    for (double v : white_increments(g, {1, 1}, 0.0).values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(white_increments(g, {1, 1}, 0.1).values, white_increments(g, {1, 1}, 0.1).values);
}
