#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spdestab/criteria.hpp"

using namespace spdestab;

namespace {
constexpr double pi2 = std::numbers::pi * std::numbers::pi;
}

TEST(T01, HandArithmetic) {
    const auto r = t01_check(0.1, 1.0, 1.0, pi2, 1.0);
    EXPECT_NEAR(r.lhs(), 0.01, 1e-15);
    EXPECT_NEAR(r.rhs(), 2.0 * pi2, 1e-12);
    EXPECT_TRUE(r.satisfied());
    EXPECT_NEAR(*r.value("stationary_level"), 0.01 / (2.0 * pi2), 1e-15);
}

TEST(T01, NoiseFreeAndDegenerate) {
    EXPECT_TRUE(t01_check(0.0, 1.0, 1.0, pi2, 0.5).satisfied());
    EXPECT_THROW(t01_check(0.1, 1.0, 0.0, pi2, 1.0), InvalidArgument);
    EXPECT_THROW(t01_check(0.1, 1.0, 1.0, 0.0, 1.0), InvalidArgument);
}

TEST(GammaExponent, ExampleValues) {
    EXPECT_NEAR(gamma_exponent(1.5, 4.0), 1.0, 1e-12);
    EXPECT_NEAR(gamma_exponent(2.0, 6.0), 1.0, 1e-12);
    EXPECT_NEAR((2.0 * 2.0 - 2.0 + 1.0) * 2.0 / 1.0, 6.0, 1e-12);
    EXPECT_THROW(gamma_exponent(1.0, 4.0), ConditionViolated);
    EXPECT_THROW(gamma_exponent(2.0, 4.0), ConditionViolated);
}

TEST(GammaExponent, DefiningRelationOnGrid) {
    for (double m = 1.05; m < 4.0; m += 0.25)
        for (double p = 2.0 * m + 0.1; p < 12.0; p += 0.7) {
            const double g = gamma_exponent(m, p);
            EXPECT_NEAR((2.0 * m - 2.0 + g) * 2.0 / g, p, 1e-12 * p);
        }
}

TEST(T31, ExampleThreshold) {
    const double c_inf = 1.3;
    const double b = 1.0 / std::pow(c_inf, 4.0);
    EXPECT_NEAR(t31_c_hat(b, 1.0, c_inf, 1.5, 4.0), 0.25, 1e-12);
    EXPECT_NEAR(t31_noise_threshold(-1.0, b, 1.0, c_inf, 1.5, 4.0), 0.75, 1e-12);
    // sigma^2/(2 E||u0||^2) = 0.5 < 3/4
    EXPECT_TRUE(t31_check(-1.0, b, 1.0, 1.0, c_inf, 1.5, 4.0, 1.0).satisfied());
}

TEST(T31, BoundaryIsNotSatisfied) {
    const auto r = t31_check(-1.0, 1.0, 1.5, 1.0, 1.0, 1.5, 4.0, 1.5);  // 2.25 / 3 = 3/4 exactly
    EXPECT_EQ(r.lhs(), 0.0);
    EXPECT_FALSE(r.satisfied());
}

TEST(T31, DeterministicDissipative) {
    const auto r = t31_check(-2.0, 0.0, 0.0, 1.0, 1.0, 1.5, 4.0, 1.0);
    EXPECT_TRUE(r.satisfied());
    EXPECT_EQ(r.lhs(), -2.0);
    EXPECT_THROW(t31_check(-2.0, 0.0, 0.0, 1.0, 1.0, 1.5, 4.0, 0.0), InvalidArgument);
    EXPECT_THROW(t31_check(-2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 4.0, 1.0), ConditionViolated);
}

TEST(T31, BoundSolvesTheDifferentialInequality) {
    // y' = 2 k y + s with k = a + C_hat
    const double k = -0.75, sigma = 0.8, ms0 = 1.0;
    for (double t : {0.0, 0.3, 1.0}) {
        const double d = 1e-6;
        const double y = t31_bound(k, sigma, 1.0, ms0, t);
        const double dy = (t31_bound(k, sigma, 1.0, ms0, t + d) - t31_bound(k, sigma, 1.0, ms0, t - d)) / (2.0 * d);
        EXPECT_NEAR(dy, 2.0 * k * y + sigma * sigma, 1e-7);
    }
    EXPECT_DOUBLE_EQ(t31_bound(k, sigma, 1.0, ms0, 0.0), ms0);
}

TEST(T33, HandArithmetic) {
    const auto r = t33_check(1.0, pi2, 1.0);
    EXPECT_TRUE(r.find("mean_square")->satisfied);
    EXPECT_TRUE(r.find("stochastic")->satisfied);
    EXPECT_NEAR(*r.predicted_index, 1.5 - pi2, 1e-12);
}

TEST(T33, Boundary) {
    const auto r = t33_check(pi2, pi2, 0.0);
    EXPECT_TRUE(r.find("mean_square")->satisfied);
    EXPECT_FALSE(r.find("stochastic")->satisfied);
}

TEST(T33, NoiseStabilisedRegime) {
    const double sigma = 1.2, eps = 1e-3;
    const auto r = t33_check(pi2 + sigma * sigma / 2.0 - eps, pi2, sigma);
    EXPECT_FALSE(r.find("mean_square")->satisfied);
    EXPECT_TRUE(r.find("stochastic")->satisfied);
}

TEST(LambdaHat, HandSubstitution) {
    EXPECT_NEAR(lambda_hat(3.0, 1.5, 1.0, 1.0, 1.0), 0.25, 1e-12);
    const double a = lambda_hat(3.0, 1.5, 1.0, 1.0, 1.0);
    const double b = lambda_hat(3.0, 1.5, 10.0, 1.0, 1.0);
    const double c = lambda_hat(3.0, 1.5, 100.0, 1.0, 1.0);
    EXPECT_GT(a, b);
    EXPECT_GT(b, c);
    EXPECT_LT(c, 0.01);
}

TEST(LambdaHat, Preconditions) {
    EXPECT_THROW(lambda_hat(3.0, 2.0, 1.0, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(lambda_hat(4.0, 1.5, 1.0, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(lambda_hat(3.0, 1.0, 1.0, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(lambda_hat(3.0, 1.5, 0.0, 1.0, 1.0), InvalidArgument);
}

TEST(T34, MeanSquareVerdictAndIndex) {
    const auto r = t34_check(3.0, 1.5, 1.0, 1.0, 1.0, pi2);
    EXPECT_TRUE(r.satisfied());
    EXPECT_NEAR(*r.predicted_index, -(pi2 - 0.25), 1e-12);
    EXPECT_NEAR(*r.value("lambda_hat_alt"), 0.25, 1e-12);  // k2 = 1: both readings agree
}

TEST(T34, StochasticHandSubstitution) {
    const auto r = t34_stochastic_check(5.0, 1.0, 1.0, 1.0, 1.0, pi2);
    EXPECT_NEAR(r.rhs(), -1.75, 1e-12);
    EXPECT_TRUE(r.satisfied());
    const auto z = t34_stochastic_check(5.0, 1.0, 0.0, 1.0, 1.0, 0.1);
    EXPECT_EQ(z.rhs(), 0.0);
    EXPECT_TRUE(z.satisfied());
    EXPECT_THROW(t34_stochastic_check(5.0, 1.0, 1.0, 1.0, 2.0, pi2), InvalidArgument);
    EXPECT_THROW(t34_stochastic_check(3.0, 1.0, 1.0, 1.0, 1.0, pi2), InvalidArgument);
}

TEST(T36, ConjugateExponents) {
    const auto e = t36_exponents(3.0, 2.0);
    EXPECT_NEAR(e.p, 2.0, 1e-12);
    EXPECT_NEAR(e.q, 2.0, 1e-12);
    EXPECT_NEAR(1.0 / e.p + 1.0 / e.q, 1.0, 1e-12);
    for (double m = 1.5; m < 6.0; m += 0.37)
        for (double m0 = 1.01; m0 < m; m0 += 0.11) {
            const auto c = t36_exponents(m, m0);
            EXPECT_NEAR(1.0 / c.p + 1.0 / c.q, 1.0, 1e-12);
        }
    EXPECT_THROW(t36_exponents(2.0, 2.0), InvalidArgument);
    EXPECT_THROW(t36_exponents(3.0, 1.0), InvalidArgument);
}

TEST(T36, VariantOneInapplicable) {
    const auto r = t36_check(T36Variant::i, -10.0, 0.5, 1.0, 2.0, 3.0, 2.0, 0.0);
    EXPECT_FALSE(r.applicable());
    EXPECT_FALSE(r.satisfied());
    EXPECT_FALSE(r.notes.empty());
}

TEST(T36, VariantOneByHand) {
    // p = q = 2, base = 2 (k1 - k2^2/2) = 2 * 0.5 = 1 -> lhs = c1 + 1/2
    const auto r = t36_check(T36Variant::i, -1.0, 0.5, 1.0, 1.0, 3.0, 2.0, 0.0);
    EXPECT_TRUE(r.applicable());
    EXPECT_NEAR(r.lhs(), -0.5, 1e-12);
    EXPECT_TRUE(r.satisfied());
}

TEST(T36, VariantTwoVanishingC2) {
    const double first = t36_variant2_lhs(-1.0, 1e-12, 1.0, 3.0, 2.0, 2.0);
    // (2/4) (1*4/4)^{-1} 1^2 = 0.5
    EXPECT_NEAR(first, 0.5, 1e-12);
    const auto r = t36_check(T36Variant::ii, -1.0, 1e-12, 1.0, 2.0, 3.0, 2.0, 2.0);
    EXPECT_TRUE(r.satisfied());
    EXPECT_NEAR(r.rhs(), 2.0, 1e-15);
    EXPECT_NEAR(*r.value("beta_max"), 0.75, 1e-9);
    EXPECT_NEAR(*r.value("beta"), 0.375, 1e-9);
}

TEST(T36, VariantTwoAlphaZeroLimit) {
    const double at0 = t36_variant2_lhs(-1.0, 0.1, 1.0, 3.0, 2.0, 0.0);
    const double near0 = t36_variant2_lhs(-1.0, 0.1, 1.0, 3.0, 2.0, 1e-9);
    EXPECT_NEAR(at0, near0, 1e-6);
}

TEST(T36, Preconditions) {
    EXPECT_THROW(t36_check(T36Variant::ii, 1.0, 0.1, 1.0, 2.0, 3.0, 2.0, 2.0), InvalidArgument);
    EXPECT_THROW(t36_check(T36Variant::ii, -1.0, 0.1, 1.0, 2.0, 3.0, 2.0, -1.0), InvalidArgument);
    EXPECT_THROW(t36_check(T36Variant::ii, -1.0, 0.1, 1.0, 2.0, 2.0, 3.0, 1.0), InvalidArgument);
}

TEST(T41, ConstantCoefficientsKernelReading) {
    const auto r = t41_check([](double) { return 0.1; }, [](double) { return 0.1; }, 1.0);
    const auto* k = r.find("mean_square_kernel");
    ASSERT_NE(k, nullptr);
    EXPECT_NEAR(k->lhs, 0.2 + 0.1 / std::sqrt(std::numbers::pi), 1e-10);
    EXPECT_NEAR(k->lhs, 0.25642, 1e-5);
    // printed reading: int (t-s)^{1/2} ds = (2/3) t^{3/2}
    EXPECT_NEAR(r.lhs(), 0.2 + 0.1 / (2.0 * std::sqrt(std::numbers::pi)) * 2.0 / 3.0, 1e-10);
}

TEST(T41, GammaZeroIndependentOfReading) {
    const auto r = t41_check([](double s) { return 0.2 * s; }, [](double) { return 0.0; }, 2.0);
    EXPECT_NEAR(r.lhs(), 2.0 * 0.4, 1e-12);
    EXPECT_NEAR(r.find("mean_square_kernel")->lhs, r.lhs(), 1e-14);
    const auto z = t41_check([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0);
    EXPECT_TRUE(z.satisfied());
    EXPECT_EQ(z.lhs(), 0.0);
}

TEST(T41, NonConstantGammaAgainstClosedForm) {
    // gamma(s) = s, t = 1: int s (1-s)^{-1/2} ds = 4/3, int s (1-s)^{1/2} ds = 4/15
    const auto r = t41_check([](double) { return 0.0; }, [](double s) { return s; }, 1.0);
    EXPECT_NEAR(*r.value("gamma_integral_kernel"), 4.0 / 3.0, 1e-10);
    EXPECT_NEAR(*r.value("gamma_integral_printed"), 4.0 / 15.0, 1e-10);
}

TEST(T41, RejectsNegativeSamples) {
    EXPECT_THROW(t41_check([](double) { return -0.1; }, [](double) { return 0.0; }, 1.0), InvalidArgument);
    EXPECT_THROW(t41_check([](double) { return 0.0; }, [](double s) { return 0.5 - s; }, 1.0), InvalidArgument);
}

TEST(T42, Verdicts) {
    auto r = t42_check(-1.0, 1.0);
    EXPECT_TRUE(r.find("mean_square")->satisfied);
    EXPECT_TRUE(r.find("stochastic")->satisfied);
    r = t42_check(0.0, 0.0);
    EXPECT_TRUE(r.find("mean_square")->satisfied);
    EXPECT_FALSE(r.find("stochastic")->satisfied);
    r = t42_check(0.4, 1.0);
    EXPECT_FALSE(r.find("mean_square")->satisfied);
    EXPECT_TRUE(r.find("stochastic")->satisfied);
}

TEST(Holder, Cases) {
    const auto g = build_grid(1.0, 63);
    const auto e = principal_eigenpair(g, EigenMode::discrete);
    const std::vector<double> c(g.size(), 0.7);
    auto h = holder_projection_check(c, e, 3.0);
    EXPECT_NEAR(h.lhs, h.rhs, 1e-12);
    h = holder_projection_check(e.phi1.values, e, 2.0);
    EXPECT_LT(h.lhs, h.rhs);
    EXPECT_TRUE(h.holds);
    // continuum: (int phi^2)^2 = (pi^2/8)^2, int phi^3 = (pi/2)^3 * 4/(3 pi)
    EXPECT_NEAR(h.lhs, std::pow(pi2 / 8.0, 2.0), 1e-3 * h.lhs);
    EXPECT_NEAR(h.rhs, std::pow(std::numbers::pi / 2.0, 3.0) * 4.0 / (3.0 * std::numbers::pi), 1e-3 * h.rhs);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.1 + std::sin(0.3 * i) * std::sin(0.3 * i);
    h = holder_projection_check(u, e, 1.0);
    EXPECT_EQ(h.lhs, h.rhs);
    EXPECT_THROW(holder_projection_check(std::vector<double>(g.size(), -1.0), e, 2.0), InvalidArgument);
}

TEST(Fuzz, ReportsStayFinite) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto finite = [](const CriterionReport& r) {
        for (const auto& v : r.verdicts)
            if (!std::isfinite(v.lhs) || !std::isfinite(v.rhs)) return false;
        for (const auto& [k, v] : r.derived)
            if (!std::isfinite(v)) return false;
        return true;
    };
    for (int i = 0; i < 500; ++i) {
        const double m = 1.0 + 2.0 * u(rng) + 1e-3;
        const double p = 2.0 * m + 0.1 + 5.0 * u(rng);
        EXPECT_TRUE(finite(t31_check(-3.0 * u(rng), 2.0 * u(rng) - 1.0, u(rng), 0.5 + u(rng), 0.5 + u(rng), m, p,
                                     0.1 + u(rng))));
        EXPECT_TRUE(finite(t33_check(2.0 * u(rng), 1.0 + 10.0 * u(rng), 2.0 * u(rng))));
        EXPECT_TRUE(finite(t42_check(2.0 * u(rng) - 1.0, 2.0 * u(rng))));
        const double r = 3.0 + 2.0 * std::floor(3.0 * u(rng));
        const double mm = 1.0 + 1e-3 + (r - 1.0) / 2.0 * 0.99 * u(rng);
        EXPECT_TRUE(finite(t34_check(r, mm, 0.1 + u(rng), u(rng), u(rng), 10.0)));
        const double m36 = 1.5 + 3.0 * u(rng);
        const double m0 = 1.0 + 1e-3 + (m36 - 1.0 - 2e-3) * u(rng);
        EXPECT_TRUE(finite(t36_check(T36Variant::ii, -0.1 - u(rng), 1e-3 + u(rng), 0.1 + u(rng), 2.0 * u(rng), m36, m0,
                                     3.0 * u(rng))));
        EXPECT_TRUE(finite(t36_check(T36Variant::i, -0.1 - u(rng), 1e-3 + u(rng), 0.1 + u(rng), 2.0 * u(rng), m36, m0,
                                     0.0)));
    }
}
