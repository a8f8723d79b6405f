#pragma once

// Closed-form reference values for the linear submodels. Lattice oracles are
// exact in the discrete sine basis of the grid, so comparisons against
// simulation isolate time-stepping and sampling error.

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spdestab/errors.hpp"
#include "spdestab/lattice.hpp"

namespace spdestab {

struct OracleCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::string provenance;
};

inline OracleCurve make_curve(const std::vector<double>& times, const std::function<double(double)>& fn,
                              std::string provenance) {
    OracleCurve c{times, {}, std::move(provenance)};
    c.values.reserve(times.size());
    for (double t : times) c.values.push_back(fn(t));
    return c;
}

/// E X_t^k for dX = aX dt + sigma X dW, X_0 = x0.
inline double gbm_moment(double x0, double a, double sigma, double k, double t) {
    require(t >= 0.0, "gbm_moment: t must be >= 0");
    if (k == 0.0) return 1.0;
    return std::pow(x0, k) * std::exp(k * a * t + k * (k - 1.0) * sigma * sigma * t / 2.0);
}

/// Pathwise GBM solution x0 exp((a - sigma^2/2) t + sigma W_t).
inline double gbm_exact(double x0, double a, double sigma, double t, double w_t) {
    return x0 * std::exp((a - sigma * sigma / 2.0) * t + sigma * w_t);
}

/// Coefficients of `u` in the sine basis, scaled so that sum_k c_k^2 = h sum_i u_i^2.
inline std::vector<double> sine_modal_coefficients(const Grid1D& grid, std::span<const double> u) {
    const std::size_t n = grid.size();
    require(u.size() == n, "sine_modal_coefficients: size mismatch");
    const double norm = std::sqrt(2.0 / static_cast<double>(n + 1)) * std::sqrt(grid.spacing());
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += u[i] * std::sin(std::numbers::pi * static_cast<double>(k * (i + 1)) / static_cast<double>(n + 1));
        c[k - 1] = norm * s;
    }
    return c;
}

/// Exact E||u(t)||^2 of the lattice heat equation du = mu Lap_h u dt + sigma dW_t:
/// sum_k c_k^2 e^{-2 mu lam_k t} + sigma^2 sum_k w_k^2 (1 - e^{-2 mu lam_k t}) / (2 mu lam_k),
/// with c_k the modes of u0 and w_k those of the constant 1.
inline double additive_heat_ms(const Field& u0, double mu, double sigma, const Grid1D& grid, double t) {
    require(mu > 0.0, "additive_heat_ms: mu must be positive");
    require(t >= 0.0, "additive_heat_ms: t must be >= 0");
    require_on_grid(grid, u0, "additive_heat_ms");
    const auto c = sine_modal_coefficients(grid, u0.values);
    const auto w = sine_modal_coefficients(grid, std::vector<double>(grid.size(), 1.0));
    double det = 0.0, stoch = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double lam = discrete_dirichlet_eigenvalue(grid, k + 1);
        const double decay = std::exp(-2.0 * mu * lam * t);
        det += c[k] * c[k] * decay;
        stoch += w[k] * w[k] * (-std::expm1(-2.0 * mu * lam * t)) / (2.0 * mu * lam);
    }
    return det + sigma * sigma * stoch;
}

/// Exact E||u_n||^2 of the semi-implicit scheme (I - dt mu Lap_h) u_{n+1} = u_n + sigma dW_n itself:
/// per mode m_{n+1} = (m_n + sigma^2 w_k^2 dt) r_k with r_k = (1 + mu lam_k dt)^{-2}.
inline double additive_heat_ms_scheme(const Field& u0, double mu, double sigma, const Grid1D& grid, double dt,
                                      std::size_t steps) {
    require(mu > 0.0 && dt > 0.0, "additive_heat_ms_scheme: mu and dt must be positive");
    require_on_grid(grid, u0, "additive_heat_ms_scheme");
    const auto c = sine_modal_coefficients(grid, u0.values);
    const auto w = sine_modal_coefficients(grid, std::vector<double>(grid.size(), 1.0));
    const double n = static_cast<double>(steps);
    double total = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double a = mu * discrete_dirichlet_eigenvalue(grid, k + 1) * dt;
        const double log_r = -2.0 * std::log1p(a);
        const double rn = std::exp(n * log_r);
        // r (1 - r^n) / (1 - r), written to stay accurate for small a
        const double geo = -std::expm1(n * log_r) / std::expm1(-log_r);
        total += c[k] * c[k] * rn + sigma * sigma * w[k] * w[k] * dt * geo;
    }
    return total;
}

/// The energy estimate behind additive_heat_bound applied to one scheme step:
/// E||u_n||^2 <= E0 r^n + sigma^2 |D| dt r (1 - r^n)/(1 - r), r = (1 + mu lam1 dt)^{-2}.
inline double additive_heat_bound_scheme(double ms_u0, double sigma, double domain_size, double lambda1, double mu,
                                         double dt, std::size_t steps) {
    require(mu > 0.0 && dt > 0.0 && lambda1 > 0.0, "additive_heat_bound_scheme: mu, dt, lambda1 must be positive");
    const double log_r = -2.0 * std::log1p(mu * lambda1 * dt);
    const double n = static_cast<double>(steps);
    return ms_u0 * std::exp(n * log_r) + sigma * sigma * domain_size * dt * (-std::expm1(n * log_r) / std::expm1(-log_r));
}

/// t -> infinity limit of additive_heat_ms.
inline double additive_heat_stationary(double mu, double sigma, const Grid1D& grid) {
    const auto w = sine_modal_coefficients(grid, std::vector<double>(grid.size(), 1.0));
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * w[k] / (2.0 * mu * discrete_dirichlet_eigenvalue(grid, k + 1));
    return sigma * sigma * s;
}

/// Lyapunov bound [E||u0||^2 - S] e^{-2 lam mu t} + S with S = sigma^2 |D| / (2 lam mu).
inline double additive_heat_bound(double ms_u0, double sigma, double domain_size, double lambda1, double mu, double t) {
    const double s = sigma * sigma * domain_size / (2.0 * lambda1 * mu);
    return (ms_u0 - s) * std::exp(-2.0 * lambda1 * mu * t) + s;
}

/// E||u(t)||^2 for du = (Lap u + K u) dt + sigma u dW_t from u0 = rho phi_1:
/// rho^2 ||phi_1||^2 exp((2(K - lam1) + sigma^2) t).
inline double single_mode_multiplicative_ms(double rho, double K, double lambda1, double sigma, double t,
                                            double phi1_norm_sq) {
    return rho * rho * phi1_norm_sq * std::exp((2.0 * (K - lambda1) + sigma * sigma) * t);
}

/// Deterministic envelope rho e^{-(alpha + sigma^2/2) t} of the integral bound.
inline double t32_envelope(double rho, double alpha, double sigma, double t) {
    return rho * std::exp(-(alpha + sigma * sigma / 2.0) * t);
}

/// Mean bound factor multiplying phi_1(x) as printed in the theorem: rho e^{-alpha t}.
inline double t32_mean_factor_printed(double rho, double alpha, double t) { return rho * std::exp(-alpha * t); }

/// Mean bound factor with the exponent of the derivation, rho e^{(alpha - lam1) t}
/// (the derivation drops the rho prefactor; it is restored here).
inline double t32_mean_factor_proof(double rho, double alpha, double lambda1, double t) {
    return rho * std::exp((alpha - lambda1) * t);
}

}  // namespace spdestab
