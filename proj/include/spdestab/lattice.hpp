#pragma once

// Uniform 1-D lattice on an interval with homogeneous Dirichlet boundary:
// grid, discrete (p-)Laplacian, principal Dirichlet eigenpair, and the C^2
// regularisation k_eps of the squared negative part.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spdestab/errors.hpp"

namespace spdestab {

/// Interior nodes x_i = a + i*h, i = 1..N, of the interval (a, a+L); h = L/(N+1).
class Grid1D {
public:
    Grid1D() = default;

    Grid1D(double origin, double length, std::size_t interior_count)
        : origin_(origin), length_(length), n_(interior_count),
          h_(length / static_cast<double>(interior_count + 1)) {}

    double origin() const noexcept { return origin_; }
    double length() const noexcept { return length_; }
    std::size_t interior_count() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }

    /// Position of interior node `i` (0-based, so node(0) = a + h).
    double node(std::size_t i) const noexcept {
        return origin_ + static_cast<double>(i + 1) * h_;
    }

    std::vector<double> nodes() const {
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
        return x;
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    double origin_ = 0.0;
    double length_ = 1.0;
    std::size_t n_ = 0;
    double h_ = 0.0;
};

inline Grid1D build_grid(double length, long interior_count) {
    require(std::isfinite(length) && length > 0.0, "build_grid: length must be positive");
    require(interior_count >= 2, "build_grid: need at least 2 interior nodes");
    return Grid1D(0.0, length, static_cast<std::size_t>(interior_count));
}

/// Grid on (a, b); used for the truncated whole-line problems.
inline Grid1D build_grid_on(double a, double b, long interior_count) {
    require(std::isfinite(a) && std::isfinite(b) && b > a, "build_grid_on: need a < b");
    require(interior_count >= 2, "build_grid_on: need at least 2 interior nodes");
    return Grid1D(a, b - a, static_cast<std::size_t>(interior_count));
}

/// Nodal values of a state on a grid.
struct Field {
    Grid1D grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid1D& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    Field(const Grid1D& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        require(values.size() == grid.size(), "Field: value count does not match grid");
    }

    template <class Fn>
    static Field sample(const Grid1D& g, Fn&& fn) {
        Field f(g);
        for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = fn(g.node(i));
        return f;
    }

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }
};

inline void require_on_grid(const Grid1D& grid, const Field& u, const char* who) {
    if (!(u.grid == grid) || u.values.size() != grid.size())
        throw InvalidArgument(std::string(who) + ": field is not defined on this grid");
}

/// Discrete L2 norm squared, h * sum u_i^2.
inline double l2_norm_sq(const Grid1D& grid, std::span<const double> u) {
    double s = 0.0;
    for (double v : u) s += v * v;
    return grid.spacing() * s;
}

/// h * sum u_i w_i
inline double weighted_integral(const Grid1D& grid, std::span<const double> u,
                                std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
    return grid.spacing() * s;
}

inline double integral(const Grid1D& grid, std::span<const double> u) {
    double s = 0.0;
    for (double v : u) s += v;
    return grid.spacing() * s;
}

// Span kernels shared by the Field API and the time steppers.
namespace detail {

inline void laplacian_into(double h, double mu, std::span<const double> u, std::span<double> out) {
    const std::size_t n = u.size();
    const double c = mu / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i + 1 < n ? u[i + 1] : 0.0;
        out[i] = c * (left - 2.0 * u[i] + right);
    }
}

inline void p_laplacian_into(double h, double p, std::span<const double> u, std::span<double> out) {
    const std::size_t n = u.size();
    auto flux = [&](double lo, double hi) {
        const double g = (hi - lo) / h;
        return std::pow(std::abs(g), p - 2.0) * g;
    };
    // flux through the left face of node 0 (ghost value 0)
    double left_flux = flux(0.0, u[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double right = i + 1 < n ? u[i + 1] : 0.0;
        const double right_flux = flux(u[i], right);
        out[i] = (right_flux - left_flux) / h;
        left_flux = right_flux;
    }
}

inline double max_abs_gradient(double h, std::span<const double> u) {
    double g = std::abs(u.front()) / h;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) g = std::max(g, std::abs(u[i + 1] - u[i]) / h);
    return std::max(g, std::abs(u.back()) / h);
}

}  // namespace detail

/// mu * (u_{i-1} - 2u_i + u_{i+1}) / h^2 with zero ghost values.
inline Field laplacian_apply(const Grid1D& grid, const Field& u, double mu) {
    require_on_grid(grid, u, "laplacian_apply");
    Field out(grid);
    detail::laplacian_into(grid.spacing(), mu, u.values, out.values);
    return out;
}

/// Conservative flux form of div(|u'|^{p-2} u'); p = 2 reduces to laplacian_apply(mu = 1).
inline Field p_laplacian_apply(const Grid1D& grid, const Field& u, double p) {
    require(p >= 2.0, "p_laplacian_apply: p must be >= 2");
    require_on_grid(grid, u, "p_laplacian_apply");
    if (p == 2.0) return laplacian_apply(grid, u, 1.0);
    Field out(grid);
    detail::p_laplacian_into(grid.spacing(), p, u.values, out.values);
    return out;
}

/// Largest explicit Euler step for the p-Laplacian at state `u`: the linearised
/// diffusivity is (p-1)|u'|^{p-2}, so dt <= h^2 / (2 (p-1) max|u'|^{p-2}).
inline double p_laplacian_step_bound(const Grid1D& grid, std::span<const double> u, double p) {
    if (p == 2.0) return grid.spacing() * grid.spacing() / 2.0;
    const double g = detail::max_abs_gradient(grid.spacing(), u);
    const double d = (p - 1.0) * std::pow(g, p - 2.0);
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    return grid.spacing() * grid.spacing() / (2.0 * d);
}

enum class EigenMode { continuous, discrete };

/// Principal Dirichlet pair (lambda_1, phi_1) with phi_1 >= 0 and h * sum phi_1 = 1.
struct EigenPair {
    double lambda1 = 0.0;
    double lambda1_continuous = 0.0;
    double lambda1_discrete = 0.0;
    Field phi1;
    double normalization_sum = 0.0;
    EigenMode mode = EigenMode::discrete;
};

/// k-th eigenvalue of the Dirichlet second-difference matrix,
/// (2/h^2)(1 - cos(k pi h / L)), evaluated as (4/h^2) sin^2(k pi h / 2L).
inline double discrete_dirichlet_eigenvalue(const Grid1D& grid, std::size_t k) {
    const double h = grid.spacing();
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi * h / (2.0 * grid.length()));
    return 4.0 / (h * h) * s * s;
}

inline EigenPair principal_eigenpair(const Grid1D& grid, EigenMode mode) {
    require(grid.size() >= 2 && grid.length() > 0.0, "principal_eigenpair: invalid grid");
    const double L = grid.length();
    const double a = grid.origin();
    EigenPair e;
    e.mode = mode;
    e.lambda1_continuous = (std::numbers::pi / L) * (std::numbers::pi / L);
    e.lambda1_discrete = discrete_dirichlet_eigenvalue(grid, 1);
    e.lambda1 = mode == EigenMode::continuous ? e.lambda1_continuous : e.lambda1_discrete;

    // The sampled sine is the exact discrete eigenvector; the continuum prefactor
    // pi/(2L) is removed again by the discrete normalisation.
    e.phi1 = Field::sample(grid, [&](double x) {
        return std::numbers::pi / (2.0 * L) * std::sin(std::numbers::pi * (x - a) / L);
    });
    const double mass = integral(grid, e.phi1.values);
    for (double& v : e.phi1.values) v /= mass;
    e.normalization_sum = integral(grid, e.phi1.values);
    return e;
}

// k_eps: C^2 regularisation of k(r) = (r^-)^2.
//   r < -eps        : r^2 - eps^2/6
//   -eps <= r < 0   : -(r^3/eps)(r/(2 eps) + 4/3)
//   r >= 0          : 0

inline void require_eps(double eps) {
    require(std::isfinite(eps) && eps > 0.0, "k_eps: eps must be positive");
}

inline double k_eps(double r, double eps) {
    require_eps(eps);
    if (r < -eps) return r * r - eps * eps / 6.0;
    if (r < 0.0) return -(r * r * r / eps) * (r / (2.0 * eps) + 4.0 / 3.0);
    return 0.0;
}

inline double k_eps_d1(double r, double eps) {
    require_eps(eps);
    if (r < -eps) return 2.0 * r;
    if (r < 0.0) return -2.0 * r * r * r / (eps * eps) - 4.0 * r * r / eps;
    return 0.0;
}

inline double k_eps_d2(double r, double eps) {
    require_eps(eps);
    if (r < -eps) return 2.0;
    if (r < 0.0) return -6.0 * r * r / (eps * eps) - 8.0 * r / eps;
    return 0.0;
}

/// k(r) = (r^-)^2, the limit of k_eps as eps -> 0.
inline double k_limit(double r) { return r < 0.0 ? r * r : 0.0; }

}  // namespace spdestab
