#pragma once

// Noise drivers: scalar Wiener increments, Wiener random field increments with a
// spatial covariance q(x, y), and lattice space-time white noise.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdestab/errors.hpp"
#include "spdestab/lattice.hpp"

namespace spdestab {

/// Identifies one independent random stream of an ensemble.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-path engine seed, a pure function of (master_seed, path_index).
inline std::uint64_t stream_seed(const SeedSpec& s) noexcept {
    return splitmix64(splitmix64(s.master_seed) ^ splitmix64(~s.path_index));
}

/// Standard normal draws from a seeded 64-bit Mersenne Twister.
class GaussianStream {
public:
    explicit GaussianStream(const SeedSpec& seed) : engine_(stream_seed(seed)) {}

    double next() { return normal_(engine_); }

    void fill(std::span<double> out, double scale) {
        for (double& v : out) v = scale * normal_(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class NoiseKind { scalar, field, white };

struct NoiseIncrement {
    NoiseKind kind = NoiseKind::scalar;
    double dt = 0.0;
    std::vector<double> values;  // one value for scalar, N otherwise
};

/// Spatial covariance q(x, y) of a Wiener random field.
struct CovarianceSpec {
    enum class Kernel { constant, squared_exponential };

    Kernel kernel = Kernel::constant;
    double amplitude = 1.0;     // q0 of the kernel
    double length_scale = 1.0;  // only for squared_exponential

    static CovarianceSpec constant(double q0) { return {Kernel::constant, q0, 1.0}; }
    static CovarianceSpec squared_exponential(double q0, double ell) {
        return {Kernel::squared_exponential, q0, ell};
    }

    double operator()(double x, double y) const {
        if (kernel == Kernel::constant) return amplitude;
        const double d = (x - y) / length_scale;
        return amplitude * std::exp(-d * d);
    }

    /// q0 >= sup q over the closed domain.
    double sup_bound() const { return amplitude; }

    /// q1 <= inf q over the closed domain of `grid`.
    double inf_bound(const Grid1D& grid) const {
        if (kernel == Kernel::constant) return amplitude;
        const double d = grid.length() / length_scale;
        return amplitude * std::exp(-d * d);
    }

    void validate() const {
        require(std::isfinite(amplitude) && amplitude >= 0.0, "covariance amplitude must be >= 0");
        require(kernel == Kernel::constant || (std::isfinite(length_scale) && length_scale > 0.0),
                "covariance length scale must be positive");
    }
};

inline Eigen::MatrixXd covariance_matrix(const CovarianceSpec& cov, const Grid1D& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            q(i, j) = cov(grid.node(static_cast<std::size_t>(i)), grid.node(static_cast<std::size_t>(j)));
    return q;
}

/// Columns of A with A A^T = Q; zero-variance directions are dropped, so
/// `rank()` standard normals are consumed per draw.
struct FieldFactor {
    Grid1D grid;
    Eigen::MatrixXd matrix;  // N x rank

    Eigen::Index rank() const { return matrix.cols(); }
};

inline FieldFactor field_factor(const CovarianceSpec& cov, const Grid1D& grid) {
    cov.validate();
    const Eigen::MatrixXd q = covariance_matrix(cov, grid);
    if (!(q - q.transpose()).isZero(0.0))
        throw std::logic_error("field_factor: covariance kernel evaluation is not symmetric");

    FieldFactor f{grid, Eigen::MatrixXd(q.rows(), 0)};
    const double scale = q.cwiseAbs().maxCoeff();
    if (scale == 0.0) return f;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
    if (eig.info() != Eigen::Success) throw std::runtime_error("field_factor: eigensolver failed");
    const Eigen::VectorXd& lam = eig.eigenvalues();
    if (lam.minCoeff() < -1e-8 * scale)
        throw InvalidCovariance("field_factor: covariance matrix is not positive semidefinite");

    // Directions below the clipping floor carry no variance.
    const double floor = 1e-14 * scale;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < lam.size(); ++k)
        if (lam(k) > floor) keep.push_back(k);
    f.matrix.resize(q.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        f.matrix.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]) * std::sqrt(lam(keep[c]));
    return f;
}

inline double factor_reconstruction_error(const FieldFactor& f, const CovarianceSpec& cov) {
    const Eigen::MatrixXd q = covariance_matrix(cov, f.grid);
    if (f.rank() == 0) return q.cwiseAbs().maxCoeff();
    return (f.matrix * f.matrix.transpose() - q).cwiseAbs().maxCoeff();
}

// Stream-based draws used by the time steppers.

inline double draw_scalar(GaussianStream& s, double dt) { return std::sqrt(dt) * s.next(); }

inline void draw_field(GaussianStream& s, const FieldFactor& f, double dt, std::span<double> out,
                       std::vector<double>& scratch) {
    const auto r = static_cast<std::size_t>(f.rank());
    scratch.resize(r);
    s.fill(scratch, std::sqrt(dt));
    const Eigen::Map<const Eigen::VectorXd> xi(scratch.data(), static_cast<Eigen::Index>(r));
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(out.size()));
    if (r == 0)
        o.setZero();
    else
        o.noalias() = f.matrix * xi;
}

/// Lattice space-time white noise: i.i.d. N(0, dt/h) per node.
inline void draw_white(GaussianStream& s, const Grid1D& grid, double dt, std::span<double> out) {
    s.fill(out, std::sqrt(dt / grid.spacing()));
}

// Seed-taking conveniences: each call opens a fresh stream for `seed`.

inline std::vector<double> scalar_increments(const SeedSpec& seed, double dt, std::size_t steps) {
    require(dt > 0.0, "scalar_increments: dt must be positive");
    GaussianStream s(seed);
    std::vector<double> out(steps);
    s.fill(out, std::sqrt(dt));
    return out;
}

inline NoiseIncrement field_increments(const FieldFactor& f, const SeedSpec& seed, double dt) {
    require(dt >= 0.0, "field_increments: dt must be >= 0");
    GaussianStream s(seed);
    NoiseIncrement inc{NoiseKind::field, dt, std::vector<double>(f.grid.size())};
    std::vector<double> scratch;
    draw_field(s, f, dt, inc.values, scratch);
    return inc;
}

inline NoiseIncrement white_increments(const Grid1D& grid, const SeedSpec& seed, double dt) {
    require(dt >= 0.0, "white_increments: dt must be >= 0");
    GaussianStream s(seed);
    NoiseIncrement inc{NoiseKind::white, dt, std::vector<double>(grid.size())};
    draw_white(s, grid, dt, inc.values);
    return inc;
}

}  // namespace spdestab
