#pragma once

// Time integration: semi-implicit Euler-Maruyama for the lattice models,
// explicit Euler-Maruyama for scalar SDEs, and shared-driver coupling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spdestab/errors.hpp"
#include "spdestab/lattice.hpp"
#include "spdestab/model.hpp"
#include "spdestab/noise.hpp"

namespace spdestab {

struct StepOutcome {
    std::size_t clipped = 0;  // entries set to zero by the positivity clip
    bool finite = true;
    double max_abs = 0.0;
};

struct StepResult {
    Field state;
    StepOutcome outcome;
};

/// Reusable stepping kernel for one model on one grid. Holds scratch buffers
/// and the factorised implicit heat operator, so one instance per worker.
class Stepper {
public:
    Stepper(const ModelSpec& model, const Grid1D& grid) : model_(model), grid_(grid) {
        model_.validate();
        const std::size_t n = grid_.size();
        rhs_.resize(n);
        work_.resize(n);
        if (model_.noise.driver() == NoiseKind::field) factor_ = field_factor(model_.noise.covariance, grid_);
    }

    const ModelSpec& model() const noexcept { return model_; }
    const Grid1D& grid() const noexcept { return grid_; }

    std::size_t increment_size() const noexcept {
        return model_.noise.driver() == NoiseKind::scalar ? 1 : grid_.size();
    }

    /// Draws one step's increment values from `stream` into `xi`.
    void draw(GaussianStream& stream, double dt, std::span<double> xi) {
        switch (model_.noise.driver()) {
            case NoiseKind::scalar:
                xi[0] = draw_scalar(stream, dt);
                break;
            case NoiseKind::field:
                draw_field(stream, *factor_, dt, xi, scratch_);
                break;
            case NoiseKind::white:
                draw_white(stream, grid_, dt, xi);
                break;
        }
    }

    /// Largest stable explicit step at state `u`; infinite unless the operator is an explicit p-Laplacian.
    double explicit_step_bound(std::span<const double> u) const {
        if (model_.op != ModelSpec::Operator::p_laplacian || model_.p == 2.0)
            return std::numeric_limits<double>::infinity();
        return p_laplacian_step_bound(grid_, u, model_.p);
    }

    /// (I - dt mu Lap_h) u_{n+1} = u_n + dt f(u_n) + sigma(u_n) dW_n, in place.
    StepOutcome advance(std::span<double> u, std::span<const double> xi, double dt) {
        const std::size_t n = u.size();
        const bool clip = model_.positivity_clip;
        const bool scalar = xi.size() == 1;
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = u[i];
            const double dw = scalar ? xi[0] : xi[i];
            rhs_[i] = ui + dt * model_.reaction(ui, clip) + model_.noise(ui, clip) * dw;
        }

        switch (model_.op) {
            case ModelSpec::Operator::none:
                std::copy(rhs_.begin(), rhs_.end(), u.begin());
                break;
            case ModelSpec::Operator::laplacian:
                solve_implicit_heat(model_.mu, dt, u);
                break;
            case ModelSpec::Operator::p_laplacian:
                if (model_.p == 2.0) {
                    solve_implicit_heat(1.0, dt, u);
                } else {
                    detail::p_laplacian_into(grid_.spacing(), model_.p, u, work_);
                    for (std::size_t i = 0; i < n; ++i) u[i] = rhs_[i] + dt * work_[i];
                }
                break;
        }

        StepOutcome out;
        for (std::size_t i = 0; i < n; ++i) {
            if (clip && u[i] < 0.0) {
                u[i] = 0.0;
                ++out.clipped;
            }
            if (!std::isfinite(u[i])) out.finite = false;
            out.max_abs = std::max(out.max_abs, std::abs(u[i]));
        }
        return out;
    }

private:
    // Thomas algorithm for the constant tridiagonal (1+2r, -r); factors are cached per (mu, dt).
    void solve_implicit_heat(double mu, double dt, std::span<double> u) {
        const std::size_t n = u.size();
        if (mu != cached_mu_ || dt != cached_dt_) {
            const double h = grid_.spacing();
            const double r = dt * mu / (h * h);
            cp_.assign(n, 0.0);
            inv_den_.assign(n, 0.0);
            double den = 1.0 + 2.0 * r;
            inv_den_[0] = 1.0 / den;
            cp_[0] = -r * inv_den_[0];
            for (std::size_t i = 1; i < n; ++i) {
                den = 1.0 + 2.0 * r + r * cp_[i - 1];
                inv_den_[i] = 1.0 / den;
                cp_[i] = -r * inv_den_[i];
            }
            off_ = -r;
            cached_mu_ = mu;
            cached_dt_ = dt;
        }
        double prev = rhs_[0] * inv_den_[0];
        work_[0] = prev;
        for (std::size_t i = 1; i < n; ++i) {
            prev = (rhs_[i] - off_ * prev) * inv_den_[i];
            work_[i] = prev;
        }
        u[n - 1] = work_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) u[i] = work_[i] - cp_[i] * u[i + 1];
    }

    ModelSpec model_;
    Grid1D grid_;
    std::optional<FieldFactor> factor_;
    std::vector<double> rhs_, work_, scratch_, cp_, inv_den_;
    double off_ = 0.0;
    double cached_mu_ = std::numeric_limits<double>::quiet_NaN();
    double cached_dt_ = std::numeric_limits<double>::quiet_NaN();
};

/// One semi-implicit Euler-Maruyama step of a lattice model.
inline StepResult spde_step(const Field& state, const ModelSpec& model, const NoiseIncrement& inc, double dt) {
    require(dt > 0.0, "spde_step: dt must be positive");
    if (inc.kind != model.noise.driver())
        throw InvalidArgument("spde_step: increment kind does not match the model's noise driver");
    Stepper stepper(model, state.grid);
    if (inc.values.size() != stepper.increment_size())
        throw InvalidArgument("spde_step: increment has the wrong length");
    StepResult res{state, {}};
    res.outcome = stepper.advance(res.state.values, inc.values, dt);
    return res;
}

/// One explicit Euler-Maruyama step of the scalar SDE dX = f(X) dt + sigma(X) dW.
inline double sde_step(double x, const ModelSpec& model, double dw, double dt) {
    const bool clip = model.positivity_clip;
    const double next = x + dt * model.reaction(x, clip) + model.noise(x, clip) * dw;
    return clip && next < 0.0 ? 0.0 : next;
}

struct SimulationOptions {
    std::size_t save_stride = 1;  // record every save_stride-th step, plus t = 0 and t = T
    double blowup_threshold = std::numeric_limits<double>::infinity();
};

/// A sampled path. `states[k]` is the state at `times[k]` (one entry for SDEs).
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> wiener;  // scalar driver W_t at `times`; empty for field/white drivers
    SeedSpec seed{};
    std::size_t clipped_steps = 0;
    std::size_t substeps = 0;  // extra steps forced by the explicit p-Laplacian bound
    bool overflow = false;
    double overflow_time = std::numeric_limits<double>::quiet_NaN();
};

inline std::size_t step_count(double T, double dt) {
    require(T > 0.0 && dt > 0.0 && std::isfinite(T) && std::isfinite(dt), "simulation: T and dt must be positive");
    const double ratio = T / dt;
    const double steps = std::round(ratio);
    require(steps >= 1.0 && std::abs(ratio - steps) <= 1e-9 * ratio, "simulation: T/dt must be an integer");
    return static_cast<std::size_t>(steps);
}

namespace detail {

inline bool is_save_step(std::size_t step, std::size_t steps, std::size_t stride) {
    return step == steps || step % stride == 0;
}

inline bool escaped(const StepOutcome& o, double threshold) { return !o.finite || o.max_abs > threshold; }

}  // namespace detail

/// Integrates a lattice model from `u0` on [0, T] with the stream of `seed`.
inline Trajectory simulate_path(const ModelSpec& model, const Field& u0, double T, double dt, const SeedSpec& seed,
                                const SimulationOptions& opts = {}) {
    const std::size_t steps = step_count(T, dt);
    require(opts.save_stride >= 1, "simulate_path: save_stride must be >= 1");
    Stepper stepper(model, u0.grid);
    GaussianStream stream(seed);
    const bool scalar = model.noise.driver() == NoiseKind::scalar;

    Trajectory tr;
    tr.seed = seed;
    std::vector<double> u = u0.values;
    std::vector<double> xi(stepper.increment_size());
    double w = 0.0;
    tr.times.push_back(0.0);
    tr.states.push_back(u);
    if (scalar) tr.wiener.push_back(0.0);

    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        StepOutcome o;
        bool clipped = false;
        double remaining = dt;
        std::size_t pieces_taken = 0;
        // Explicit p-Laplacian: split the step when it exceeds the stability bound,
        // drawing fresh increments for each piece.
        while (remaining > 0.0) {
            const double bound = 0.9 * stepper.explicit_step_bound(u);
            const double pieces = std::max(1.0, std::ceil(remaining / bound));
            const double h = pieces == 1.0 ? remaining : remaining / pieces;
            ++pieces_taken;
            stepper.draw(stream, h, xi);
            if (scalar) w += xi[0];
            o = stepper.advance(u, xi, h);
            clipped = clipped || o.clipped > 0;
            remaining = pieces == 1.0 ? 0.0 : remaining - h;
            if (detail::escaped(o, opts.blowup_threshold)) break;
        }
        tr.substeps += pieces_taken - 1;
        if (clipped) ++tr.clipped_steps;
        if (detail::escaped(o, opts.blowup_threshold)) {
            tr.overflow = true;
            tr.overflow_time = t;
            break;
        }
        if (detail::is_save_step(step, steps, opts.save_stride)) {
            tr.times.push_back(t);
            tr.states.push_back(u);
            if (scalar) tr.wiener.push_back(w);
        }
    }
    return tr;
}

/// Integrates the scalar SDE of `model` (operator none) from x0.
inline Trajectory simulate_sde_path(const ModelSpec& model, double x0, double T, double dt, const SeedSpec& seed,
                                    const SimulationOptions& opts = {}) {
    model.validate();
    require(model.op == ModelSpec::Operator::none, "simulate_sde_path: model must have operator none");
    require(model.noise.driver() == NoiseKind::scalar, "simulate_sde_path: SDE noise must be scalar");
    const std::size_t steps = step_count(T, dt);
    require(opts.save_stride >= 1, "simulate_sde_path: save_stride must be >= 1");
    GaussianStream stream(seed);

    Trajectory tr;
    tr.seed = seed;
    double x = x0, w = 0.0;
    tr.times.push_back(0.0);
    tr.states.push_back({x});
    tr.wiener.push_back(0.0);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double dw = draw_scalar(stream, dt);
        w += dw;
        const double raw = x + dt * model.reaction(x, model.positivity_clip) + model.noise(x, model.positivity_clip) * dw;
        if (model.positivity_clip && raw < 0.0) ++tr.clipped_steps;
        x = sde_step(x, model, dw, dt);
        if (!std::isfinite(x) || std::abs(x) > opts.blowup_threshold) {
            tr.overflow = true;
            tr.overflow_time = t;
            break;
        }
        if (detail::is_save_step(step, steps, opts.save_stride)) {
            tr.times.push_back(t);
            tr.states.push_back({x});
            tr.wiener.push_back(w);
        }
    }
    return tr;
}

/// Result of a shared-driver run: the lattice path, one path per SDE, and the
/// sum of driver increments each participant consumed.
struct CoupledResult {
    Trajectory spde;
    std::vector<Trajectory> sdes;
    std::vector<double> driver_checksums;  // [0] = lattice model, then the SDEs
    std::size_t steps = 0;
};

/// Called after every step (and once at step 0) with the lattice state and the SDE states.
using CoupledObserver =
    std::function<void(std::size_t step, double t, std::span<const double> field, std::span<const double> sde_states)>;

/// Drives the lattice model and every SDE with the same scalar increment each step.
inline CoupledResult simulate_coupled(const ModelSpec& spde_model, const std::vector<ModelSpec>& sde_models,
                                      const Field& u0, const std::vector<double>& x0, double T, double dt,
                                      const SeedSpec& seed, const SimulationOptions& opts = {},
                                      const CoupledObserver& observer = {}) {
    require(sde_models.size() == x0.size(), "simulate_coupled: one initial value per SDE");
    if (spde_model.noise.driver() != NoiseKind::scalar)
        throw InvalidArgument("simulate_coupled: lattice model must be driven by the scalar Wiener process");
    for (const auto& m : sde_models) {
        m.validate();
        if (m.noise.driver() != NoiseKind::scalar || m.op != ModelSpec::Operator::none)
            throw InvalidArgument("simulate_coupled: SDE models must be scalar-driven with operator none");
    }
    require(spde_model.op != ModelSpec::Operator::p_laplacian || spde_model.p == 2.0,
            "simulate_coupled: explicit p-Laplacian is not supported in coupled runs");
    const std::size_t steps = step_count(T, dt);
    Stepper stepper(spde_model, u0.grid);
    GaussianStream stream(seed);

    CoupledResult res;
    res.steps = steps;
    res.driver_checksums.assign(sde_models.size() + 1, 0.0);
    std::vector<double> u = u0.values;
    std::vector<double> x = x0;
    double w = 0.0;

    auto record = [&](Trajectory& tr, std::span<const double> s, double t) {
        tr.times.push_back(t);
        tr.states.emplace_back(s.begin(), s.end());
        tr.wiener.push_back(w);
    };
    res.spde.seed = seed;
    record(res.spde, u, 0.0);
    res.sdes.resize(sde_models.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        res.sdes[j].seed = seed;
        record(res.sdes[j], std::span<const double>(&x[j], 1), 0.0);
    }
    if (observer) observer(0, 0.0, u, x);

    std::vector<bool> sde_done(x.size(), false);
    double xi[1];
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        xi[0] = draw_scalar(stream, dt);
        w += xi[0];

        if (!res.spde.overflow) {
            res.driver_checksums[0] += xi[0];
            const StepOutcome o = stepper.advance(u, xi, dt);
            if (o.clipped > 0) ++res.spde.clipped_steps;
            if (detail::escaped(o, opts.blowup_threshold)) {
                res.spde.overflow = true;
                res.spde.overflow_time = t;
            }
        }
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (sde_done[j]) continue;
            res.driver_checksums[j + 1] += xi[0];
            x[j] = sde_step(x[j], sde_models[j], xi[0], dt);
            if (!std::isfinite(x[j]) || std::abs(x[j]) > opts.blowup_threshold) {
                sde_done[j] = true;
                res.sdes[j].overflow = true;
                res.sdes[j].overflow_time = t;
            }
        }
        if (observer) observer(step, t, u, x);
        if (detail::is_save_step(step, steps, opts.save_stride)) {
            if (!res.spde.overflow) record(res.spde, u, t);
            for (std::size_t j = 0; j < x.size(); ++j)
                if (!sde_done[j]) record(res.sdes[j], std::span<const double>(&x[j], 1), t);
        }
    }
    return res;
}

/// v(t_n) = h * sum_i u(x_i, t_n) phi_1(x_i) along a lattice trajectory.
inline std::vector<double> project_phi1(const Trajectory& traj, const EigenPair& eig) {
    std::vector<double> v;
    v.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        require(s.size() == eig.phi1.size(), "project_phi1: trajectory is not on the eigenpair's grid");
        v.push_back(weighted_integral(eig.phi1.grid, s, eig.phi1.values));
    }
    return v;
}

}  // namespace spdestab
