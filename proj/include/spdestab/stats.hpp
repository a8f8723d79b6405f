#pragma once

// Ensemble estimators: mean-square norms with standard errors, log-linear decay
// fits, exceedance probabilities, and phi_1-projections.
//
// Reductions run in ascending path index with compensated summation, so results
// do not depend on how the ensemble was scheduled.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "spdestab/errors.hpp"
#include "spdestab/evolve.hpp"
#include "spdestab/lattice.hpp"

namespace spdestab {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanEstimate {
    double mean = 0.0;
    double std_error = std::numeric_limits<double>::quiet_NaN();  // undefined below two samples
    std::size_t count = 0;
};

inline MeanEstimate estimate_mean(std::span<const double> xs) {
    MeanEstimate e;
    e.count = xs.size();
    if (xs.empty()) {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    CompensatedSum s;
    for (double x : xs) s.add(x);
    e.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        CompensatedSum ss;
        for (double x : xs) ss.add((x - e.mean) * (x - e.mean));
        const double var = ss.value() / static_cast<double>(xs.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(xs.size()));
    }
    return e;
}

/// Per-time estimates of E g(u(t)) over the non-overflowed paths.
struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<double> min_value;
    std::vector<double> max_value;
    std::size_t path_count = 0;      // paths entering the estimates
    std::size_t excluded_paths = 0;  // overflowed paths, reported rather than averaged
    double blowup_fraction = 0.0;
};

using StateFunctional = std::function<double(std::span<const double>)>;

inline EnsembleStats functional_stats(const std::vector<Trajectory>& ensemble, const StateFunctional& g) {
    require(!ensemble.empty(), "ensemble statistics: empty ensemble");
    EnsembleStats st;
    std::vector<const Trajectory*> kept;
    for (const auto& tr : ensemble) {
        if (tr.overflow)
            ++st.excluded_paths;
        else
            kept.push_back(&tr);
    }
    st.path_count = kept.size();
    st.blowup_fraction = static_cast<double>(st.excluded_paths) / static_cast<double>(ensemble.size());
    if (kept.empty()) return st;

    st.times = kept.front()->times;
    for (const auto* tr : kept) {
        if (tr->times != st.times) throw InvalidArgument("ensemble statistics: trajectories have different time grids");
    }
    std::vector<double> values(kept.size());
    for (std::size_t k = 0; k < st.times.size(); ++k) {
        for (std::size_t j = 0; j < kept.size(); ++j) values[j] = g(kept[j]->states[k]);
        const auto e = estimate_mean(values);
        st.mean.push_back(e.mean);
        st.std_error.push_back(e.std_error);
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        st.min_value.push_back(*lo);
        st.max_value.push_back(*hi);
    }
    return st;
}

/// Sample mean and standard error of h * sum_i u(x_i, t)^2 per saved time.
inline EnsembleStats ms_norm(const std::vector<Trajectory>& ensemble, const Grid1D& grid) {
    for (const auto& tr : ensemble)
        for (const auto& s : tr.states)
            if (s.size() != grid.size()) throw InvalidArgument("ms_norm: trajectory state does not match the grid");
    return functional_stats(ensemble, [h = grid.spacing()](std::span<const double> u) {
        double s = 0.0;
        for (double v : u) s += v * v;
        return h * s;
    });
}

/// Scalar paths: E |X_t|^2.
inline EnsembleStats ms_norm(const std::vector<Trajectory>& ensemble) {
    return functional_stats(ensemble, [](std::span<const double> x) { return x[0] * x[0]; });
}

/// Scalar paths: E |X_t|^beta.
inline EnsembleStats abs_moment(const std::vector<Trajectory>& ensemble, double beta) {
    return functional_stats(ensemble, [beta](std::span<const double> x) { return std::pow(std::abs(x[0]), beta); });
}

/// Largest node-wise second moment max_i E u(x_i, t)^2, with the standard error at the maximising node.
struct NodewiseMoment {
    std::vector<double> times;
    std::vector<double> max_mean;
    std::vector<double> std_error;
    std::vector<std::size_t> argmax;
};

inline NodewiseMoment max_node_second_moment(const std::vector<Trajectory>& ensemble) {
    NodewiseMoment out;
    std::vector<const Trajectory*> kept;
    for (const auto& tr : ensemble)
        if (!tr.overflow) kept.push_back(&tr);
    require(!kept.empty(), "max_node_second_moment: no surviving paths");
    out.times = kept.front()->times;
    const std::size_t n = kept.front()->states.front().size();
    std::vector<double> values(kept.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        double best = -1.0, best_se = 0.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < kept.size(); ++j) values[j] = kept[j]->states[k][i] * kept[j]->states[k][i];
            const auto e = estimate_mean(values);
            if (e.mean > best) {
                best = e.mean;
                best_se = e.std_error;
                best_i = i;
            }
        }
        out.max_mean.push_back(best);
        out.std_error.push_back(best_se);
        out.argmax.push_back(best_i);
    }
    return out;
}

/// Least-squares line through (t, log y) on [t_lo, t_hi]; `rate` is the slope.
struct DecayFit {
    double rate = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;  // 0 by convention when the series is constant
    double t_lo = 0.0;
    double t_hi = 0.0;
    double rate_std_error = 0.0;  // from fit residuals
    std::size_t points = 0;
};

struct FitWindow {
    double t_lo;
    double t_hi;
};

inline FitWindow default_fit_window(const std::vector<double>& times) {
    require(!times.empty(), "fit window: empty time grid");
    return {0.2 * times.back(), times.back()};
}

inline DecayFit fit_decay(std::span<const double> times, std::span<const double> values, FitWindow w) {
    require(times.size() == values.size(), "fit_decay: times and values differ in length");
    require(!times.empty() && w.t_lo >= times.front() - 1e-12 && w.t_hi <= times.back() + 1e-12 && w.t_lo < w.t_hi,
            "fit_decay: window must lie inside the time range");
    const double tol = 1e-12 * std::max(1.0, std::abs(w.t_hi));
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < w.t_lo - tol || times[i] > w.t_hi + tol) continue;
        if (!(values[i] > 0.0)) throw FitUndefined("fit_decay: non-positive value in the fit window");
        ts.push_back(times[i]);
        ys.push_back(std::log(values[i]));
    }
    require(ts.size() >= 2, "fit_decay: need at least two points in the window");

    const double n = static_cast<double>(ts.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tm += ts[i];
        ym += ys[i];
    }
    tm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - tm) * (ts[i] - tm);
        sxy += (ts[i] - tm) * (ys[i] - ym);
        syy += (ys[i] - ym) * (ys[i] - ym);
    }
    DecayFit f;
    f.points = ts.size();
    f.t_lo = w.t_lo;
    f.t_hi = w.t_hi;
    f.rate = sxy / sxx;
    f.intercept = ym - f.rate * tm;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (f.intercept + f.rate * ts[i]);
        ss_res += r * r;
    }
    f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;
    f.rate_std_error = ts.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return f;
}

inline DecayFit fit_decay(const EnsembleStats& st, FitWindow w) { return fit_decay(st.times, st.mean, w); }
inline DecayFit fit_decay(const EnsembleStats& st) { return fit_decay(st, default_fit_window(st.times)); }

/// Estimate of P{ sup_{t <= T} ||u(t)|| <= eps1 } over the saved times.
struct ExceedanceEstimate {
    double epsilon1 = 0.0;
    double probability = 0.0;
    double std_error = 0.0;
    double horizon = 0.0;
    std::size_t paths = 0;
};

inline ExceedanceEstimate binomial_estimate(std::size_t hits, std::size_t total) {
    ExceedanceEstimate e;
    e.paths = total;
    require(total > 0, "binomial estimate: no paths");
    e.probability = static_cast<double>(hits) / static_cast<double>(total);
    e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(total));
    return e;
}

/// Overflowed paths count as leaving every ball.
inline ExceedanceEstimate exceedance(const std::vector<Trajectory>& ensemble, const Grid1D& grid, double epsilon1) {
    require(!ensemble.empty(), "exceedance: empty ensemble");
    std::size_t inside = 0;
    double horizon = 0.0;
    for (const auto& tr : ensemble) {
        if (!tr.times.empty()) horizon = std::max(horizon, tr.overflow ? tr.overflow_time : tr.times.back());
        if (tr.overflow) continue;
        double running = 0.0;
        for (const auto& s : tr.states) running = std::max(running, std::sqrt(l2_norm_sq(grid, s)));
        if (running <= epsilon1) ++inside;
    }
    auto e = binomial_estimate(inside, ensemble.size());
    e.epsilon1 = epsilon1;
    e.horizon = horizon;
    return e;
}

/// Fraction of paths with h * sum_i u(x_i, t_k) <= bound at saved index k.
inline ExceedanceEstimate integral_bound_fraction(const std::vector<Trajectory>& ensemble, const Grid1D& grid,
                                                  std::size_t time_index, double bound) {
    require(!ensemble.empty(), "integral_bound_fraction: empty ensemble");
    std::size_t hits = 0;
    double t = 0.0;
    for (const auto& tr : ensemble) {
        if (tr.overflow || time_index >= tr.states.size()) continue;
        t = tr.times[time_index];
        if (integral(grid, tr.states[time_index]) <= bound) ++hits;
    }
    auto e = binomial_estimate(hits, ensemble.size());
    e.epsilon1 = bound;
    e.horizon = t;
    return e;
}

/// Mean/stderr per time of (u, phi_1) and of the plain integral of u.
struct ProjectionStats {
    std::vector<double> times;
    std::vector<double> phi_mean, phi_std_error;
    std::vector<double> plain_mean, plain_std_error;
};

inline ProjectionStats projection_series(const std::vector<Trajectory>& ensemble, const EigenPair& eig) {
    const Grid1D& grid = eig.phi1.grid;
    const auto phi = functional_stats(ensemble, [&](std::span<const double> u) {
        return weighted_integral(grid, u, eig.phi1.values);
    });
    const auto plain = functional_stats(ensemble, [&](std::span<const double> u) { return integral(grid, u); });
    return {phi.times, phi.mean, phi.std_error, plain.mean, plain.std_error};
}

}  // namespace spdestab
