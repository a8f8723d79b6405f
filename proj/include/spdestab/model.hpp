#pragma once

// Drift and noise laws of the reaction-diffusion models and scalar SDEs.

#include <cmath>
#include <string>

#include "spdestab/errors.hpp"
#include "spdestab/noise.hpp"

namespace spdestab {

/// u^r for the model nonlinearities. With `clip` the argument is max(u, 0);
/// otherwise the odd extension sign(u)|u|^r is used.
inline double model_pow(double u, double r, bool clip) {
    if (clip) return u > 0.0 ? std::pow(u, r) : 0.0;
    if (r == 1.0) return u;
    const double m = std::pow(std::abs(u), r);
    return u < 0.0 ? -m : m;
}

struct ReactionSpec {
    enum class Form {
        zero,        // 0
        linear,      // K u
        logistic,    // a u - k u^r
        power_pair,  // a u + b u^{2m-1}
        sde_drift,   // u (c1 + c2 u^{m0-1}) + k1 u^{m-1} u
    };

    Form form = Form::zero;
    double a = 0.0, b = 0.0, k = 0.0, K = 0.0, r = 1.0, m = 1.0, m0 = 1.0;
    double k1 = 0.0, c1 = 0.0, c2 = 0.0;

    static ReactionSpec none() { return {}; }
    static ReactionSpec linear(double K) {
        ReactionSpec s;
        s.form = Form::linear;
        s.K = K;
        return s;
    }
    static ReactionSpec logistic(double a, double k, double r) {
        ReactionSpec s;
        s.form = Form::logistic;
        s.a = a;
        s.k = k;
        s.r = r;
        return s;
    }
    static ReactionSpec power_pair(double a, double b, double m) {
        ReactionSpec s;
        s.form = Form::power_pair;
        s.a = a;
        s.b = b;
        s.m = m;
        return s;
    }
    static ReactionSpec sde_drift(double c1, double c2, double m0, double k1, double m) {
        ReactionSpec s;
        s.form = Form::sde_drift;
        s.c1 = c1;
        s.c2 = c2;
        s.m0 = m0;
        s.k1 = k1;
        s.m = m;
        return s;
    }

    void validate() const {
        switch (form) {
            case Form::logistic:
                require(r >= 1.0, "logistic reaction: exponent r must be >= 1");
                break;
            case Form::power_pair:
                require(m >= 1.0, "power_pair reaction: exponent m must be >= 1");
                break;
            case Form::sde_drift:
                require(m0 > 1.0 && m0 < m, "sde_drift reaction: need 1 < m0 < m");
                break;
            default:
                break;
        }
    }

    double operator()(double u, bool clip) const {
        switch (form) {
            case Form::zero:
                return 0.0;
            case Form::linear:
                return K * u;
            case Form::logistic:
                return a * u - k * model_pow(u, r, clip);
            case Form::power_pair:
                return a * u + b * model_pow(u, 2.0 * m - 1.0, clip);
            case Form::sde_drift:
                return c1 * u + c2 * model_pow(u, m0, clip) + k1 * model_pow(u, m, clip);
        }
        return 0.0;
    }
};

struct NoiseLawSpec {
    enum class Form {
        none,                  // no noise
        additive,              // sigma dW_t
        multiplicative,        // sigma u dW_t
        field_power,           // k2 u^m dW_t(x), covariance q
        white_multiplicative,  // gamma u dW(x, t)
        sde_power,             // k2 u^{(m+1)/2} phi(u) dW_t
    };
    enum class Phi { constant, power };  // phi = c_phi, or phi(u) = u^{alpha/2}

    Form form = Form::none;
    double sigma = 0.0, k2 = 0.0, gamma = 0.0, m = 1.0, alpha = 0.0, c_phi = 1.0;
    Phi phi = Phi::constant;
    CovarianceSpec covariance{};

    static NoiseLawSpec none() { return {}; }
    static NoiseLawSpec additive(double sigma) {
        NoiseLawSpec s;
        s.form = Form::additive;
        s.sigma = sigma;
        return s;
    }
    static NoiseLawSpec multiplicative(double sigma) {
        NoiseLawSpec s;
        s.form = Form::multiplicative;
        s.sigma = sigma;
        return s;
    }
    static NoiseLawSpec field_power(double k2, double m, CovarianceSpec cov) {
        NoiseLawSpec s;
        s.form = Form::field_power;
        s.k2 = k2;
        s.m = m;
        s.covariance = cov;
        return s;
    }
    static NoiseLawSpec white_multiplicative(double gamma) {
        NoiseLawSpec s;
        s.form = Form::white_multiplicative;
        s.gamma = gamma;
        return s;
    }
    static NoiseLawSpec sde_power_const(double k2, double m, double c_phi) {
        NoiseLawSpec s;
        s.form = Form::sde_power;
        s.k2 = k2;
        s.m = m;
        s.phi = Phi::constant;
        s.c_phi = c_phi;
        return s;
    }
    static NoiseLawSpec sde_power_pow(double k2, double m, double alpha) {
        NoiseLawSpec s;
        s.form = Form::sde_power;
        s.k2 = k2;
        s.m = m;
        s.phi = Phi::power;
        s.alpha = alpha;
        return s;
    }

    /// Which driver the law consumes; `none` draws scalar increments with zero weight.
    NoiseKind driver() const {
        if (form == Form::field_power) return NoiseKind::field;
        if (form == Form::white_multiplicative) return NoiseKind::white;
        return NoiseKind::scalar;
    }

    void validate() const {
        require(sigma >= 0.0 && k2 >= 0.0 && alpha >= 0.0, "noise law: sigma, k2, alpha must be >= 0");
        if (form == Form::field_power) covariance.validate();
    }

    /// Diffusion coefficient sigma(u).
    double operator()(double u, bool clip) const {
        switch (form) {
            case Form::none:
                return 0.0;
            case Form::additive:
                return sigma;
            case Form::multiplicative:
                return sigma * u;
            case Form::field_power:
                return k2 * model_pow(u, m, clip);
            case Form::white_multiplicative:
                return gamma * u;
            case Form::sde_power: {
                const double ph = phi == Phi::constant ? c_phi : model_pow(u, alpha / 2.0, clip);
                return k2 * model_pow(u, (m + 1.0) / 2.0, clip) * ph;
            }
        }
        return 0.0;
    }
};

struct ModelSpec {
    enum class Operator { none, laplacian, p_laplacian };

    Operator op = Operator::laplacian;
    double mu = 1.0;  // diffusion coefficient of the Laplacian
    double p = 2.0;   // exponent of the p-Laplacian
    ReactionSpec reaction{};
    NoiseLawSpec noise{};
    bool positivity_clip = false;

    void validate() const {
        reaction.validate();
        noise.validate();
        if (op == Operator::laplacian) require(mu > 0.0 && std::isfinite(mu), "model: mu must be positive");
        if (op == Operator::p_laplacian) require(p >= 2.0, "model: p-Laplacian needs p >= 2");
        const auto d = noise.driver();
        if (d == NoiseKind::field || d == NoiseKind::white)
            require(op != Operator::none, "model: field and white noise need a spatial operator");
        if (noise.form == NoiseLawSpec::Form::sde_power)
            require(op == Operator::none, "model: sde_power noise is only defined for the scalar SDE");
    }
};

}  // namespace spdestab
