#pragma once

// Forward-Euler integration of the edge-weight flows:
//
//   open loop     d mu/dt   = -kappa * mu
//   closed loop   d mu/dt   = (-kappa + psi) * mu,   psi = -beta^2 (mu - mu*)
//   estimator     d muh*/dt = (dhat - |lambda| * gamma) * muh*
//                 dhat = mu - muh*,  gamma = muh* - lambda
//
// and the error functionals monitored as Lyapunov candidates. After every
// step mu is floor-clamped and renormalised; the estimator is clamped to
// [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ricci/curvature.hpp"
#include "ricci/entropy.hpp"
#include "ricci/errors.hpp"
#include "ricci/graph.hpp"

namespace ricci {

using EdgeField = std::vector<double>;

enum class SignConvention {
  proof,       // psi = -beta^2 * delta (the sign the descent argument uses)
  as_printed,  // psi = +beta^2 * delta
};

inline constexpr double kMinGain = 2.0;

struct ControlConfig {
  double beta_sq = 2.0;
  double dt = 0.01;
  Normalization normalization = Normalization::global;
  SignConvention sign_convention = SignConvention::proof;
  std::size_t curvature_refresh = 1;  // recompute kappa every k steps
  EntropyWeighting entropy_weighting = EntropyWeighting::stationary;
  // Diagnostics only: lets tests probe gains below the stability bound.
  bool enforce_gain_bound = true;

  void validate() const {
    if (!std::isfinite(beta_sq)) throw GainError("beta^2 must be finite");
    if (enforce_gain_bound && beta_sq < kMinGain) throw GainError("beta^2 must be >= 2");
    if (!std::isfinite(dt) || dt < 0.0) throw ParameterError("dt must be finite and nonnegative");
    if (curvature_refresh == 0) throw ParameterError("curvature refresh interval must be >= 1");
  }
};

struct FlowState {
  EdgeField mu;
  std::optional<EdgeField> mu_star;
  std::optional<EdgeField> mu_star_hat;
  EdgeField lambda;
  double t = 0.0;
  std::size_t iteration = 0;

  friend bool operator==(const FlowState&, const FlowState&) = default;
};

struct ErrorReport {
  std::optional<EdgeField> delta;  // mu - mu*
  std::optional<double> sigma_total;
  std::optional<EdgeField> delta_hat;  // Type I: mu - muh*
  std::optional<EdgeField> gamma;      // Type II: muh* - lambda
  std::optional<double> sigma_hat_total;
  std::optional<double> gamma_total;
  std::optional<double> v_total;
};

// mu_0 = normalised graph weights, muh*_0 = mu_0, lambda_0 = 0.
inline FlowState initial_state(const WeightedGraph& g, const ControlConfig& cfg,
                               std::optional<EdgeField> target = std::nullopt) {
  FlowState s;
  s.mu = normalized_weights(g.weights(), g.weight_floor(), cfg.normalization);
  if (target) {
    if (target->size() != g.edge_count()) throw ParameterError("target field size differs from edge count");
    s.mu_star = std::move(target);
  }
  s.mu_star_hat = s.mu;
  s.lambda.assign(g.edge_count(), 0.0);
  return s;
}

inline double weight_floor_for(std::size_t edge_count) {
  return edge_count == 0 ? 0.0 : 1e-6 / static_cast<double>(edge_count);
}

namespace detail {

inline void require_field(const FlowState& s, const CurvatureField& f) {
  if (f.values.size() != s.mu.size()) throw ParameterError("curvature field does not match the state");
}

inline EdgeField settle_weights(EdgeField mu, Normalization mode) {
  const double floor = weight_floor_for(mu.size());
  for (double& w : mu) w = std::max(w, floor);
  return normalized_weights(mu, floor, mode);
}

inline FlowState advance_clock(FlowState s, const ControlConfig& cfg) {
  ++s.iteration;
  s.t = static_cast<double>(s.iteration) * cfg.dt;
  return s;
}

}  // namespace detail

inline FlowState open_loop_step(const FlowState& state, const CurvatureField& field, const ControlConfig& cfg) {
  cfg.validate();
  detail::require_field(state, field);
  FlowState next = state;
  for (std::size_t e = 0; e < next.mu.size(); ++e)
    next.mu[e] = state.mu[e] + cfg.dt * (-field.values[e] * state.mu[e]);
  next.mu = detail::settle_weights(std::move(next.mu), cfg.normalization);
  return detail::advance_clock(std::move(next), cfg);
}

inline EdgeField control_law(std::span<const double> delta, const ControlConfig& cfg) {
  if (cfg.enforce_gain_bound && !(cfg.beta_sq >= kMinGain)) throw GainError("beta^2 must be >= 2");
  const double sign = cfg.sign_convention == SignConvention::proof ? -1.0 : 1.0;
  EdgeField psi(delta.size());
  for (std::size_t e = 0; e < delta.size(); ++e) psi[e] = sign * cfg.beta_sq * delta[e];
  return psi;
}

namespace detail {

inline EdgeField closed_loop_weights(const FlowState& state, std::span<const double> target,
                                     const CurvatureField& field, const ControlConfig& cfg) {
  const std::size_t m = state.mu.size();
  EdgeField delta(m);
  for (std::size_t e = 0; e < m; ++e) delta[e] = state.mu[e] - target[e];
  EdgeField psi = control_law(delta, cfg);
  EdgeField mu(m);
  for (std::size_t e = 0; e < m; ++e)
    mu[e] = state.mu[e] + cfg.dt * (-field.values[e] + psi[e]) * state.mu[e];
  return settle_weights(std::move(mu), cfg.normalization);
}

inline EdgeField estimator_weights(const FlowState& state, const ControlConfig& cfg) {
  const EdgeField& hat = *state.mu_star_hat;
  EdgeField out(hat.size());
  for (std::size_t e = 0; e < hat.size(); ++e) {
    const double delta_hat = state.mu[e] - hat[e];
    const double gamma = hat[e] - state.lambda[e];
    const double phi = -std::abs(state.lambda[e]) * gamma;
    out[e] = std::clamp(hat[e] + cfg.dt * (delta_hat + phi) * hat[e], 0.0, 1.0);
  }
  return out;
}

}  // namespace detail

inline FlowState closed_loop_step(const FlowState& state, const CurvatureField& field, const ControlConfig& cfg) {
  cfg.validate();
  detail::require_field(state, field);
  if (!state.mu_star) throw TargetMissingError("closed-loop step needs a target field");
  FlowState next = state;
  next.mu = detail::closed_loop_weights(state, *state.mu_star, field, cfg);
  return detail::advance_clock(std::move(next), cfg);
}

inline FlowState estimator_step(const FlowState& state, const ControlConfig& cfg) {
  cfg.validate();
  if (!state.mu_star_hat) throw EstimatorMissingError("estimator step needs an estimator field");
  FlowState next = state;
  next.mu_star_hat = detail::estimator_weights(state, cfg);
  return detail::advance_clock(std::move(next), cfg);
}

// One step of the closed loop (target := estimator) and the estimator,
// both evaluated on the same pre-step state.
inline FlowState coupled_step(const FlowState& state, const CurvatureField& field, const ControlConfig& cfg) {
  cfg.validate();
  detail::require_field(state, field);
  if (!state.mu_star_hat) throw EstimatorMissingError("coupled step needs an estimator field");
  if (state.lambda.size() != state.mu.size()) throw ParameterError("input field does not match the state");
  FlowState next = state;
  next.mu = detail::closed_loop_weights(state, *state.mu_star_hat, field, cfg);
  next.mu_star_hat = detail::estimator_weights(state, cfg);
  return detail::advance_clock(std::move(next), cfg);
}

inline ErrorReport error_report(const FlowState& s) {
  ErrorReport r;
  const std::size_t m = s.mu.size();
  if (s.mu_star) {
    EdgeField d(m);
    double sum = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      d[e] = s.mu[e] - (*s.mu_star)[e];
      sum += d[e] * d[e];
    }
    r.delta = std::move(d);
    r.sigma_total = 0.5 * sum;
  }
  if (s.mu_star_hat) {
    const EdgeField& hat = *s.mu_star_hat;
    EdgeField dh(m), g(m);
    double sh = 0.0, gt = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      const double lam = e < s.lambda.size() ? s.lambda[e] : 0.0;
      dh[e] = s.mu[e] - hat[e];
      g[e] = hat[e] - lam;
      sh += dh[e] * dh[e];
      gt += std::abs(lam) * g[e] * g[e];
    }
    r.delta_hat = std::move(dh);
    r.gamma = std::move(g);
    r.sigma_hat_total = 0.5 * sh;
    r.gamma_total = 0.5 * gt;
    r.v_total = *r.sigma_hat_total + *r.gamma_total;
  }
  return r;
}

}  // namespace ricci
