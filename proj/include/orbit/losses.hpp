#pragma once

// Surrogate losses and their online update rules for linear structured
// decoders. Every update returns (1 - eta*lambda) w plus a rule-specific step;
// the orbit and perceptron steps use the normalized feature difference while
// hinge, ramp and direct loss use raw feature differences.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>

#include "orbit/core.hpp"
#include "orbit/rng.hpp"

namespace orbit {

enum class RuleKind { Orbit, OrbitSimplified, Perceptron, Hinge, Ramp, Probit, Direct };

std::string_view to_string(RuleKind kind);
RuleKind rule_kind_from_string(std::string_view name);

struct UpdateRule {
  RuleKind kind = RuleKind::Orbit;
  double direct_epsilon = 0.0;  // may be negative; must be nonzero for Direct
  int probit_samples = 100;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool needs_cost_augmented_decode() const {
    return kind == RuleKind::Hinge || kind == RuleKind::Ramp || kind == RuleKind::Direct;
  }
};

struct StepContext {
  double eta = 1.0;
  double lambda = 0.0;

  void validate() const;
};

/// Monte-Carlo estimate with its standard error (sample std / sqrt(n)).
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// P[eps > m] for eps ~ N(0, 1).
double gaussian_upper_tail(double m);

/// Result of one online step: the new weights and, when the rule defines one,
/// the surrogate loss at the pre-update weights.
struct StepOutcome {
  Vector weights;
  std::optional<double> surrogate;
};

namespace detail {

/// (1 - eta*lambda) w + (eta * factor) * direction. Shared by every rule so
/// that rules with identical factors produce bit-identical iterates.
inline Vector decayed_step(const Vector& w, const StepContext& ctx, double factor,
                           const Vector& direction) {
  Vector next = (1.0 - ctx.eta * ctx.lambda) * w;
  if (factor != 0.0) next += (ctx.eta * factor) * direction;
  return next;
}

template <StructuredTask T>
[[noreturn]] void unsupported(std::string_view rule) {
  throw Error(ErrorCode::UnsupportedTask,
              std::string(rule) + " needs cost-augmented decoding, which this task lacks");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Orbit

/// Q(w . dphi(y, yhat_w)) * cost(y, yhat_w).
template <StructuredTask T>
double orbit_loss_value(const T& task, const Vector& w, const typename T::Input& x,
                        const typename T::Label& y) {
  const auto yhat = task.decode(w, x);
  if (yhat == y) return 0.0;
  const double margin = w.dot(delta_phi_hat(task, x, y, yhat));
  return gaussian_upper_tail(margin) * task.cost(y, yhat);
}

/// Gradient of the orbit loss with the prediction `yhat` held fixed:
/// -(1/sqrt(2 pi)) exp(-m^2/2) cost dphi, m = w . dphi(y, yhat).
template <StructuredTask T>
Vector orbit_gradient(const T& task, const Vector& w, const typename T::Input& x,
                      const typename T::Label& y, const typename T::Label& yhat) {
  const Vector dphi = delta_phi_hat(task, x, y, yhat);
  const double m = w.dot(dphi);
  const double density = std::exp(-0.5 * m * m) / std::sqrt(2.0 * std::numbers::pi);
  return -density * task.cost(y, yhat) * dphi;
}

template <StructuredTask T>
StepOutcome orbit_step(const T& task, const Vector& w, const typename T::Input& x,
                       const typename T::Label& y, const StepContext& ctx, bool simplified) {
  const auto yhat = task.decode(w, x);
  if (yhat == y) return {detail::decayed_step(w, ctx, 0.0, w), 0.0};
  const double cost = task.cost(y, yhat);
  const Vector dphi = delta_phi_hat(task, x, y, yhat);
  const double margin = w.dot(dphi);
  const double factor = simplified ? cost : std::exp(-0.5 * margin * margin) * cost;
  return {detail::decayed_step(w, ctx, factor, dphi), gaussian_upper_tail(margin) * cost};
}

template <StructuredTask T>
Vector orbit_update(const T& task, const Vector& w, const typename T::Input& x,
                    const typename T::Label& y, const StepContext& ctx) {
  return orbit_step(task, w, x, y, ctx, false).weights;
}

/// Orbit update with the exponential damping factor replaced by 1.
template <StructuredTask T>
Vector orbit_update_simplified(const T& task, const Vector& w, const typename T::Input& x,
                               const typename T::Label& y, const StepContext& ctx) {
  return orbit_step(task, w, x, y, ctx, true).weights;
}

// ---------------------------------------------------------------------------
// Perceptron

template <StructuredTask T>
StepOutcome perceptron_step(const T& task, const Vector& w, const typename T::Input& x,
                            const typename T::Label& y, const StepContext& ctx) {
  const auto yhat = task.decode(w, x);
  if (yhat == y) return {detail::decayed_step(w, ctx, 0.0, w), 0.0};
  const Vector dphi = delta_phi_hat(task, x, y, yhat);
  const double violation = w.dot(task.phi(x, yhat)) - w.dot(task.phi(x, y));
  return {detail::decayed_step(w, ctx, 1.0, dphi), violation};
}

template <StructuredTask T>
Vector perceptron_update(const T& task, const Vector& w, const typename T::Input& x,
                         const typename T::Label& y, const StepContext& ctx) {
  return perceptron_step(task, w, x, y, ctx).weights;
}

// ---------------------------------------------------------------------------
// Structural hinge

/// max_y' [cost(y, y') + w . phi(x, y')] - w . phi(x, y).
template <StructuredTask T>
double hinge_loss_value(const T& task, const Vector& w, const typename T::Input& x,
                        const typename T::Label& y) {
  if constexpr (CostAugmentedTask<T>) {
    const auto yaug = task.cost_augmented_decode(w, x, y, 1.0);
    return task.cost(y, yaug) + w.dot(task.phi(x, yaug)) - w.dot(task.phi(x, y));
  } else {
    detail::unsupported<T>("hinge");
  }
}

template <StructuredTask T>
StepOutcome hinge_step(const T& task, const Vector& w, const typename T::Input& x,
                       const typename T::Label& y, const StepContext& ctx) {
  if constexpr (CostAugmentedTask<T>) {
    const auto yaug = task.cost_augmented_decode(w, x, y, 1.0);
    if (yaug == y) return {detail::decayed_step(w, ctx, 0.0, w), 0.0};
    const Vector phi_y = task.phi(x, y);
    const Vector phi_aug = task.phi(x, yaug);
    const double value = task.cost(y, yaug) + w.dot(phi_aug) - w.dot(phi_y);
    return {detail::decayed_step(w, ctx, 1.0, phi_y - phi_aug), value};
  } else {
    detail::unsupported<T>("hinge");
  }
}

template <StructuredTask T>
Vector hinge_update(const T& task, const Vector& w, const typename T::Input& x,
                    const typename T::Label& y, const StepContext& ctx) {
  return hinge_step(task, w, x, y, ctx).weights;
}

// ---------------------------------------------------------------------------
// Structured ramp: max_y' [w . phi + cost] - max_y' w . phi

template <StructuredTask T>
double ramp_loss_value(const T& task, const Vector& w, const typename T::Input& x,
                       const typename T::Label& y) {
  if constexpr (CostAugmentedTask<T>) {
    const auto yhat = task.decode(w, x);
    const auto yaug = task.cost_augmented_decode(w, x, y, 1.0);
    return w.dot(task.phi(x, yaug)) + task.cost(y, yaug) - w.dot(task.phi(x, yhat));
  } else {
    detail::unsupported<T>("ramp");
  }
}

template <StructuredTask T>
StepOutcome ramp_step(const T& task, const Vector& w, const typename T::Input& x,
                      const typename T::Label& y, const StepContext& ctx) {
  if constexpr (CostAugmentedTask<T>) {
    const auto yhat = task.decode(w, x);
    const auto yaug = task.cost_augmented_decode(w, x, y, 1.0);
    const Vector phi_hat = task.phi(x, yhat);
    const Vector phi_aug = task.phi(x, yaug);
    const double value = w.dot(phi_aug) + task.cost(y, yaug) - w.dot(phi_hat);
    if (yhat == yaug) return {detail::decayed_step(w, ctx, 0.0, w), value};
    return {detail::decayed_step(w, ctx, 1.0, phi_hat - phi_aug), value};
  } else {
    detail::unsupported<T>("ramp");
  }
}

template <StructuredTask T>
Vector ramp_update(const T& task, const Vector& w, const typename T::Input& x,
                   const typename T::Label& y, const StepContext& ctx) {
  return ramp_step(task, w, x, y, ctx).weights;
}

// ---------------------------------------------------------------------------
// Structured probit

/// Perturbation i of a probit estimate is drawn from its own stream
/// derive_seed(seed, {i}), so estimates are reproducible and order-free.
inline Vector probit_perturbation(std::uint64_t seed, std::size_t i, Eigen::Index dim) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
  return standard_normal_vector(rng, dim);
}

inline McEstimate summarize_samples(double sum, double sum_sq, std::size_t n) {
  McEstimate est;
  est.n = n;
  est.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(n) * est.mean * est.mean) / static_cast<double>(n - 1));
    est.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return est;
}

/// Monte-Carlo estimate of E_eps[cost(y, decode(w + eps, x))], eps ~ N(0, I).
template <StructuredTask T>
McEstimate probit_loss_estimate(const T& task, const Vector& w, const typename T::Input& x,
                                const typename T::Label& y, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "probit estimate needs at least one sample");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector perturbed = w + probit_perturbation(seed, i, w.size());
    const double c = task.cost(y, task.decode(perturbed, x));
    sum += c;
    sum_sq += c * c;
  }
  return summarize_samples(sum, sum_sq, n);
}

/// Score-function (Stein) estimate of the probit gradient,
/// (1/n) sum_i cost(y, decode(w + eps_i, x)) eps_i.
template <StructuredTask T>
Vector probit_gradient_estimate(const T& task, const Vector& w, const typename T::Input& x,
                                const typename T::Label& y, std::size_t n, std::uint64_t seed,
                                McEstimate* loss = nullptr) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "probit estimate needs at least one sample");
  Vector grad = Vector::Zero(w.size());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector eps = probit_perturbation(seed, i, w.size());
    const double c = task.cost(y, task.decode(w + eps, x));
    sum += c;
    sum_sq += c * c;
    if (c != 0.0) grad += c * eps;
  }
  grad /= static_cast<double>(n);
  if (loss != nullptr) *loss = summarize_samples(sum, sum_sq, n);
  return grad;
}

template <StructuredTask T>
StepOutcome probit_step(const T& task, const Vector& w, const typename T::Input& x,
                        const typename T::Label& y, const StepContext& ctx,
                        const UpdateRule& rule) {
  if (rule.probit_samples < 1) {
    throw Error(ErrorCode::InvalidConfig, "probit_samples must be >= 1");
  }
  McEstimate loss;
  const Vector grad = probit_gradient_estimate(task, w, x, y,
                                               static_cast<std::size_t>(rule.probit_samples),
                                               rule.rng_seed, &loss);
  return {detail::decayed_step(w, ctx, -1.0, grad), loss.mean};
}

template <StructuredTask T>
Vector probit_update(const T& task, const Vector& w, const typename T::Input& x,
                     const typename T::Label& y, const StepContext& ctx, const UpdateRule& rule) {
  return probit_step(task, w, x, y, ctx, rule).weights;
}

// ---------------------------------------------------------------------------
// Direct loss minimization

/// (1 - eta*lambda) w + (eta/eps) [phi(x, yhat_w) - phi(x, y_direct)] with
/// y_direct = argmax_y' [w . phi(x, y') + eps * cost(y, y')]. The same formula
/// is used for either sign of eps.
template <StructuredTask T>
StepOutcome direct_step(const T& task, const Vector& w, const typename T::Input& x,
                        const typename T::Label& y, const StepContext& ctx,
                        const UpdateRule& rule) {
  if constexpr (CostAugmentedTask<T>) {
    const double eps = rule.direct_epsilon;
    if (eps == 0.0) throw Error(ErrorCode::ZeroEpsilon, "direct loss needs a nonzero epsilon");
    const auto yhat = task.decode(w, x);
    const auto ydirect = task.cost_augmented_decode(w, x, y, eps);
    if (yhat == ydirect) return {detail::decayed_step(w, ctx, 0.0, w), std::nullopt};
    return {detail::decayed_step(w, ctx, 1.0 / eps, task.phi(x, yhat) - task.phi(x, ydirect)),
            std::nullopt};
  } else {
    detail::unsupported<T>("direct loss");
  }
}

template <StructuredTask T>
Vector direct_loss_update(const T& task, const Vector& w, const typename T::Input& x,
                          const typename T::Label& y, const StepContext& ctx,
                          const UpdateRule& rule) {
  return direct_step(task, w, x, y, ctx, rule).weights;
}

// ---------------------------------------------------------------------------

/// Dispatches one online step for `rule`.
template <StructuredTask T>
StepOutcome apply_rule(const UpdateRule& rule, const T& task, const Vector& w,
                       const typename T::Input& x, const typename T::Label& y,
                       const StepContext& ctx) {
  switch (rule.kind) {
    case RuleKind::Orbit: return orbit_step(task, w, x, y, ctx, false);
    case RuleKind::OrbitSimplified: return orbit_step(task, w, x, y, ctx, true);
    case RuleKind::Perceptron: return perceptron_step(task, w, x, y, ctx);
    case RuleKind::Hinge: return hinge_step(task, w, x, y, ctx);
    case RuleKind::Ramp: return ramp_step(task, w, x, y, ctx);
    case RuleKind::Probit: return probit_step(task, w, x, y, ctx, rule);
    case RuleKind::Direct: return direct_step(task, w, x, y, ctx, rule);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown update rule");
}

}  // namespace orbit
