#pragma once

// Numerical checks of the orbit-loss analysis: gradient checks, the margin
// condition, the probit-vs-orbit bound with its two-term decomposition, the
// generalization-bound right-hand side, and the large-norm limit of the
// orbit loss. Monte-Carlo estimators report (mean, std_error, n) and are
// deterministic for a fixed seed.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbit/core.hpp"
#include "orbit/losses.hpp"
#include "orbit/rng.hpp"

namespace orbit {

enum class Verdict { Pass, Fail, Skipped };

std::string_view to_string(Verdict v);

/// One line of a verification report.
struct CheckRecord {
  std::string check;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json stderr_values = nlohmann::json::object();
  Verdict verdict = Verdict::Pass;

  /// {check, params, estimates, stderr, verdict}.
  nlohmann::json to_json() const;
};

/// Central differences (f(w + h e_i) - f(w - h e_i)) / 2h.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                            double h);

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(const Vector& a, const Vector& b);

struct BoundCheckConfig {
  double sigma = 0.1;
  double gamma = 1.0;
  double delta = 0.05;
  int m = 100;
  double margin_eta = 0.5;
  int mc_samples = 20000;
  std::uint64_t seed = 0;
  double stderr_allowance = 3.0;

  /// sigma sqrt(2 ln(m / sigma)), or 0 when m <= sigma.
  double required_margin_eta() const;
  void validate() const;
  nlohmann::json to_json() const;
};

/// min over y' != yhat_w of w . dphi(yhat_w, y'); +infinity for a one-label
/// space. Non-negative by decode optimality.
template <StructuredTask T>
double margin_condition_margin(const T& task, const Vector& w, const typename T::Input& x) {
  if constexpr (EnumerableTask<T>) {
    const auto yhat = task.decode(w, x);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& yp : task.enumerate_labels(x)) {
      if (yp == yhat) continue;
      m = std::min(m, w.dot(delta_phi_hat(task, x, yhat, yp)));
    }
    return m;
  } else {
    throw Error(ErrorCode::UnsupportedTask, "margin condition needs an enumerable label space");
  }
}

/// Exhaustive argmax of w . phi(x, y) in enumeration order (first maximizer
/// wins). Throws TOO_LARGE above 10^6 labels.
template <StructuredTask T>
typename T::Label brute_force_decode(const T& task, const Vector& w, const typename T::Input& x) {
  if constexpr (EnumerableTask<T>) {
    constexpr std::size_t kMaxLabels = 1'000'000;
    if (task.label_count(x) > kMaxLabels) {
      throw Error(ErrorCode::TooLarge, "label space exceeds 10^6 labels");
    }
    const auto labels = task.enumerate_labels(x);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double s = w.dot(task.phi(x, labels[i]));
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return labels.at(best);
  } else {
    throw Error(ErrorCode::UnsupportedTask, "brute-force decoding needs an enumerable label space");
  }
}

/// Largest cost(y, y') over the label space of x.
template <EnumerableTask T>
double max_cost_from(const T& task, const typename T::Input& x, const typename T::Label& y) {
  double m = 0.0;
  for (const auto& yp : task.enumerate_labels(x)) m = std::max(m, task.cost(y, yp));
  return m;
}

struct ProbitSplit {
  McEstimate same_label_term;  // E[1{yhat_eps = yhat} cost(y, yhat_eps)]
  McEstimate diff_label_prob;  // P[yhat_eps != yhat]
  McEstimate diff_label_term;  // E[1{yhat_eps != yhat} cost(y, yhat_eps)]
  McEstimate probit;           // E[cost(y, yhat_eps)]
};

/// Splits Monte-Carlo draws eps_i of decode(w + eps_i) by whether the
/// perturbed prediction equals decode(w).
template <StructuredTask T>
ProbitSplit probit_split_raw(const T& task, const Vector& w, const typename T::Input& x,
                             const typename T::Label& y, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "probit split needs at least one sample");
  const auto yhat = task.decode(w, x);
  double s_same = 0, q_same = 0, s_prob = 0, s_diff = 0, q_diff = 0, s_all = 0, q_all = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ye = task.decode(w + probit_perturbation(seed, i, w.size()), x);
    const double c = task.cost(y, ye);
    const bool same = ye == yhat;
    const double same_c = same ? c : 0.0;
    const double diff_c = same ? 0.0 : c;
    s_same += same_c;
    q_same += same_c * same_c;
    s_prob += same ? 0.0 : 1.0;
    s_diff += diff_c;
    q_diff += diff_c * diff_c;
    s_all += c;
    q_all += c * c;
  }
  return {summarize_samples(s_same, q_same, n), summarize_samples(s_prob, s_prob, n),
          summarize_samples(s_diff, q_diff, n), summarize_samples(s_all, q_all, n)};
}

struct Lemma2Result {
  double margin = 0.0;  // margin condition value of the unscaled w
  double probit_mc = 0.0;
  double probit_stderr = 0.0;
  double orbit_value = 0.0;
  double slack = 0.0;  // orbit + sigma - (probit_mc - allowance * stderr)
  bool satisfied = false;
  ProbitSplit split;
  Verdict verdict = Verdict::Skipped;
  std::string skip_reason;

  CheckRecord record(const BoundCheckConfig& cfg) const;
};

namespace detail {

/// Shared precondition test. The margin condition is stated for w, and the
/// losses are then evaluated at w / sigma.
template <EnumerableTask T>
std::string margin_precondition(const T& task, const Vector& w, const typename T::Input& x,
                                const typename T::Label& y, const BoundCheckConfig& cfg,
                                double* margin) {
  cfg.validate();
  if (max_cost_from(task, x, y) > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "bound checks need a cost in [0, 1]");
  }
  *margin = margin_condition_margin(task, w, x);
  if (cfg.margin_eta < cfg.required_margin_eta()) {
    return "MARGIN_NOT_MET: margin_eta is below sigma sqrt(2 ln(m / sigma))";
  }
  if (!(*margin >= cfg.margin_eta)) return "MARGIN_NOT_MET: instance margin is below margin_eta";
  return {};
}

}  // namespace detail

/// Checks probit(w / sigma) <= orbit(w / sigma) + sigma with a Monte-Carlo
/// allowance of `stderr_allowance` standard errors. Skipped (not failed) when
/// the margin precondition does not hold.
template <EnumerableTask T>
Lemma2Result lemma2_check(const T& task, const Vector& w, const typename T::Input& x,
                          const typename T::Label& y, const BoundCheckConfig& cfg) {
  Lemma2Result r;
  r.skip_reason = detail::margin_precondition(task, w, x, y, cfg, &r.margin);
  if (!r.skip_reason.empty()) return r;
  const Vector scaled = w / cfg.sigma;
  r.split = probit_split_raw(task, scaled, x, y, static_cast<std::size_t>(cfg.mc_samples), cfg.seed);
  r.probit_mc = r.split.probit.mean;
  r.probit_stderr = r.split.probit.std_error;
  r.orbit_value = orbit_loss_value(task, scaled, x, y);
  r.slack = r.orbit_value + cfg.sigma - (r.probit_mc - cfg.stderr_allowance * r.probit_stderr);
  r.satisfied = r.slack >= 0.0;
  r.verdict = r.satisfied ? Verdict::Pass : Verdict::Fail;
  return r;
}

struct SplitCheckResult {
  double margin = 0.0;
  ProbitSplit split;
  bool satisfied = false;  // diff_label_prob <= sigma + allowance * stderr
  Verdict verdict = Verdict::Skipped;
  std::string skip_reason;

  CheckRecord record(const BoundCheckConfig& cfg) const;
};

/// Decomposition of probit(w / sigma) into the same-label and changed-label
/// parts, with the check that the changed-label probability stays below sigma.
template <EnumerableTask T>
SplitCheckResult probit_split_estimate(const T& task, const Vector& w, const typename T::Input& x,
                                       const typename T::Label& y, const BoundCheckConfig& cfg) {
  SplitCheckResult r;
  r.skip_reason = detail::margin_precondition(task, w, x, y, cfg, &r.margin);
  if (!r.skip_reason.empty()) return r;
  r.split = probit_split_raw(task, Vector(w / cfg.sigma), x, y,
                             static_cast<std::size_t>(cfg.mc_samples), cfg.seed);
  r.satisfied = r.split.diff_label_prob.mean <=
                cfg.sigma + cfg.stderr_allowance * r.split.diff_label_prob.std_error;
  r.verdict = r.satisfied ? Verdict::Pass : Verdict::Fail;
  return r;
}

/// (1 / (1 - 1/(2 gamma))) [mean(losses) + gamma ||w||^2 / (2 m sigma^2) + sigma
/// + (gamma / m) ln(1 / delta)], with m = cfg.m. Throws INVALID_GAMMA when
/// gamma <= 1/2.
double orbit_bound_rhs(const std::vector<double>& train_orbit_losses, double w_norm,
                       const BoundCheckConfig& cfg);

struct LimitRecord {
  double alpha = 0.0;
  double orbit = 0.0;
  double gap = 0.0;  // |orbit(alpha w) - cost(y, yhat_w)|
};

/// |orbit(alpha w) - cost(y, yhat_w)| for each alpha. Throws
/// DEGENERATE_MARGIN when yhat_w != y and w . dphi(y, yhat_w) = 0, where the
/// limit is cost / 2 instead.
template <StructuredTask T>
std::vector<LimitRecord> orbit_limit_check(const T& task, const Vector& w,
                                           const typename T::Input& x, const typename T::Label& y,
                                           const std::vector<double>& alphas) {
  const auto yhat = task.decode(w, x);
  const double cost = task.cost(y, yhat);
  if (!(yhat == y) && w.dot(delta_phi_hat(task, x, y, yhat)) == 0.0) {
    throw Error(ErrorCode::DegenerateMargin, "w . dphi(y, yhat) = 0; the limit is cost / 2");
  }
  std::vector<LimitRecord> out;
  for (double a : alphas) {
    const double o = orbit_loss_value(task, Vector(a * w), x, y);
    out.push_back({a, o, std::abs(o - cost)});
  }
  return out;
}

}  // namespace orbit
