#include "orbit/verify.hpp"

namespace orbit {

namespace {

nlohmann::json estimate_json(const McEstimate& e) { return e.mean; }
nlohmann::json stderr_json(const McEstimate& e) { return e.std_error; }

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Skipped: return "SKIPPED";
  }
  return "UNKNOWN";
}

nlohmann::json CheckRecord::to_json() const {
  return {{"check", check},
          {"params", params},
          {"estimates", estimates},
          {"stderr", stderr_values},
          {"verdict", std::string(to_string(verdict))}};
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                            double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidConfig, "finite-difference step must be positive");
  Vector g(w.size());
  Vector probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + h;
    const double up = f(probe);
    probe[i] = w[i] - h;
    const double down = f(probe);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& a, const Vector& b) {
  const double denom = std::max(a.norm(), b.norm());
  if (denom == 0.0) return 0.0;
  return (a - b).norm() / denom;
}

double BoundCheckConfig::required_margin_eta() const {
  const double ratio = static_cast<double>(m) / sigma;
  if (ratio <= 1.0) return 0.0;
  return sigma * std::sqrt(2.0 * std::log(ratio));
}

void BoundCheckConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidConfig, "sigma must be finite and positive");
  }
  if (!(gamma > 0.5)) throw Error(ErrorCode::InvalidGamma, "gamma must exceed 1/2");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidConfig, "delta must lie in (0, 1)");
  if (m < 1) throw Error(ErrorCode::InvalidConfig, "m must be >= 1");
  if (mc_samples < 1) throw Error(ErrorCode::InvalidConfig, "mc_samples must be >= 1");
  if (!(stderr_allowance >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "stderr_allowance must be >= 0");
  }
}

nlohmann::json BoundCheckConfig::to_json() const {
  return {{"sigma", sigma},         {"gamma", gamma},   {"delta", delta},
          {"m", m},                 {"margin_eta", margin_eta},
          {"mc_samples", mc_samples}, {"seed", seed}, {"stderr_allowance", stderr_allowance}};
}

CheckRecord Lemma2Result::record(const BoundCheckConfig& cfg) const {
  CheckRecord r;
  r.check = "lemma2";
  r.params = cfg.to_json();
  r.params["required_margin_eta"] = cfg.required_margin_eta();
  r.estimates = {{"margin", std::isfinite(margin) ? nlohmann::json(margin) : nlohmann::json(nullptr)},
                 {"probit_mc", probit_mc},
                 {"orbit_value", orbit_value},
                 {"slack", slack},
                 {"satisfied", satisfied}};
  r.stderr_values = {{"probit_mc", probit_stderr}};
  if (!skip_reason.empty()) r.estimates["skip_reason"] = skip_reason;
  r.verdict = verdict;
  return r;
}

CheckRecord SplitCheckResult::record(const BoundCheckConfig& cfg) const {
  CheckRecord r;
  r.check = "probit_split";
  r.params = cfg.to_json();
  r.estimates = {{"margin", std::isfinite(margin) ? nlohmann::json(margin) : nlohmann::json(nullptr)},
                 {"same_label_term", estimate_json(split.same_label_term)},
                 {"diff_label_prob", estimate_json(split.diff_label_prob)},
                 {"diff_label_term", estimate_json(split.diff_label_term)},
                 {"probit_mc", estimate_json(split.probit)},
                 {"satisfied", satisfied}};
  r.stderr_values = {{"same_label_term", stderr_json(split.same_label_term)},
                     {"diff_label_prob", stderr_json(split.diff_label_prob)},
                     {"diff_label_term", stderr_json(split.diff_label_term)},
                     {"probit_mc", stderr_json(split.probit)}};
  if (!skip_reason.empty()) r.estimates["skip_reason"] = skip_reason;
  r.verdict = verdict;
  return r;
}

double orbit_bound_rhs(const std::vector<double>& train_orbit_losses, double w_norm,
                       const BoundCheckConfig& cfg) {
  if (!(cfg.gamma > 0.5)) throw Error(ErrorCode::InvalidGamma, "gamma must exceed 1/2");
  if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
  if (cfg.m < 1) throw Error(ErrorCode::InvalidConfig, "m must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "delta must lie in (0, 1]");
  }
  double mean = 0.0;
  for (double l : train_orbit_losses) mean += l;
  if (!train_orbit_losses.empty()) mean /= static_cast<double>(train_orbit_losses.size());
  const double m = cfg.m;
  const double inner = mean + cfg.gamma * w_norm * w_norm / (2.0 * m * cfg.sigma * cfg.sigma) +
                       cfg.sigma + (cfg.gamma / m) * std::log(1.0 / cfg.delta);
  return inner / (1.0 - 1.0 / (2.0 * cfg.gamma));
}

}  // namespace orbit
