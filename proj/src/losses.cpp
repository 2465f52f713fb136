#include "orbit/losses.hpp"

#include <array>
#include <string>

namespace orbit {

namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 7> kRuleNames{{
    {RuleKind::Orbit, "ORBIT"},
    {RuleKind::OrbitSimplified, "ORBIT_SIMPLIFIED"},
    {RuleKind::Perceptron, "PERCEPTRON"},
    {RuleKind::Hinge, "HINGE"},
    {RuleKind::Ramp, "RAMP"},
    {RuleKind::Probit, "PROBIT"},
    {RuleKind::Direct, "DIRECT"},
}};

}  // namespace

std::string_view to_string(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames) {
    if (k == kind) return name;
  }
  return "UNKNOWN";
}

RuleKind rule_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kRuleNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown rule kind '" + std::string(name) + "'");
}

void UpdateRule::validate() const {
  if (kind == RuleKind::Direct && direct_epsilon == 0.0) {
    throw Error(ErrorCode::ZeroEpsilon, "direct loss needs a nonzero epsilon");
  }
  if (kind == RuleKind::Direct && !std::isfinite(direct_epsilon)) {
    throw Error(ErrorCode::InvalidConfig, "direct_epsilon must be finite");
  }
  if (kind == RuleKind::Probit && probit_samples < 1) {
    throw Error(ErrorCode::InvalidConfig, "probit_samples must be >= 1");
  }
}

void StepContext::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::InvalidConfig, "eta must be finite and positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must be finite and non-negative");
  }
}

double gaussian_upper_tail(double m) { return 0.5 * std::erfc(m / std::numbers::sqrt2); }

}  // namespace orbit
