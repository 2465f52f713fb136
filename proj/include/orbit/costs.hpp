#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "orbit/error.hpp"

namespace orbit {

/// 0 when the labels are equal, 1 otherwise.
template <typename Label>
double zero_one_cost(const Label& y, const Label& yhat) {
  return y == yhat ? 0.0 : 1.0;
}

/// Square cost table indexed [target][prediction]; zero diagonal, non-negative.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(Eigen::MatrixXd values);

  static CostMatrix zero_one(int k);

  int size() const { return static_cast<int>(values_.rows()); }
  double operator()(int y, int yhat) const { return values_(y, yhat); }
  double max_entry() const { return values_.maxCoeff(); }
  const Eigen::MatrixXd& values() const { return values_; }

  /// Copy with every entry multiplied by `factor` (> 0), e.g. 1 / max_entry()
  /// to bring the cost into [0, 1] for bound checks.
  CostMatrix scaled(double factor) const;

  nlohmann::json to_json() const;
  static CostMatrix from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd values_;
};

/// k x k matrix with a zero diagonal and off-diagonal entries drawn uniformly
/// from {1, 2}.
CostMatrix random_cost_matrix(int k, std::uint64_t seed);

struct AlignmentCostConfig {
  double tau = 0.0;
};

/// max{|y_k - yhat_k| - tau, 0} for one boundary.
double boundary_hinge(int y_k, int yhat_k, double tau);

/// Mean over boundaries of max{|y_k - yhat_k| - tau, 0}.
double tau_insensitive_cost(const std::vector<int>& y, const std::vector<int>& yhat,
                            const AlignmentCostConfig& cfg);

/// Vowel onset/offset frames, onset < offset.
struct VowelSpan {
  int onset = 1;
  int offset = 2;
  friend auto operator<=>(const VowelSpan&, const VowelSpan&) = default;
};

struct VowelCostConfig {
  double tau_b = 0.0;
  double tau_e = 0.0;
};

/// [|that_b - t_b| - tau_b]_+ + [|that_e - t_e| - tau_e]_+.
double vowel_cost(const VowelSpan& t, const VowelSpan& that, const VowelCostConfig& cfg);

/// Fraction of positions where the two state sequences disagree.
double normalized_hamming_cost(const std::vector<int>& y, const std::vector<int>& yhat);

}  // namespace orbit
