#include "orbit/costs.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "orbit/rng.hpp"

namespace orbit {

CostMatrix::CostMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() < 1) {
    throw Error(ErrorCode::DimMismatch, "cost matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    if (values_(i, i) != 0.0) {
      throw Error(ErrorCode::InvalidConfig, "cost matrix diagonal must be exactly 0");
    }
  }
  if ((values_.array() < 0.0).any() || !values_.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "cost matrix entries must be finite and >= 0");
  }
}

CostMatrix CostMatrix::zero_one(int k) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(k, k);
  m.diagonal().setZero();
  return CostMatrix(std::move(m));
}

CostMatrix CostMatrix::scaled(double factor) const {
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidConfig, "cost scale must be positive");
  return CostMatrix(values_ * factor);
}

nlohmann::json CostMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < values_.cols(); ++j) row.push_back(values_(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

CostMatrix CostMatrix::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::InvalidConfig, "cost matrix must be a non-empty array of arrays");
  }
  const auto k = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k) {
      throw Error(ErrorCode::InvalidConfig, "cost matrix row " + std::to_string(i) + " has wrong length");
    }
    for (Eigen::Index c = 0; c < k; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return CostMatrix(std::move(m));
}

CostMatrix random_cost_matrix(int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidConfig, "random cost matrix needs k >= 2");
  Rng rng(derive_seed(seed, {0xC057}));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) m(i, j) = (rng() & 1U) ? 2.0 : 1.0;
    }
  }
  return CostMatrix(std::move(m));
}

double boundary_hinge(int y_k, int yhat_k, double tau) {
  return std::max(std::abs(static_cast<double>(y_k) - yhat_k) - tau, 0.0);
}

double tau_insensitive_cost(const std::vector<int>& y, const std::vector<int>& yhat,
                            const AlignmentCostConfig& cfg) {
  if (y.size() != yhat.size() || y.empty()) {
    throw Error(ErrorCode::LengthMismatch, "boundary sequences have lengths " +
                                               std::to_string(y.size()) + " and " +
                                               std::to_string(yhat.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) sum += boundary_hinge(y[k], yhat[k], cfg.tau);
  return sum / static_cast<double>(y.size());
}

double vowel_cost(const VowelSpan& t, const VowelSpan& that, const VowelCostConfig& cfg) {
  if (t.onset >= t.offset || that.onset >= that.offset) {
    throw Error(ErrorCode::InvalidInterval, "vowel spans need onset < offset");
  }
  return boundary_hinge(t.onset, that.onset, cfg.tau_b) +
         boundary_hinge(t.offset, that.offset, cfg.tau_e);
}

double normalized_hamming_cost(const std::vector<int>& y, const std::vector<int>& yhat) {
  if (y.size() != yhat.size() || y.empty()) {
    throw Error(ErrorCode::LengthMismatch, "state sequences differ in length");
  }
  std::size_t diff = 0;
  for (std::size_t t = 0; t < y.size(); ++t) diff += (y[t] != yhat[t]);
  return static_cast<double>(diff) / static_cast<double>(y.size());
}

}  // namespace orbit
