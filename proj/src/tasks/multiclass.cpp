#include "orbit/tasks/multiclass.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "orbit/rng.hpp"

namespace orbit {

MulticlassTask::MulticlassTask(int num_classes, int input_dim)
    : MulticlassTask(num_classes, input_dim, CostMatrix::zero_one(std::max(num_classes, 1))) {}

MulticlassTask::MulticlassTask(int num_classes, int input_dim, CostMatrix cost)
    : k_(num_classes), p_(input_dim), cost_(std::move(cost)) {
  if (k_ < 2 || p_ < 1) {
    throw Error(ErrorCode::InvalidConfig, "multiclass task needs K >= 2 and p >= 1");
  }
  if (cost_.size() != k_) {
    throw Error(ErrorCode::DimMismatch, "cost matrix is " + std::to_string(cost_.size()) +
                                            "x" + std::to_string(cost_.size()) + " but K = " +
                                            std::to_string(k_));
  }
}

void MulticlassTask::check(const Vector& w, const Input& x) const {
  require_dim(w, dim(), "weights");
  require_dim(x, static_cast<std::size_t>(p_), "input");
}

Vector MulticlassTask::phi(const Input& x, Label y) const {
  require_dim(x, static_cast<std::size_t>(p_), "input");
  if (y < 0 || y >= k_) {
    throw Error(ErrorCode::InvalidConfig, "class " + std::to_string(y) + " out of range");
  }
  Vector f = Vector::Zero(static_cast<Eigen::Index>(dim()));
  f.segment(static_cast<Eigen::Index>(y) * p_, p_) = x;
  return f;
}

Vector MulticlassTask::class_scores(const Vector& w, const Input& x) const {
  check(w, x);
  // Column c of the p x K view is the block w^c.
  const Eigen::Map<const Eigen::MatrixXd> blocks(w.data(), p_, k_);
  return blocks.transpose() * x;
}

MulticlassTask::Label MulticlassTask::decode(const Vector& w, const Input& x) const {
  const Vector s = class_scores(w, x);
  Label best = 0;
  for (Label c = 1; c < k_; ++c) {
    if (s[c] > s[best]) best = c;
  }
  return best;
}

MulticlassTask::Label MulticlassTask::cost_augmented_decode(const Vector& w, const Input& x,
                                                            Label y, double scale) const {
  Vector s = class_scores(w, x);
  for (Label c = 0; c < k_; ++c) s[c] += scale * cost_(y, c);
  Label best = 0;
  for (Label c = 1; c < k_; ++c) {
    if (s[c] > s[best]) best = c;
  }
  return best;
}

std::vector<MulticlassTask::Label> MulticlassTask::enumerate_labels(const Input&) const {
  std::vector<Label> labels(static_cast<std::size_t>(k_));
  std::iota(labels.begin(), labels.end(), 0);
  return labels;
}

Dataset<MulticlassTask> synth_multiclass(const MulticlassSynthConfig& cfg) {
  if (cfg.num_classes < 2 || cfg.input_dim < 1 || cfg.count < 1 || !(cfg.noise >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "synth_multiclass: sizes must be positive");
  }
  const int k = cfg.num_classes;
  const int p = cfg.input_dim;
  std::vector<Vector> centres(static_cast<std::size_t>(k));
  Rng centre_rng(derive_seed(cfg.seed, {0}));
  for (int c = 0; c < k; ++c) {
    Vector mu = Vector::Zero(p);
    if (c < 2 * p) {
      mu[(c / 2) % p] = (c % 2 == 0) ? cfg.separation : -cfg.separation;
    } else {
      mu = normalized_or_zero(standard_normal_vector(centre_rng, p)) * cfg.separation;
    }
    centres[static_cast<std::size_t>(c)] = std::move(mu);
  }

  Dataset<MulticlassTask> data;
  data.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(i)}));
    const int c = i % k;
    Vector noise = standard_normal_vector(rng, p);
    noise = noise.cwiseMax(-3.0).cwiseMin(3.0) * cfg.noise;
    data.push_back({centres[static_cast<std::size_t>(c)] + noise, c});
  }
  return data;
}

}  // namespace orbit
