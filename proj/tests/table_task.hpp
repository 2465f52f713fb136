#pragma once

// A task defined by an explicit feature table and cost matrix, so tests can
// state phi(x, y) directly. Input is unused; labels are row indices.

#include <limits>
#include <vector>

#include "orbit/core.hpp"

namespace orbit::testing {

struct TableTask {
  using Input = int;
  using Label = int;

  std::vector<Vector> features;  // phi(x, y) = features[y]
  Eigen::MatrixXd costs;         // cost(y, yhat) = costs(y, yhat)

  static TableTask zero_one(std::vector<Vector> features) {
    const auto k = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k);
    return {std::move(features), c};
  }

  std::size_t dim() const { return static_cast<std::size_t>(features.front().size()); }
  Vector phi(const Input&, const Label& y) const { return features[static_cast<std::size_t>(y)]; }
  double cost(const Label& y, const Label& yhat) const { return costs(y, yhat); }

  Label cost_augmented_decode(const Vector& w, const Input&, const Label& y, double scale) const {
    Label best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < features.size(); ++j) {
      const double s = w.dot(features[j]) + scale * costs(y, static_cast<Eigen::Index>(j));
      if (s > best_score) {
        best_score = s;
        best = static_cast<Label>(j);
      }
    }
    return best;
  }
  Label decode(const Vector& w, const Input& x) const { return cost_augmented_decode(w, x, 0, 0.0); }

  std::size_t label_count(const Input&) const { return features.size(); }
  std::vector<Label> enumerate_labels(const Input&) const {
    std::vector<Label> out(features.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<Label>(j);
    return out;
  }
};

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace orbit::testing
