#pragma once

// Multiclass classification as a structured task via the Kesler
// construction: w holds one p-dimensional block per class and phi(x, y)
// copies x into block y.

#include <cstdint>
#include <vector>

#include "orbit/core.hpp"
#include "orbit/costs.hpp"

namespace orbit {

class MulticlassTask {
 public:
  using Input = Vector;
  using Label = int;

  MulticlassTask(int num_classes, int input_dim);
  MulticlassTask(int num_classes, int input_dim, CostMatrix cost);

  int num_classes() const { return k_; }
  int input_dim() const { return p_; }
  std::size_t dim() const { return static_cast<std::size_t>(k_) * static_cast<std::size_t>(p_); }
  const CostMatrix& cost_matrix() const { return cost_; }

  Vector phi(const Input& x, Label y) const;

  /// Per-class scores w^c . x.
  Vector class_scores(const Vector& w, const Input& x) const;

  /// argmax_c w^c . x; the smallest index wins ties.
  Label decode(const Vector& w, const Input& x) const;

  /// argmax_c [w^c . x + scale * cost(y, c)]; the smallest index wins ties.
  Label cost_augmented_decode(const Vector& w, const Input& x, Label y, double scale) const;

  double cost(Label y, Label yhat) const { return cost_(y, yhat); }

  std::vector<Label> enumerate_labels(const Input&) const;
  std::size_t label_count(const Input&) const { return static_cast<std::size_t>(k_); }

 private:
  void check(const Vector& w, const Input& x) const;

  int k_;
  int p_;
  CostMatrix cost_;
};

struct MulticlassSynthConfig {
  int num_classes = 2;
  int input_dim = 2;
  int count = 100;
  double separation = 3.0;
  double noise = 0.5;
  std::uint64_t seed = 0;
};

/// Class-conditional Gaussian clusters. Class c < 2p is centred at
/// +-separation on axis (c / 2) mod p; further classes get random centres of
/// norm `separation`. Noise is clipped at 3 standard deviations per
/// coordinate, so with separation > 6 * noise the first 2p classes are
/// separated by the weights w^c = centre_c. Classes are assigned round-robin.
Dataset<MulticlassTask> synth_multiclass(const MulticlassSynthConfig& cfg);

}  // namespace orbit
