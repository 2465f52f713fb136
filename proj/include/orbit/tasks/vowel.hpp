#pragma once

// Vowel segmentation: predict the first and last frame (t_b, t_e), 1 <= t_b <
// t_e <= T, of the single vowel in an utterance of 22-dimensional frames.
// Channel 0 is treated as energy and channel 1 as voicing. The feature map has
// five terms, each in [-1, 1] and scaled by 1 / sqrt(5):
//   [0] tanh(e[t_b] - e[t_b - 1])             onset rise (0 when t_b = 1)
//   [1] tanh(e[t_e] - e[t_e + 1])             offset drop (0 when t_e = T)
//   [2] tanh(mean e inside - mean e outside)  (0 when nothing is outside)
//   [3] -min(|duration - prior| / prior, 1)   duration = t_e - t_b + 1
//   [4] tanh(mean voicing inside)

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "orbit/core.hpp"
#include "orbit/costs.hpp"

namespace orbit {

class VowelTask {
 public:
  using Input = Eigen::MatrixXd;  // T x 22
  using Label = VowelSpan;

  static constexpr int kFrameDim = 22;
  static constexpr int kNumFeatures = 5;

  explicit VowelTask(VowelCostConfig cost = {}, double duration_prior = 8.0);

  std::size_t dim() const { return kNumFeatures; }
  const VowelCostConfig& cost_config() const { return cost_; }
  double duration_prior() const { return prior_; }

  Vector phi(const Input& x, const Label& y) const;
  Label decode(const Vector& w, const Input& x) const;
  Label cost_augmented_decode(const Vector& w, const Input& x, const Label& y,
                              double scale) const;
  double cost(const Label& y, const Label& yhat) const { return vowel_cost(y, yhat, cost_); }

  /// Every (t_b, t_e) pair, ordered by t_b then t_e.
  std::vector<Label> enumerate_labels(const Input& x) const;
  std::size_t label_count(const Input& x) const;

 private:
  struct Prefix {
    int frames;
    Eigen::VectorXd energy;        // e_t at index t-1
    Eigen::VectorXd energy_sum;    // sum of e over frames 1..t at index t
    Eigen::VectorXd voicing_sum;   // sum of voicing over frames 1..t at index t
  };
  Prefix prefix(const Input& x) const;
  Vector features(const Prefix& pre, int tb, int te) const;
  Label search(const Vector& w, const Input& x, const Label* target, double scale) const;

  VowelCostConfig cost_;
  double prior_;
};

struct VowelSynthConfig {
  int t_min = 20;
  int t_max = 40;
  int duration_min = 4;
  int duration_max = 12;
  double level = 1.0;  // energy and voicing inside the vowel
  double noise = 0.2;
  int count = 100;
  std::uint64_t seed = 0;
};

/// Frames with energy and voicing stepping from 0 to `level` on [t_b, t_e],
/// all 22 channels carrying Gaussian noise.
Dataset<VowelTask> synth_vowel(const VowelSynthConfig& cfg);

}  // namespace orbit
