#pragma once

// Monotone sequence alignment: given T acoustic frames and the number K of
// phonemes, predict the start frame of every phoneme, 1 <= y_1 < ... < y_K <= T.
//
// The feature map is a sum of boundary-local terms plus a duration term for
// each consecutive pair of boundaries, so exact decoding is a dynamic program
// over (phoneme index, start frame). With y_{K+1} = T + 1 the three
// coordinates are
//   [0] sum_k g(||s_{y_k} - s_{y_k - 1}||)            frame change at the boundary
//   [1] sum_k g(|mean energy after - mean energy before|) over a short window
//   [2] -sum_k min(|d_k - T/K| / (T/K), 1)           d_k = y_{k+1} - y_k
// with g(v) = v / (1 + v) and energy the mean of a frame's coordinates. Each
// term lies in [-1, 1] and the sum is scaled by 1 / (K sqrt(3)), so
// ||phi|| <= 1.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "orbit/core.hpp"
#include "orbit/costs.hpp"

namespace orbit {

struct AlignmentInput {
  Eigen::MatrixXd frames;  // T x frame_dim, row t-1 holds frame t
  int num_phonemes = 1;
};

class AlignmentTask {
 public:
  using Input = AlignmentInput;
  using Label = std::vector<int>;  // 1-based start frames, strictly increasing

  static constexpr int kNumFeatures = 3;

  explicit AlignmentTask(int frame_dim, AlignmentCostConfig cost = {}, int energy_window = 3);

  std::size_t dim() const { return kNumFeatures; }
  int frame_dim() const { return frame_dim_; }
  const AlignmentCostConfig& cost_config() const { return cost_; }
  int energy_window() const { return window_; }

  Vector phi(const Input& x, const Label& y) const;
  Label decode(const Vector& w, const Input& x) const;

  /// argmax_y' [w . phi(x, y') + scale * tau_insensitive_cost(y, y')].
  Label cost_augmented_decode(const Vector& w, const Input& x, const Label& y,
                              double scale) const;

  double cost(const Label& y, const Label& yhat) const {
    return tau_insensitive_cost(y, yhat, cost_);
  }

  /// All monotone sequences in lexicographic order.
  std::vector<Label> enumerate_labels(const Input& x) const;
  /// C(T, K), saturating at SIZE_MAX.
  std::size_t label_count(const Input& x) const;

  /// Throws unless y is a valid alignment of x.
  void check_label(const Input& x, const Label& y) const;

  /// 1 / (K sqrt(3)).
  static double feature_scale(int num_phonemes);

 private:
  struct Tables {
    Eigen::VectorXd change;  // g(frame change), index t-1
    Eigen::VectorXd jump;    // g(energy jump), index t-1
  };
  Tables tables(const Input& x) const;
  static double duration_term(int duration, int num_frames, int num_phonemes);
  Label run_dp(const Vector& w, const Input& x, const Label* target, double scale) const;
  void check_input(const Input& x) const;

  int frame_dim_;
  AlignmentCostConfig cost_;
  int window_;
};

struct AlignmentSynthConfig {
  int t_min = 8;
  int t_max = 24;
  int k_min = 2;
  int k_max = 4;
  int frame_dim = 4;
  double step = 1.0;   // distance between consecutive segment means
  double noise = 0.1;  // per-coordinate Gaussian noise
  int count = 100;
  std::uint64_t seed = 0;
};

/// Piecewise-constant frames with K + 1 segments (a lead-in before y_1 plus
/// one per phoneme). Consecutive segment means differ by exactly `step`, so
/// with noise = 0 the weights (1, 0, 0) recover every alignment exactly.
/// Start frames are K distinct frames drawn from [2, T].
Dataset<AlignmentTask> synth_alignment(const AlignmentSynthConfig& cfg);

}  // namespace orbit
