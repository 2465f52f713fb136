#include "orbit/tasks/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orbit/rng.hpp"

namespace orbit {

namespace {

double squash(double v) { return v / (1.0 + v); }

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

AlignmentTask::AlignmentTask(int frame_dim, AlignmentCostConfig cost, int energy_window)
    : frame_dim_(frame_dim), cost_(cost), window_(energy_window) {
  if (frame_dim_ < 1 || window_ < 1 || !(cost_.tau >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "alignment task needs frame_dim >= 1, energy_window >= 1, tau >= 0");
  }
}

double AlignmentTask::feature_scale(int num_phonemes) {
  return 1.0 / (static_cast<double>(num_phonemes) * std::sqrt(3.0));
}

void AlignmentTask::check_input(const Input& x) const {
  if (x.frames.cols() != frame_dim_) {
    throw Error(ErrorCode::DimMismatch, "frames have " + std::to_string(x.frames.cols()) +
                                            " columns, expected " + std::to_string(frame_dim_));
  }
  if (x.num_phonemes < 1) throw Error(ErrorCode::InvalidConfig, "num_phonemes must be >= 1");
  if (x.num_phonemes > x.frames.rows()) {
    throw Error(ErrorCode::Infeasible, std::to_string(x.num_phonemes) + " phonemes cannot fit in " +
                                           std::to_string(x.frames.rows()) + " frames");
  }
}

void AlignmentTask::check_label(const Input& x, const Label& y) const {
  const auto t_len = static_cast<int>(x.frames.rows());
  if (static_cast<int>(y.size()) != x.num_phonemes) {
    throw Error(ErrorCode::LengthMismatch, "alignment has " + std::to_string(y.size()) +
                                               " boundaries, expected " +
                                               std::to_string(x.num_phonemes));
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    const int lo = k == 0 ? 1 : y[k - 1] + 1;
    if (y[k] < lo || y[k] > t_len) {
      throw Error(ErrorCode::InvalidInterval, "alignment boundaries must satisfy 1 <= y_1 < ... <= T");
    }
  }
}

AlignmentTask::Tables AlignmentTask::tables(const Input& x) const {
  const auto t_len = x.frames.rows();
  Tables tab{Eigen::VectorXd::Zero(t_len), Eigen::VectorXd::Zero(t_len)};
  const Eigen::VectorXd energy = x.frames.rowwise().mean();
  for (Eigen::Index t = 1; t < t_len; ++t) {
    tab.change[t] = squash((x.frames.row(t) - x.frames.row(t - 1)).norm());
    const Eigen::Index after_end = std::min<Eigen::Index>(t_len, t + window_);
    const Eigen::Index before_begin = std::max<Eigen::Index>(0, t - window_);
    const double after = energy.segment(t, after_end - t).mean();
    const double before = energy.segment(before_begin, t - before_begin).mean();
    tab.jump[t] = squash(std::abs(after - before));
  }
  return tab;
}

double AlignmentTask::duration_term(int duration, int num_frames, int num_phonemes) {
  const double prior = static_cast<double>(num_frames) / num_phonemes;
  return -std::min(std::abs(duration - prior) / prior, 1.0);
}

Vector AlignmentTask::phi(const Input& x, const Label& y) const {
  check_input(x);
  check_label(x, y);
  const int t_len = static_cast<int>(x.frames.rows());
  const int k_len = x.num_phonemes;
  const Tables tab = tables(x);
  Vector f = Vector::Zero(kNumFeatures);
  for (int k = 0; k < k_len; ++k) {
    const int next = k + 1 < k_len ? y[static_cast<std::size_t>(k) + 1] : t_len + 1;
    const int t = y[static_cast<std::size_t>(k)];
    f[0] += tab.change[t - 1];
    f[1] += tab.jump[t - 1];
    f[2] += duration_term(next - t, t_len, k_len);
  }
  return f * feature_scale(k_len);
}

AlignmentTask::Label AlignmentTask::run_dp(const Vector& w, const Input& x, const Label* target,
                                           double scale) const {
  require_dim(w, dim(), "weights");
  check_input(x);
  if (target != nullptr) check_label(x, *target);
  const int t_len = static_cast<int>(x.frames.rows());
  const int k_len = x.num_phonemes;
  const Tables tab = tables(x);
  const double s = feature_scale(k_len);

  auto node = [&](int k, int t) {  // k 0-based, t 1-based
    double v = s * (w[0] * tab.change[t - 1] + w[1] * tab.jump[t - 1]);
    if (target != nullptr && scale != 0.0) {
      v += scale * boundary_hinge((*target)[static_cast<std::size_t>(k)], t, cost_.tau) / k_len;
    }
    return v;
  };
  auto edge = [&](int duration) { return s * w[2] * duration_term(duration, t_len, k_len); };

  // best[k][t]: optimal score of boundaries k..K-1 given y_k = t. Boundary k
  // can start at frames [k + 1, T - K + k + 1].
  const auto width = static_cast<std::size_t>(t_len) + 2;
  std::vector<double> best(static_cast<std::size_t>(k_len) * width, kNegInf);
  auto at = [&](int k, int t) -> double& { return best[static_cast<std::size_t>(k) * width + t]; };
  auto lo = [&](int k) { return k + 1; };
  auto hi = [&](int k) { return t_len - k_len + k + 1; };

  for (int t = lo(k_len - 1); t <= hi(k_len - 1); ++t) {
    at(k_len - 1, t) = node(k_len - 1, t) + edge(t_len + 1 - t);
  }
  for (int k = k_len - 2; k >= 0; --k) {
    for (int t = lo(k); t <= hi(k); ++t) {
      double tail = kNegInf;
      for (int u = std::max(t + 1, lo(k + 1)); u <= hi(k + 1); ++u) {
        tail = std::max(tail, edge(u - t) + at(k + 1, u));
      }
      at(k, t) = node(k, t) + tail;
    }
  }

  // Forward pass takes the smallest frame reaching each optimum, which yields
  // the lexicographically smallest maximizer.
  Label y(static_cast<std::size_t>(k_len));
  double target_value = kNegInf;
  for (int t = lo(0); t <= hi(0); ++t) {
    if (at(0, t) > target_value) {
      target_value = at(0, t);
      y[0] = t;
    }
  }
  for (int k = 1; k < k_len; ++k) {
    const int prev = y[static_cast<std::size_t>(k) - 1];
    double bestv = kNegInf;
    for (int u = std::max(prev + 1, lo(k)); u <= hi(k); ++u) {
      const double v = edge(u - prev) + at(k, u);
      if (v > bestv) {
        bestv = v;
        y[static_cast<std::size_t>(k)] = u;
      }
    }
  }
  return y;
}

AlignmentTask::Label AlignmentTask::decode(const Vector& w, const Input& x) const {
  return run_dp(w, x, nullptr, 0.0);
}

AlignmentTask::Label AlignmentTask::cost_augmented_decode(const Vector& w, const Input& x,
                                                          const Label& y, double scale) const {
  return run_dp(w, x, &y, scale);
}

std::size_t AlignmentTask::label_count(const Input& x) const {
  check_input(x);
  const auto n = static_cast<std::size_t>(x.frames.rows());
  const auto k = static_cast<std::size_t>(x.num_phonemes);
  // C(n, k) via the multiplicative formula; each partial product is itself a
  // binomial coefficient, so the division is exact.
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    if (c > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    c = c * num / i;
  }
  return c;
}

std::vector<AlignmentTask::Label> AlignmentTask::enumerate_labels(const Input& x) const {
  check_input(x);
  const int t_len = static_cast<int>(x.frames.rows());
  const int k_len = x.num_phonemes;
  std::vector<Label> out;
  Label y(static_cast<std::size_t>(k_len));
  for (int k = 0; k < k_len; ++k) y[static_cast<std::size_t>(k)] = k + 1;
  while (true) {
    out.push_back(y);
    int k = k_len - 1;
    while (k >= 0 && y[static_cast<std::size_t>(k)] == t_len - k_len + k + 1) --k;
    if (k < 0) break;
    ++y[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < k_len; ++j) {
      y[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j) - 1] + 1;
    }
  }
  return out;
}

Dataset<AlignmentTask> synth_alignment(const AlignmentSynthConfig& cfg) {
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min || cfg.t_min < cfg.k_min + 1 ||
      cfg.t_max < cfg.t_min || cfg.frame_dim < 1 || cfg.count < 1 || !(cfg.noise >= 0.0) ||
      !(cfg.step > 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "synth_alignment needs 1 <= k_min <= k_max, k_min < t_min <= t_max, positive sizes");
  }
  Dataset<AlignmentTask> data;
  data.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
    const int t_len = cfg.t_min + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.t_max - cfg.t_min + 1));
    const int k_hi = std::min(cfg.k_max, t_len - 1);
    const int k_len = cfg.k_min + static_cast<int>(rng() % static_cast<std::uint64_t>(k_hi - cfg.k_min + 1));

    // K distinct start frames from [2, T] by a partial Fisher-Yates draw.
    std::vector<int> pool(static_cast<std::size_t>(t_len) - 1);
    for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = static_cast<int>(j) + 2;
    for (int j = 0; j < k_len; ++j) {
      const auto remaining = pool.size() - static_cast<std::size_t>(j);
      const auto pick = static_cast<std::size_t>(j) + static_cast<std::size_t>(rng() % remaining);
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    }
    std::vector<int> starts(pool.begin(), pool.begin() + k_len);
    std::sort(starts.begin(), starts.end());

    Eigen::MatrixXd frames(t_len, cfg.frame_dim);
    Vector mean = standard_normal_vector(rng, cfg.frame_dim);
    std::size_t seg = 0;
    for (int t = 1; t <= t_len; ++t) {
      if (seg < starts.size() && t == starts[seg]) {
        mean += cfg.step * normalized_or_zero(standard_normal_vector(rng, cfg.frame_dim));
        ++seg;
      }
      frames.row(t - 1) = (mean + cfg.noise * standard_normal_vector(rng, cfg.frame_dim)).transpose();
    }
    data.push_back({AlignmentInput{std::move(frames), k_len}, std::move(starts)});
  }
  return data;
}

}  // namespace orbit
