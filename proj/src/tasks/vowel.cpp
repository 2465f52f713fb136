#include "orbit/tasks/vowel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "orbit/rng.hpp"

namespace orbit {

VowelTask::VowelTask(VowelCostConfig cost, double duration_prior)
    : cost_(cost), prior_(duration_prior) {
  if (!(cost_.tau_b >= 0.0) || !(cost_.tau_e >= 0.0) || !(prior_ > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "vowel task needs tau_b, tau_e >= 0 and a positive duration prior");
  }
}

VowelTask::Prefix VowelTask::prefix(const Input& x) const {
  if (x.cols() != kFrameDim) {
    throw Error(ErrorCode::DimMismatch, "vowel frames have " + std::to_string(x.cols()) +
                                            " columns, expected 22");
  }
  if (x.rows() < 2) throw Error(ErrorCode::Infeasible, "vowel segmentation needs T >= 2");
  const auto t_len = x.rows();
  Prefix pre{static_cast<int>(t_len), x.col(0), Eigen::VectorXd::Zero(t_len + 1),
             Eigen::VectorXd::Zero(t_len + 1)};
  for (Eigen::Index t = 0; t < t_len; ++t) {
    pre.energy_sum[t + 1] = pre.energy_sum[t] + x(t, 0);
    pre.voicing_sum[t + 1] = pre.voicing_sum[t] + x(t, 1);
  }
  return pre;
}

Vector VowelTask::features(const Prefix& pre, int tb, int te) const {
  const int t_len = pre.frames;
  const int inside = te - tb + 1;
  const int outside = t_len - inside;
  const double in_energy = pre.energy_sum[te] - pre.energy_sum[tb - 1];
  const double in_mean = in_energy / inside;
  Vector f(kNumFeatures);
  f[0] = tb > 1 ? std::tanh(pre.energy[tb - 1] - pre.energy[tb - 2]) : 0.0;
  f[1] = te < t_len ? std::tanh(pre.energy[te - 1] - pre.energy[te]) : 0.0;
  f[2] = outside > 0
             ? std::tanh(in_mean - (pre.energy_sum[t_len] - in_energy) / outside)
             : 0.0;
  f[3] = -std::min(std::abs(inside - prior_) / prior_, 1.0);
  f[4] = std::tanh((pre.voicing_sum[te] - pre.voicing_sum[tb - 1]) / inside);
  return f / std::sqrt(static_cast<double>(kNumFeatures));
}

Vector VowelTask::phi(const Input& x, const Label& y) const {
  const Prefix pre = prefix(x);
  if (y.onset < 1 || y.onset >= y.offset || y.offset > pre.frames) {
    throw Error(ErrorCode::InvalidInterval, "vowel span must satisfy 1 <= t_b < t_e <= T");
  }
  return features(pre, y.onset, y.offset);
}

VowelTask::Label VowelTask::search(const Vector& w, const Input& x, const Label* target,
                                   double scale) const {
  require_dim(w, dim(), "weights");
  const Prefix pre = prefix(x);
  if (target != nullptr &&
      (target->onset < 1 || target->onset >= target->offset || target->offset > pre.frames)) {
    throw Error(ErrorCode::InvalidInterval, "vowel span must satisfy 1 <= t_b < t_e <= T");
  }
  Label best{1, 2};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int tb = 1; tb < pre.frames; ++tb) {
    for (int te = tb + 1; te <= pre.frames; ++te) {
      double s = w.dot(features(pre, tb, te));
      if (target != nullptr && scale != 0.0) s += scale * vowel_cost(*target, {tb, te}, cost_);
      if (s > best_score) {
        best_score = s;
        best = {tb, te};
      }
    }
  }
  return best;
}

VowelTask::Label VowelTask::decode(const Vector& w, const Input& x) const {
  return search(w, x, nullptr, 0.0);
}

VowelTask::Label VowelTask::cost_augmented_decode(const Vector& w, const Input& x,
                                                  const Label& y, double scale) const {
  return search(w, x, &y, scale);
}

std::size_t VowelTask::label_count(const Input& x) const {
  const auto t_len = static_cast<std::size_t>(prefix(x).frames);
  return t_len * (t_len - 1) / 2;
}

std::vector<VowelTask::Label> VowelTask::enumerate_labels(const Input& x) const {
  const int t_len = prefix(x).frames;
  std::vector<Label> out;
  out.reserve(label_count(x));
  for (int tb = 1; tb < t_len; ++tb) {
    for (int te = tb + 1; te <= t_len; ++te) out.push_back({tb, te});
  }
  return out;
}

Dataset<VowelTask> synth_vowel(const VowelSynthConfig& cfg) {
  if (cfg.duration_min < 2 || cfg.duration_max < cfg.duration_min ||
      cfg.t_min < cfg.duration_max || cfg.t_max < cfg.t_min || cfg.count < 1 ||
      !(cfg.noise >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "synth_vowel needs 2 <= duration_min <= duration_max <= t_min <= t_max");
  }
  Dataset<VowelTask> data;
  data.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
    const int t_len = cfg.t_min + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.t_max - cfg.t_min + 1));
    const int dur = cfg.duration_min +
                    static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.duration_max - cfg.duration_min + 1));
    const int tb = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(t_len - dur + 1));
    const int te = tb + dur - 1;
    Eigen::MatrixXd frames(t_len, VowelTask::kFrameDim);
    for (int t = 1; t <= t_len; ++t) {
      Vector row = cfg.noise * standard_normal_vector(rng, VowelTask::kFrameDim);
      if (t >= tb && t <= te) {
        row[0] += cfg.level;
        row[1] += cfg.level;
      }
      frames.row(t - 1) = row.transpose();
    }
    data.push_back({std::move(frames), VowelSpan{tb, te}});
  }
  return data;
}

}  // namespace orbit
