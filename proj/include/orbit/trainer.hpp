#pragma once

// Online training: one update per example, epochs over a freshly shuffled
// order each time, learning rate eta0 or eta0 / sqrt(t) with a global step
// counter t starting at 1. The final iterate is the model unless averaging is
// requested explicitly.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbit/core.hpp"
#include "orbit/gmm_hmm.hpp"
#include "orbit/losses.hpp"
#include "orbit/rng.hpp"

namespace orbit {

enum class Schedule { Constant, InvSqrt };

std::string_view to_string(Schedule s);
Schedule schedule_from_string(std::string_view name);

struct TrainConfig {
  int epochs = 1;
  double eta0 = 0.1;
  Schedule schedule = Schedule::InvSqrt;
  double lambda = 0.0;
  std::uint64_t shuffle_seed = 0;
  UpdateRule rule;
  bool average = false;  // report the mean of all iterates instead of the last one
  std::optional<Vector> initial_weights;

  /// Throws INVALID_CONFIG or CONFIG_UNSTABLE (eta0 * lambda >= 1).
  void validate() const;
};

/// eta0 (CONSTANT) or eta0 / sqrt(t) (INV_SQRT), t >= 1.
double learning_rate(const TrainConfig& cfg, std::uint64_t t);

struct EvalResult {
  double mean_cost = 0.0;
  double error_rate = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  std::optional<double> mean_surrogate_loss;
  double train_mean_cost = 0.0;
  double train_error_rate = 0.0;
  std::optional<double> eval_mean_cost;
  std::optional<double> eval_error_rate;
  double wall_time_s = 0.0;  // kept out of to_json so reports stay reproducible
};

struct TrainReport {
  std::string initialization;  // "zeros" or "explicit"
  std::vector<EpochRecord> epochs;

  /// One JSON object per epoch, without wall time.
  std::vector<nlohmann::json> to_json_lines() const;
  /// One JSON object per epoch holding only the wall time.
  std::vector<nlohmann::json> timing_lines() const;
};

template <StructuredTask T>
struct TrainResult {
  Vector weights;
  TrainReport report;
};

/// Order of examples in `epoch` (1-based).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch);

template <StructuredTask T>
EvalResult evaluate(const T& task, const Vector& w, const Dataset<T>& data) {
  if (data.empty()) throw Error(ErrorCode::InvalidConfig, "evaluate: empty dataset");
  double cost = 0.0;
  std::size_t errors = 0;
  for (const auto& ex : data) {
    const auto yhat = task.decode(w, ex.input);
    cost += task.cost(ex.target, yhat);
    if (!(yhat == ex.target)) ++errors;
  }
  const auto n = static_cast<double>(data.size());
  return {cost / n, static_cast<double>(errors) / n};
}

template <StructuredTask T>
TrainResult<T> sgd_train(const T& task, const Dataset<T>& train, const TrainConfig& cfg,
                         const Dataset<T>* eval = nullptr) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::InvalidConfig, "sgd_train: empty training set");
  if constexpr (!CostAugmentedTask<T>) {
    if (cfg.rule.needs_cost_augmented_decode()) {
      throw Error(ErrorCode::UnsupportedTask,
                  std::string(to_string(cfg.rule.kind)) + " needs cost-augmented decoding");
    }
  }
  const auto d = static_cast<Eigen::Index>(task.dim());
  TrainResult<T> result;
  result.report.initialization = cfg.initial_weights ? "explicit" : "zeros";
  Vector w = cfg.initial_weights ? *cfg.initial_weights : Vector::Zero(d);
  require_dim(w, task.dim(), "initial weights");
  Vector sum = Vector::Zero(d);
  std::uint64_t t = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double surrogate = 0.0;
    bool has_surrogate = true;
    for (std::size_t i : epoch_order(train.size(), cfg.shuffle_seed, epoch)) {
      ++t;
      const StepContext ctx{learning_rate(cfg, t), cfg.lambda};
      UpdateRule rule = cfg.rule;
      rule.rng_seed = derive_seed(cfg.rule.rng_seed, {t});
      StepOutcome out = apply_rule(rule, task, w, train[i].input, train[i].target, ctx);
      if (out.surrogate) {
        surrogate += *out.surrogate;
      } else {
        has_surrogate = false;
      }
      w = std::move(out.weights);
      if (cfg.average) sum += w;
    }
    const Vector& model = cfg.average ? Vector(sum / static_cast<double>(t)) : w;
    EpochRecord rec;
    rec.epoch = epoch;
    if (has_surrogate) rec.mean_surrogate_loss = surrogate / static_cast<double>(train.size());
    const EvalResult tr = evaluate(task, model, train);
    rec.train_mean_cost = tr.mean_cost;
    rec.train_error_rate = tr.error_rate;
    if (eval != nullptr && !eval->empty()) {
      const EvalResult ev = evaluate(task, model, *eval);
      rec.eval_mean_cost = ev.mean_cost;
      rec.eval_error_rate = ev.error_rate;
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(rec);
  }
  result.weights = (cfg.average && t > 0) ? Vector(sum / static_cast<double>(t)) : w;
  return result;
}

// GMM / CD-HMM emission training.

struct GmmEvalResult {
  double mean_cost = 0.0;   // mean normalized Hamming cost
  double error_rate = 0.0;  // fraction of utterances not decoded exactly
};

GmmEvalResult evaluate_gmm(const std::vector<Utterance>& data, const HmmParams& hmm,
                           const GmmStateModel& gmm);

struct GmmTrainResult {
  GmmStateModel model;
  TrainReport report;
};

/// Runs gmm_step over the utterances; `cfg.rule.kind` must be PERCEPTRON or
/// ORBIT. `cfg.lambda`, `cfg.average` and `cfg.initial_weights` are not used.
GmmTrainResult gmm_train(const std::vector<Utterance>& train, const HmmParams& hmm,
                         const GmmStateModel& initial, const TrainConfig& cfg,
                         const std::vector<Utterance>* eval = nullptr);

}  // namespace orbit
