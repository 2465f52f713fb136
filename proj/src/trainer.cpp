#include "orbit/trainer.hpp"

#include "orbit/costs.hpp"

namespace orbit {

std::string_view to_string(Schedule s) {
  return s == Schedule::Constant ? "CONSTANT" : "INV_SQRT";
}

Schedule schedule_from_string(std::string_view name) {
  if (name == "CONSTANT") return Schedule::Constant;
  if (name == "INV_SQRT") return Schedule::InvSqrt;
  throw Error(ErrorCode::InvalidConfig, "unknown schedule '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 0");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) {
    throw Error(ErrorCode::InvalidConfig, "eta0 must be finite and positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must be finite and non-negative");
  }
  if (eta0 * lambda >= 1.0) {
    throw Error(ErrorCode::ConfigUnstable, "eta0 * lambda must be < 1 to keep the decay positive");
  }
  rule.validate();
}

double learning_rate(const TrainConfig& cfg, std::uint64_t t) {
  if (t < 1) throw Error(ErrorCode::InvalidConfig, "step index starts at 1");
  if (cfg.schedule == Schedule::Constant) return cfg.eta0;
  return cfg.eta0 / std::sqrt(static_cast<double>(t));
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch) {
  return seeded_permutation(n, derive_seed(shuffle_seed, {static_cast<std::uint64_t>(epoch)}));
}

std::vector<nlohmann::json> TrainReport::to_json_lines() const {
  std::vector<nlohmann::json> lines;
  for (const auto& r : epochs) {
    nlohmann::json j;
    j["epoch"] = r.epoch;
    j["initialization"] = initialization;
    j["mean_surrogate_loss"] =
        r.mean_surrogate_loss ? nlohmann::json(*r.mean_surrogate_loss) : nlohmann::json(nullptr);
    j["train_mean_cost"] = r.train_mean_cost;
    j["train_error_rate"] = r.train_error_rate;
    j["eval_mean_cost"] = r.eval_mean_cost ? nlohmann::json(*r.eval_mean_cost) : nlohmann::json(nullptr);
    j["eval_error_rate"] =
        r.eval_error_rate ? nlohmann::json(*r.eval_error_rate) : nlohmann::json(nullptr);
    lines.push_back(std::move(j));
  }
  return lines;
}

std::vector<nlohmann::json> TrainReport::timing_lines() const {
  std::vector<nlohmann::json> lines;
  for (const auto& r : epochs) lines.push_back({{"epoch", r.epoch}, {"wall_time_s", r.wall_time_s}});
  return lines;
}

GmmEvalResult evaluate_gmm(const std::vector<Utterance>& data, const HmmParams& hmm,
                           const GmmStateModel& gmm) {
  if (data.empty()) throw Error(ErrorCode::InvalidConfig, "evaluate: empty dataset");
  double cost = 0.0;
  std::size_t errors = 0;
  for (const auto& utt : data) {
    const auto yhat = viterbi_decode(utt.frames, hmm, gmm);
    cost += normalized_hamming_cost(utt.states, yhat);
    if (yhat != utt.states) ++errors;
  }
  const auto n = static_cast<double>(data.size());
  return {cost / n, static_cast<double>(errors) / n};
}

GmmTrainResult gmm_train(const std::vector<Utterance>& train, const HmmParams& hmm,
                         const GmmStateModel& initial, const TrainConfig& cfg,
                         const std::vector<Utterance>* eval) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::InvalidConfig, "gmm_train: empty training set");
  const GmmRule rule = gmm_rule_from_kind(cfg.rule.kind);
  hmm.validate();
  initial.validate();
  GmmTrainResult result{initial, {}};
  result.report.initialization = "explicit";
  std::uint64_t t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i : epoch_order(train.size(), cfg.shuffle_seed, epoch)) {
      ++t;
      const StepContext ctx{learning_rate(cfg, t), cfg.lambda};
      result.model = gmm_step(train[i], hmm, result.model, ctx, rule).model;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    const GmmEvalResult tr = evaluate_gmm(train, hmm, result.model);
    rec.train_mean_cost = tr.mean_cost;
    rec.train_error_rate = tr.error_rate;
    if (eval != nullptr && !eval->empty()) {
      const GmmEvalResult ev = evaluate_gmm(*eval, hmm, result.model);
      rec.eval_mean_cost = ev.mean_cost;
      rec.eval_error_rate = ev.error_rate;
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(rec);
  }
  return result;
}

}  // namespace orbit
