#include <doctest.h>

#include <algorithm>
#include <functional>

#include "orbit/gmm_hmm.hpp"
#include "orbit/tasks/multiclass.hpp"
#include "orbit/trainer.hpp"
#include "table_task.hpp"

using namespace orbit;
using orbit::testing::vec;

namespace {

// A task without cost-augmented decoding.
struct PlainTask {
  using Input = int;
  using Label = int;
  std::size_t dim() const { return 2; }
  Vector phi(const Input&, const Label& y) const { return y == 0 ? vec({1, 0}) : vec({0, 1}); }
  Label decode(const Vector& w, const Input&) const { return w[1] > w[0] ? 1 : 0; }
  double cost(const Label& y, const Label& yhat) const { return y == yhat ? 0.0 : 1.0; }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an orbit::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("learning rate schedules") {
  TrainConfig cfg;
  cfg.eta0 = 0.1;
  cfg.schedule = Schedule::InvSqrt;
  CHECK(learning_rate(cfg, 1) == 0.1);
  cfg.eta0 = 1.0;
  CHECK(learning_rate(cfg, 4) == 0.5);
  cfg.schedule = Schedule::Constant;
  CHECK(learning_rate(cfg, 1) == 1.0);
  CHECK(learning_rate(cfg, 1000) == 1.0);
  CHECK(schedule_from_string("INV_SQRT") == Schedule::InvSqrt);
  CHECK(schedule_from_string(to_string(Schedule::Constant)) == Schedule::Constant);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.eta0 = 10.0;
  cfg.lambda = 0.1;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::ConfigUnstable);
  cfg.lambda = 0.05;
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = -1;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
  cfg.epochs = 1;
  cfg.rule = {RuleKind::Direct, 0.0};
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::ZeroEpsilon);
}

TEST_CASE("epoch orders are seeded permutations") {
  const auto a = epoch_order(50, 3, 1);
  CHECK(a == epoch_order(50, 3, 1));
  CHECK(a != epoch_order(50, 3, 2));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("sgd_train") {
  const MulticlassTask task(2, 1);
  const auto data = synth_multiclass({2, 1, 60, 5.0, 0.5, 8});

  SUBCASE("zero epochs returns the initial weights") {
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.initial_weights = vec({0.3, -0.7});
    const auto r = sgd_train(task, data, cfg);
    CHECK(r.weights == vec({0.3, -0.7}));
    CHECK(r.report.epochs.empty());
    CHECK(r.report.initialization == "explicit");
  }
  SUBCASE("perceptron separates separable data") {
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.eta0 = 1.0;
    cfg.schedule = Schedule::Constant;
    cfg.rule.kind = RuleKind::Perceptron;
    const auto r = sgd_train(task, data, cfg);
    CHECK(r.report.epochs.back().train_error_rate == 0.0);
    CHECK(r.report.initialization == "zeros");
  }
  SUBCASE("identical configs give identical weights and reports") {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.lambda = 0.01;
    cfg.shuffle_seed = 5;
    for (RuleKind k : {RuleKind::Orbit, RuleKind::Probit, RuleKind::Hinge}) {
      cfg.rule.kind = k;
      const auto a = sgd_train(task, data, cfg, &data);
      const auto b = sgd_train(task, data, cfg, &data);
      CHECK((a.weights.array() == b.weights.array()).all());
      CHECK(a.report.to_json_lines() == b.report.to_json_lines());
      CHECK(a.report.to_json_lines().front().contains("wall_time_s") == false);
      CHECK(a.report.timing_lines().front().contains("wall_time_s"));
    }
  }
  SUBCASE("averaging reports the mean iterate") {
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.average = true;
    cfg.rule.kind = RuleKind::Perceptron;
    const Dataset<MulticlassTask> two{data[0], data[1]};
    const auto r = sgd_train(task, two, cfg);
    TrainConfig last = cfg;
    last.average = false;
    Vector w = Vector::Zero(2), sum = Vector::Zero(2);
    std::uint64_t t = 0;
    for (std::size_t i : epoch_order(2, cfg.shuffle_seed, 1)) {
      ++t;
      w = perceptron_update(task, w, two[i].input, two[i].target, {learning_rate(cfg, t), 0.0});
      sum += w;
    }
    CHECK((r.weights - sum / 2.0).norm() < 1e-15);
    CHECK((sgd_train(task, two, last).weights - w).norm() < 1e-15);
  }
  SUBCASE("rules needing cost-augmented decoding are rejected") {
    const PlainTask plain;
    const Dataset<PlainTask> d{{0, 1}};
    TrainConfig cfg;
    cfg.rule.kind = RuleKind::Ramp;
    CHECK(code_of([&] { sgd_train(plain, d, cfg); }) == ErrorCode::UnsupportedTask);
    cfg.rule.kind = RuleKind::Orbit;
    CHECK_NOTHROW(sgd_train(plain, d, cfg));
  }
}

TEST_CASE("evaluate") {
  const MulticlassTask task(2, 1);
  const auto clean = synth_multiclass({2, 1, 40, 5.0, 0.0, 1});
  const auto r = evaluate(task, vec({1, -1}), clean);
  CHECK(r.mean_cost == 0.0);
  CHECK(r.error_rate == 0.0);

  const MulticlassTask four(4, 2);
  const auto balanced = synth_multiclass({4, 2, 80, 3.0, 0.5, 2});
  // Zero weights tie every class, so decode returns class 0.
  const auto z = evaluate(four, Vector::Zero(8), balanced);
  const auto wrong = std::count_if(balanced.begin(), balanced.end(),
                                   [](const auto& ex) { return ex.target != 0; });
  CHECK(z.error_rate == static_cast<double>(wrong) / 80.0);
  CHECK(z.error_rate == doctest::Approx(0.75).epsilon(0.2));
  CHECK(z.mean_cost >= 0.0);
  CHECK_THROWS_AS(evaluate(task, vec({1, -1}), Dataset<MulticlassTask>{}), Error);
}

TEST_CASE("gmm training") {
  GmmSynthConfig cfg;
  cfg.count = 60;
  cfg.seed = 4;
  const auto synth = synth_gmm(cfg);
  TrainConfig tc;
  tc.epochs = 0;
  tc.rule.kind = RuleKind::Orbit;
  CHECK(gmm_train(synth.utterances, synth.hmm, synth.initial, tc).model.max_abs_diff(synth.initial) == 0.0);

  tc.epochs = 3;
  tc.eta0 = 0.05;
  const auto before = evaluate_gmm(synth.utterances, synth.hmm, synth.initial);
  for (RuleKind k : {RuleKind::Orbit, RuleKind::Perceptron}) {
    tc.rule.kind = k;
    const auto a = gmm_train(synth.utterances, synth.hmm, synth.initial, tc);
    const auto b = gmm_train(synth.utterances, synth.hmm, synth.initial, tc);
    CHECK(a.model.max_abs_diff(b.model) == 0.0);
    CHECK(a.report.epochs.back().train_mean_cost < before.mean_cost);
  }
  tc.rule.kind = RuleKind::Probit;
  CHECK(code_of([&] { gmm_train(synth.utterances, synth.hmm, synth.initial, tc); }) ==
        ErrorCode::UnsupportedTask);
}
