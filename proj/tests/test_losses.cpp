#include <cmath>
#include <numbers>

#include <doctest.h>

#include "orbit/losses.hpp"
#include "orbit/rng.hpp"
#include "orbit/tasks/multiclass.hpp"
#include "table_task.hpp"

using namespace orbit;
using orbit::testing::TableTask;
using orbit::testing::vec;

namespace {

// Upper tail of N(0, 1) by composite Simpson on [m, m + 40]; independent of erfc.
double simpson_tail(double m) {
  const int n = 400000;
  const double a = m, b = m + 40.0, h = (b - a) / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

bool near(const Vector& a, const Vector& b, double tol = 1e-12) {
  return a.size() == b.size() && (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

TEST_CASE("score is a dot product") {
  CHECK(score(vec({1, 2}), vec({3, 4})) == 11.0);
  CHECK(score(vec({0, 0}), vec({-7, 5})) == 0.0);
  CHECK(score(vec({0.6, 0.8}), vec({0.6, 0.8})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(score(vec({1, 2}), vec({1, 2, 3})), Error);
}

TEST_CASE("feature differences") {
  const auto task = TableTask::zero_one({vec({1, 0}), vec({0, 1}), vec({0.5, 0.5}), vec({0.5, 0.5})});
  CHECK(near(delta_phi(task, 0, 0, 1), vec({1, -1})));
  CHECK(near(delta_phi(task, 0, 1, 1), vec({0, 0})));
  CHECK(near(delta_phi(task, 0, 2, 3), vec({0, 0})));
  CHECK(near(delta_phi_hat(task, 0, 2, 3), vec({0, 0})));
  CHECK(near(delta_phi_hat(task, 0, 1, 1), vec({0, 0})));

  const auto t2 = TableTask::zero_one({vec({3, 4}), vec({0, 0}), vec({0, 2})});
  CHECK(near(delta_phi_hat(t2, 0, 0, 1), vec({0.6, 0.8}), 1e-15));
  CHECK(near(delta_phi_hat(t2, 0, 1, 2), vec({0, -1}), 1e-15));
}

TEST_CASE("gaussian upper tail against quadrature") {
  CHECK(gaussian_upper_tail(0.0) == 0.5);
  CHECK(simpson_tail(1.0) == doctest::Approx(0.158655253931).epsilon(1e-11));
  CHECK(gaussian_upper_tail(1.0) == doctest::Approx(0.158655253931457).epsilon(1e-13));
  CHECK(gaussian_upper_tail(-1.0) == doctest::Approx(0.841344746068543).epsilon(1e-13));
  for (double m : {-3.0, -2.0, -0.5, 0.3, 2.5, 5.0}) {
    CAPTURE(m);
    CHECK(gaussian_upper_tail(m) == doctest::Approx(simpson_tail(m)).epsilon(1e-9));
    CHECK(gaussian_upper_tail(m) + gaussian_upper_tail(-m) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // Accurate deep in the tail, where 1 - Phi(m) would cancel to zero.
  CHECK(gaussian_upper_tail(10.0) == doctest::Approx(7.61985302416e-24).epsilon(1e-9));
}

TEST_CASE("orbit loss values") {
  // phi_0 = 0, phi_1 = e_1: w = (2, 0) predicts 1 with margin w.dphi(0, 1) = -2.
  TableTask task{{vec({0, 0}), vec({1, 0})}, Eigen::MatrixXd{{0.0, 0.7}, {1.0, 0.0}}};
  CHECK(orbit_loss_value(task, vec({2, 0}), 0, 1) == 0.0);
  CHECK(orbit_loss_value(task, vec({2, 0}), 0, 0) == doctest::Approx(0.684074908).epsilon(1e-8));
  CHECK(orbit_loss_value(task, vec({2, 0}), 0, 0) ==
        doctest::Approx(0.7 * simpson_tail(-2.0)).epsilon(1e-10));

  // Zero margin: all scores tie, the decoder picks label 0, target is 1.
  const auto tie = TableTask::zero_one({vec({1, 0}), vec({0, 1})});
  CHECK(orbit_loss_value(tie, vec({0, 0}), 0, 1) == 0.5);
}

TEST_CASE("orbit update") {
  const StepContext plain{1.0, 0.0};
  const auto tie = TableTask::zero_one({vec({1, 0}), vec({0, 1})});
  const Vector dphi = vec({-1, 1}) / std::sqrt(2.0);

  SUBCASE("correct prediction only decays") {
    const Vector w = vec({3, 1});
    CHECK(near(orbit_update(tie, w, 0, 0, {0.5, 0.2}), 0.9 * w));
  }
  SUBCASE("zero margin takes the full step") {
    CHECK(near(orbit_update(tie, vec({0, 0}), 0, 1, plain), dphi, 1e-15));
  }
  SUBCASE("margin -2 damps by exp(-2)") {
    TableTask task{{vec({0, 0}), vec({1, 0})}, Eigen::MatrixXd{{0.0, 0.7}, {1.0, 0.0}}};
    const Vector w = vec({2, 0});
    const Vector got = orbit_update(task, w, 0, 0, {0.3, 0.0});
    CHECK(std::exp(-2.0) == doctest::Approx(0.135335).epsilon(1e-6));
    CHECK(near(got, w + 0.3 * 0.7 * std::exp(-2.0) * vec({-1, 0}), 1e-15));
  }
  SUBCASE("surrogate reported alongside the step") {
    const auto out = orbit_step(tie, vec({0, 0}), 0, 1, plain, false);
    REQUIRE(out.surrogate);
    CHECK(*out.surrogate == 0.5);
  }
}

TEST_CASE("simplified orbit update") {
  TableTask task{{vec({0, 0}), vec({0.6, 0.8})}, Eigen::MatrixXd{{0.0, 2.0}, {2.0, 0.0}}};
  // w = 0 ties, so label 0 is predicted for target 1; dphi(1, 0) = (0.6, 0.8).
  CHECK(near(orbit_update_simplified(task, vec({0, 0}), 0, 1, {0.5, 0.0}), vec({0.6, 0.8}), 1e-15));
  const Vector w = vec({-1, -1});
  CHECK(near(orbit_update_simplified(task, w, 0, 0, {0.5, 0.4}), 0.8 * w));
}

TEST_CASE("perceptron update") {
  const auto task = TableTask::zero_one({vec({1, 0}), vec({0, 1})});
  const Vector w = vec({1, 0});
  const Vector dphi = vec({-1, 1}) / std::sqrt(2.0);
  CHECK(near(perceptron_update(task, w, 0, 0, {1.0, 0.3}), 0.7 * w));
  CHECK(near(perceptron_update(task, w, 0, 1, {1.0, 0.0}), w + dphi, 1e-15));
  CHECK(near(perceptron_update(task, w, 0, 1, {1.0, 0.5}), 0.5 * w + dphi, 1e-15));
}

TEST_CASE("simplified orbit equals perceptron under 0-1 cost") {
  const MulticlassTask task(4, 3);
  Rng rng(77);
  Vector wa = Vector::Zero(static_cast<Eigen::Index>(task.dim()));
  Vector wb = wa;
  for (int i = 0; i < 300; ++i) {
    const Vector x = standard_normal_vector(rng, 3);
    const int y = static_cast<int>(rng() % 4);
    const StepContext ctx{0.5 / std::sqrt(i + 1.0), 0.0};
    wa = orbit_update_simplified(task, wa, x, y, ctx);
    wb = perceptron_update(task, wb, x, y, ctx);
    REQUIRE((wa.array() == wb.array()).all());
  }
}

TEST_CASE("hinge loss") {
  const auto three = TableTask::zero_one({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})});
  CHECK(hinge_loss_value(three, vec({0, 0, 0}), 0, 1) == 1.0);
  CHECK(hinge_loss_value(three, vec({2, 1, 0}), 0, 0) == 0.0);  // max(2, 1 + 1, 0 + 1) - 2
  CHECK(hinge_loss_value(three, vec({2, 1, 0}), 0, 1) == 2.0);

  SUBCASE("target wins the augmented argmax") {
    const Vector w = vec({5, 0, 0});
    CHECK(near(hinge_update(three, w, 0, 0, {0.5, 0.2}), 0.9 * w));
  }
  SUBCASE("zero weights step along phi(y) - phi(y_aug)") {
    // Augmented argmax for y = 1 on zero weights: label 0 (smallest wrong label).
    CHECK(near(hinge_update(three, vec({0, 0, 0}), 0, 1, {1.0, 0.0}), vec({-1, 1, 0})));
  }
  SUBCASE("two labels: step equals the enumerated subgradient") {
    TableTask two{{vec({0.3, -1.2}), vec({1.1, 0.4})}, Eigen::MatrixXd{{0.0, 1.5}, {0.5, 0.0}}};
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      const Vector w = standard_normal_vector(rng, 2);
      const int y = static_cast<int>(rng() % 2);
      // Enumerate both labels for the maximizer of cost + score.
      int best = 0;
      double best_v = -1e300;
      for (int j = 0; j < 2; ++j) {
        const double v = two.cost(y, j) + w.dot(two.features[j]);
        if (v > best_v) best_v = v, best = j;
      }
      const Vector sub = two.features[y] - two.features[best];
      CHECK(near(hinge_update(two, w, 0, y, {0.2, 0.1}), 0.98 * w + 0.2 * sub, 1e-14));
      CHECK(hinge_loss_value(two, w, 0, y) == doctest::Approx(best_v - w.dot(two.features[y])));
    }
  }
}

TEST_CASE("ramp loss") {
  const auto three = TableTask::zero_one({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})});
  SUBCASE("prediction equals augmented prediction: decay only") {
    const Vector w = vec({5, 0, 0});
    CHECK(near(ramp_update(three, w, 0, 1, {1.0, 0.1}), 0.9 * w));
  }
  SUBCASE("zero weights move mass from the augmented label to the prediction") {
    // y = 0: prediction 0 (tie-break), augmented prediction 1.
    CHECK(near(ramp_update(three, vec({0, 0, 0}), 0, 0, {1.0, 0.0}), vec({1, -1, 0})));
  }
  SUBCASE("value is non-negative") {
    TableTask task{{vec({1, 2}), vec({-1, 0.5}), vec({0.2, -0.3}), vec({0, 1})},
                   Eigen::MatrixXd{{0, 1, 2, 1}, {2, 0, 1, 1}, {1, 1, 0, 2}, {1, 2, 2, 0}}};
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
      const Vector w = 3.0 * standard_normal_vector(rng, 2);
      CHECK(ramp_loss_value(task, w, 0, static_cast<int>(rng() % 4)) >= 0.0);
    }
  }
}

TEST_CASE("probit loss estimate") {
  SUBCASE("zero cost gives zero mean and zero stderr") {
    TableTask task{{vec({1, 0}), vec({0, 1})}, Eigen::MatrixXd::Zero(2, 2)};
    const auto est = probit_loss_estimate(task, vec({0.2, 0.1}), 0, 1, 500, 3);
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.n == 500);
  }
  SUBCASE("zero weights on two labels flip half the time") {
    const auto task = TableTask::zero_one({vec({1, 0}), vec({0, 1})});
    const auto est = probit_loss_estimate(task, vec({0, 0}), 0, 0, 20000, 11);
    CHECK(std::abs(est.mean - 0.5) <= 3.0 * est.std_error);
  }
  SUBCASE("binary closed form Q(m) * cost") {
    TableTask task{{vec({0.5, -0.2, 0.1}), vec({-0.3, 0.4, 0.9})}, Eigen::MatrixXd{{0, 0.8}, {0.6, 0}}};
    const Vector w = vec({0.7, -0.4, -0.5});
    REQUIRE(task.decode(w, 0) == 0);
    const double m = w.dot(delta_phi_hat(task, 0, 0, 1));
    const auto est = probit_loss_estimate(task, w, 0, 0, 40000, 21);
    CHECK(std::abs(est.mean - 0.8 * simpson_tail(m)) <= 3.0 * est.std_error);
  }
  SUBCASE("deterministic under seed") {
    const auto task = TableTask::zero_one({vec({1, 0}), vec({0, 1})});
    const auto a = probit_loss_estimate(task, vec({0.1, 0}), 0, 0, 300, 4);
    const auto b = probit_loss_estimate(task, vec({0.1, 0}), 0, 0, 300, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
  }
}

TEST_CASE("probit update") {
  UpdateRule rule{RuleKind::Probit, 0.0, 1, 42};
  SUBCASE("zero cost only decays") {
    TableTask task{{vec({1, 0}), vec({0, 1})}, Eigen::MatrixXd::Zero(2, 2)};
    rule.probit_samples = 50;
    CHECK(near(probit_update(task, vec({1, 2}), 0, 1, {0.5, 0.2}, rule), 0.9 * vec({1, 2})));
  }
  SUBCASE("single sample with unit cost") {
    // Identical features: every perturbation decodes label 0, so cost(1, .) = 1.
    const auto task = TableTask::zero_one({vec({1, 1}), vec({1, 1})});
    const Vector w = vec({0.3, -0.2});
    const Vector eps = probit_perturbation(rule.rng_seed, 0, 2);
    CHECK(near(probit_update(task, w, 0, 1, {0.5, 0.2}, rule), 0.9 * w - 0.5 * eps, 1e-15));
  }
  SUBCASE("gradient estimate is unbiased for the closed-form gradient") {
    TableTask task{{vec({1, 0}), vec({0, 1})}, Eigen::MatrixXd{{0, 1}, {1, 0}}};
    const Vector w = vec({0.4, -0.1});
    const Vector dphi = delta_phi_hat(task, 0, 0, 1);
    const double m = w.dot(dphi);
    // d/dw Q(w . dphi) = -pdf(m) dphi.
    const Vector exact = -std::exp(-0.5 * m * m) / std::sqrt(2 * std::numbers::pi) * dphi;
    const int batches = 400;
    Vector sum = Vector::Zero(2), sum_sq = Vector::Zero(2);
    for (int b = 0; b < batches; ++b) {
      const Vector g = probit_gradient_estimate(task, w, 0, 0, 100, derive_seed(8, {std::uint64_t(b)}));
      sum += g;
      sum_sq += g.cwiseProduct(g);
    }
    const Vector mean = sum / batches;
    const Vector var = (sum_sq / batches - mean.cwiseProduct(mean)) * batches / (batches - 1.0);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(mean[i] - exact[i]) <= 3.0 * std::sqrt(var[i] / batches));
    }
  }
}

TEST_CASE("direct loss update") {
  TableTask task{{vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})},
                 Eigen::MatrixXd{{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}};
  SUBCASE("no change in argmax only decays") {
    const Vector w = vec({10, 0, 0});
    CHECK(near(direct_loss_update(task, w, 0, 1, {1.0, 0.1}, {RuleKind::Direct, 1.1}), 0.9 * w));
  }
  SUBCASE("epsilon 1.1 matches enumeration") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
      const Vector w = standard_normal_vector(rng, 3);
      const int y = static_cast<int>(rng() % 3);
      int yhat = 0, ydir = 0;
      double best = -1e300, best_dir = -1e300;
      for (int j = 0; j < 3; ++j) {
        const double s = w[j];
        if (s > best) best = s, yhat = j;
        if (s + 1.1 * task.costs(y, j) > best_dir) best_dir = s + 1.1 * task.costs(y, j), ydir = j;
      }
      const Vector expected = 0.95 * w + (0.5 / 1.1) * (task.features[yhat] - task.features[ydir]);
      CHECK(near(direct_loss_update(task, w, 0, y, {0.5, 0.1}, {RuleKind::Direct, 1.1}), expected, 1e-14));
    }
  }
  SUBCASE("negative epsilon is accepted") {
    const UpdateRule rule{RuleKind::Direct, -1.52};
    CHECK_NOTHROW(rule.validate());
    CHECK_NOTHROW(direct_loss_update(task, vec({0.1, 0.2, 0.3}), 0, 0, {0.1, 0.0}, rule));
  }
  SUBCASE("zero epsilon is rejected") {
    try {
      direct_loss_update(task, vec({0.1, 0.2, 0.3}), 0, 0, {0.1, 0.0}, {RuleKind::Direct, 0.0});
      FAIL("expected ZERO_EPSILON");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroEpsilon);
    }
  }
}

TEST_CASE("rule names round-trip") {
  for (RuleKind k : {RuleKind::Orbit, RuleKind::OrbitSimplified, RuleKind::Perceptron, RuleKind::Hinge,
                     RuleKind::Ramp, RuleKind::Probit, RuleKind::Direct}) {
    CHECK(rule_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(rule_kind_from_string("SVM"), Error);
}

TEST_CASE("step context validation") {
  CHECK_THROWS_AS((StepContext{-1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((StepContext{0.1, -0.5}.validate()), Error);
  CHECK_NOTHROW((StepContext{0.1, 0.5}.validate()));
}
