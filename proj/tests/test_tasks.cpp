#include <functional>
#include <limits>
#include <set>

#include <doctest.h>

#include "orbit/costs.hpp"
#include "orbit/rng.hpp"
#include "orbit/tasks/alignment.hpp"
#include "orbit/tasks/multiclass.hpp"
#include "orbit/tasks/vowel.hpp"
#include "table_task.hpp"

using namespace orbit;
using orbit::testing::vec;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an orbit::Error");
  return ErrorCode::Io;
}

// Every strictly increasing K-subset of {1..T}, in lexicographic order.
std::vector<std::vector<int>> monotone_sequences(int t, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int from) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int v = from; v <= t; ++v) {
      cur.push_back(v);
      rec(v + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

template <class T, class L>
L first_argmax(const T& task, const Vector& w, const typename T::Input& x, const std::vector<L>& labels,
               const L* target = nullptr, double scale = 0.0) {
  L best = labels.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (const auto& y : labels) {
    double v = w.dot(task.phi(x, y));
    if (target != nullptr) v += scale * task.cost(*target, y);
    if (v > best_v) best_v = v, best = y;
  }
  return best;
}

AlignmentInput random_alignment_input(Rng& rng, int t, int k, int d) {
  AlignmentInput x{Eigen::MatrixXd(t, d), k};
  for (int r = 0; r < t; ++r) x.frames.row(r) = standard_normal_vector(rng, d).transpose();
  return x;
}

}  // namespace

// --- costs -----------------------------------------------------------------

TEST_CASE("zero-one cost") {
  CHECK(zero_one_cost(3, 3) == 0.0);
  CHECK(zero_one_cost(3, 7) == 1.0);
  CHECK(zero_one_cost(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3}) == 0.0);
  CHECK(zero_one_cost(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 4}) == 1.0);
}

TEST_CASE("random cost matrix") {
  const auto m2 = random_cost_matrix(2, 5);
  CHECK(m2(0, 0) == 0.0);
  CHECK(m2(1, 1) == 0.0);
  CHECK((m2(0, 1) == 1.0 || m2(0, 1) == 2.0));
  CHECK((m2(1, 0) == 1.0 || m2(1, 0) == 2.0));
  CHECK(random_cost_matrix(10, 9).values() == random_cost_matrix(10, 9).values());
  CHECK(random_cost_matrix(10, 9).values() != random_cost_matrix(10, 10).values());

  // 101 x 101 has 10100 off-diagonal entries.
  const auto big = random_cost_matrix(101, 3);
  int ones = 0, total = 0;
  for (int r = 0; r < big.size(); ++r) {
    for (int c = 0; c < big.size(); ++c) {
      if (r == c) continue;
      ++total;
      ones += big(r, c) == 1.0;
      REQUIRE((big(r, c) == 1.0 || big(r, c) == 2.0));
    }
  }
  CHECK(std::abs(static_cast<double>(ones) / total - 0.5) <= 0.02);
}

TEST_CASE("cost matrix validation and serialization") {
  CHECK(code_of([] { CostMatrix(Eigen::MatrixXd{{0, 1}, {1, 1}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { CostMatrix(Eigen::MatrixXd{{0, -1}, {1, 0}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { CostMatrix(Eigen::MatrixXd(2, 3)); }) == ErrorCode::DimMismatch);
  const auto m = random_cost_matrix(4, 2);
  CHECK(CostMatrix::from_json(m.to_json()).values() == m.values());
  CHECK(m.scaled(1.0 / m.max_entry()).max_entry() == 1.0);
  CHECK(CostMatrix::zero_one(3).values() == (Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3)));
}

TEST_CASE("tau-insensitive alignment cost") {
  const AlignmentCostConfig tau2{2.0};
  CHECK(tau_insensitive_cost({10, 50}, {10, 50}, tau2) == 0.0);
  CHECK(tau_insensitive_cost({10, 50}, {12, 45}, tau2) == 1.5);
  CHECK(tau_insensitive_cost({10, 50}, {11, 48}, tau2) == 0.0);
  CHECK(boundary_hinge(10, 15, 2.0) == 3.0);
  CHECK(code_of([] { tau_insensitive_cost({1, 2}, {1}, {}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("vowel cost") {
  CHECK(vowel_cost({100, 200}, {100, 200}, {3, 4}) == 0.0);
  CHECK(vowel_cost({100, 200}, {105, 190}, {0, 20}) == 5.0);
  CHECK(vowel_cost({100, 200}, {105, 190}, {0, 0}) == 15.0);
  CHECK(vowel_cost({100, 200}, {97, 204}, {0, 0}) == 7.0);
}

TEST_CASE("normalized hamming cost") {
  CHECK(normalized_hamming_cost({0, 1, 2, 2}, {0, 1, 2, 2}) == 0.0);
  CHECK(normalized_hamming_cost({0, 1, 2, 2}, {0, 2, 2, 1}) == 0.5);
  CHECK(code_of([] { normalized_hamming_cost({0, 1}, {0}); }) == ErrorCode::LengthMismatch);
}

// --- multiclass -------------------------------------------------------------

TEST_CASE("multiclass decode") {
  const MulticlassTask task(2, 2);
  // Kesler layout: block c holds w^c.
  CHECK(task.decode(vec({1, 0, 0, 1}), vec({2, 1})) == 0);
  CHECK(task.decode(vec({0, 0, 0, 0}), vec({2, 1})) == 0);
  CHECK(task.decode(vec({1, 0, 0, 1}), vec({1, 2})) == 1);
  CHECK(task.decode(10.0 * vec({1, 0, 0, 1}), vec({1, 2})) == 1);
  CHECK(task.phi(vec({2, 1}), 1) == vec({0, 0, 2, 1}));
  CHECK(code_of([&] { task.decode(vec({1, 0, 0}), vec({2, 1})); }) == ErrorCode::DimMismatch);
  CHECK(code_of([&] { task.decode(vec({1, 0, 0, 1}), vec({2, 1, 3})); }) == ErrorCode::DimMismatch);
}

TEST_CASE("multiclass cost-augmented decode") {
  const MulticlassTask task(3, 2);
  CHECK(task.cost_augmented_decode(Vector::Zero(6), vec({1, 1}), 0, 1.0) == 1);
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const MulticlassTask t(3, 2, random_cost_matrix(3, i));
    const Vector w = standard_normal_vector(rng, 6);
    const Vector x = standard_normal_vector(rng, 2);
    const int y = static_cast<int>(rng() % 3);
    const double scale = 2.0 * standard_normal_vector(rng, 1)[0];
    CHECK(t.cost_augmented_decode(w, x, y, 0.0) == t.decode(w, x));
    const std::vector<int> labels{0, 1, 2};
    CHECK(t.cost_augmented_decode(w, x, y, scale) == first_argmax(t, w, x, labels, &y, scale));
  }
}

TEST_CASE("multiclass synthetic data") {
  MulticlassSynthConfig cfg{2, 1, 200, 10.0, 0.5, 4};
  const auto data = synth_multiclass(cfg);
  REQUIRE(data.size() == 200);
  // Centres at +10 and -10 on the only axis: w^0 = 1, w^1 = -1 separates them.
  const MulticlassTask task(2, 1);
  int errors = 0;
  for (const auto& ex : data) errors += task.decode(vec({1, -1}), ex.input) != ex.target;
  CHECK(errors == 0);
  const auto again = synth_multiclass(cfg);
  for (std::size_t i = 0; i < data.size(); ++i) {
    REQUIRE(data[i].input == again[i].input);
    REQUIRE(data[i].target == again[i].target);
  }
}

// --- alignment --------------------------------------------------------------

TEST_CASE("alignment decode edge cases") {
  const AlignmentTask task(2);
  Rng rng(3);
  const auto x = random_alignment_input(rng, 4, 4, 2);
  CHECK(task.decode(standard_normal_vector(rng, 3), x) == std::vector<int>{1, 2, 3, 4});
  const auto x5 = random_alignment_input(rng, 5, 2, 2);
  CHECK(task.decode(Vector::Zero(3), x5) == std::vector<int>{1, 2});
  CHECK(task.label_count(x5) == 10);
  CHECK(task.enumerate_labels(x5) == monotone_sequences(5, 2));

  const auto infeasible = random_alignment_input(rng, 3, 4, 2);
  CHECK(code_of([&] { task.decode(Vector::Zero(3), infeasible); }) == ErrorCode::Infeasible);
  CHECK(code_of([&] { task.phi(x5, {1}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { task.phi(x5, {3, 3}); }) == ErrorCode::InvalidInterval);
  CHECK(code_of([&] { task.phi(x5, {2, 6}); }) == ErrorCode::InvalidInterval);
  CHECK(code_of([&] { task.phi(x5, {0, 2}); }) == ErrorCode::InvalidInterval);
}

TEST_CASE("alignment DP matches enumeration") {
  Rng rng(41);
  for (int i = 0; i < 150; ++i) {
    const int k = 1 + static_cast<int>(rng() % 3);
    const int t = k + static_cast<int>(rng() % (8 - k + 1));
    const AlignmentTask task(3, AlignmentCostConfig{static_cast<double>(rng() % 3)});
    const auto x = random_alignment_input(rng, t, k, 3);
    const Vector w = standard_normal_vector(rng, 3);
    const auto labels = monotone_sequences(t, k);
    const auto target = labels[rng() % labels.size()];
    CHECK(task.decode(w, x) == first_argmax(task, w, x, labels));
    CHECK(task.cost_augmented_decode(w, x, target, 0.0) == task.decode(w, x));
    const double scale = 3.0 * standard_normal_vector(rng, 1)[0];
    CHECK(task.cost_augmented_decode(w, x, target, scale) == first_argmax(task, w, x, labels, &target, scale));
  }
}

TEST_CASE("alignment large augmentation on zero weights maximizes disagreement") {
  const AlignmentTask task(2);
  Rng rng(8);
  const auto x = random_alignment_input(rng, 6, 2, 2);
  const std::vector<int> target{1, 2};
  const auto got = task.cost_augmented_decode(Vector::Zero(3), x, target, 100.0);
  double max_cost = 0.0;
  for (const auto& y : monotone_sequences(6, 2)) max_cost = std::max(max_cost, task.cost(target, y));
  CHECK(task.cost(target, got) == max_cost);
  CHECK(got == std::vector<int>{5, 6});
}

TEST_CASE("alignment planted signal") {
  AlignmentSynthConfig cfg;
  cfg.noise = 0.0;
  cfg.count = 100;
  cfg.seed = 12;
  const auto data = synth_alignment(cfg);
  const AlignmentTask task(cfg.frame_dim);
  for (const auto& ex : data) {
    REQUIRE(task.cost(ex.target, task.decode(vec({1, 0, 0}), ex.input)) == 0.0);
  }
}

// --- vowel ------------------------------------------------------------------

TEST_CASE("vowel decode") {
  const VowelTask task;
  Rng rng(5);
  const Eigen::MatrixXd two = Eigen::MatrixXd::Random(2, 22);
  CHECK(task.decode(standard_normal_vector(rng, 5), two) == VowelSpan{1, 2});
  CHECK(code_of([&] { task.decode(Vector::Zero(5), Eigen::MatrixXd::Zero(1, 22)); }) == ErrorCode::Infeasible);
  CHECK(code_of([&] { task.decode(Vector::Zero(5), Eigen::MatrixXd::Zero(5, 21)); }) == ErrorCode::DimMismatch);

  for (int i = 0; i < 60; ++i) {
    const int t = 2 + static_cast<int>(rng() % 11);
    Eigen::MatrixXd x(t, 22);
    for (int r = 0; r < t; ++r) x.row(r) = standard_normal_vector(rng, 22).transpose();
    const Vector w = standard_normal_vector(rng, 5);
    // Independent double loop over onset < offset.
    std::vector<VowelSpan> spans;
    for (int b = 1; b <= t; ++b) {
      for (int e = b + 1; e <= t; ++e) spans.push_back({b, e});
    }
    CHECK(task.enumerate_labels(x) == spans);
    CHECK(task.decode(w, x) == first_argmax(task, w, x, spans));
    const VowelSpan target = spans[rng() % spans.size()];
    CHECK(task.cost_augmented_decode(w, x, target, 0.0) == task.decode(w, x));
    CHECK(task.cost_augmented_decode(w, x, target, 0.7) == first_argmax(task, w, x, spans, &target, 0.7));
  }
}

TEST_CASE("vowel synthetic data is deterministic") {
  VowelSynthConfig cfg;
  cfg.count = 20;
  cfg.seed = 6;
  const auto a = synth_vowel(cfg);
  const auto b = synth_vowel(cfg);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].input == b[i].input);
    CHECK(a[i].target == b[i].target);
    CHECK(a[i].target.onset < a[i].target.offset);
  }
}
