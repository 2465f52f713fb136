#include "orbit/suites.hpp"

#include <algorithm>
#include <cstring>

#include "orbit/costs.hpp"
#include "orbit/tasks/alignment.hpp"
#include "orbit/tasks/multiclass.hpp"
#include "orbit/tasks/vowel.hpp"

namespace orbit {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector unit_vector(Rng& rng, int p) {
  Vector v = standard_normal_vector(rng, p);
  while (v.norm() == 0.0) v = standard_normal_vector(rng, p);
  return v / v.norm();
}

/// Moves w along `dir` (unit) so that w . dir == target.
Vector with_margin(const Vector& w, const Vector& dir, double target) {
  return w + (target - w.dot(dir)) * dir;
}

CheckRecord summary(const std::string& name, nlohmann::json params, nlohmann::json estimates,
                    bool pass) {
  CheckRecord r;
  r.check = name;
  r.params = std::move(params);
  r.estimates = std::move(estimates);
  r.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return r;
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace

HmmParams random_hmm(int num_states, Rng& rng) {
  auto log_softmax = [](const Vector& v) {
    const double m = v.maxCoeff();
    const double lse = m + std::log((v.array() - m).exp().sum());
    return Vector(v.array() - lse);
  };
  HmmParams h;
  h.log_init = log_softmax(standard_normal_vector(rng, num_states));
  h.log_trans.resize(num_states, num_states);
  for (int s = 0; s < num_states; ++s) {
    h.log_trans.row(s) = log_softmax(standard_normal_vector(rng, num_states)).transpose();
  }
  return h;
}

Eigen::MatrixXd random_spd(int p, Rng& rng) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i) a.col(i) = standard_normal_vector(rng, p);
  Eigen::MatrixXd s = a * a.transpose() / p + 0.5 * Eigen::MatrixXd::Identity(p, p);
  return 0.5 * (s + s.transpose());
}

GmmStateModel random_gmm(int num_states, int num_components, int frame_dim, Rng& rng) {
  GmmStateModel g;
  g.frame_dim = frame_dim;
  for (int s = 0; s < num_states; ++s) {
    std::vector<Eigen::MatrixXd> comps;
    for (int c = 0; c < num_components; ++c) {
      const Vector mu = standard_normal_vector(rng, frame_dim);
      comps.push_back(build_phi(mu, random_spd(frame_dim, rng), uniform_real(rng, -1.0, 1.0)));
    }
    g.states.push_back(std::move(comps));
  }
  return g;
}

CheckRecord gradient_check_suite(int draws, double h, double max_abs_margin, double tolerance,
                                 std::uint64_t seed) {
  const MulticlassTask task(4, 3, random_cost_matrix(4, derive_seed(seed, {0})));
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(i)}));
    const Vector x = unit_vector(rng, task.input_dim());
    const int y = uniform_int(rng, 0, task.num_classes() - 1);
    const int yhat = (y + uniform_int(rng, 1, task.num_classes() - 1)) % task.num_classes();
    const Vector dphi = delta_phi_hat(task, x, y, yhat);
    const Vector w = with_margin(standard_normal_vector(rng, static_cast<int>(task.dim())), dphi,
                                 uniform_real(rng, -max_abs_margin, max_abs_margin));
    const double cost = task.cost(y, yhat);
    auto f = [&](const Vector& v) { return gaussian_upper_tail(v.dot(dphi)) * cost; };
    const Vector numeric = finite_diff_gradient(f, w, h);
    const Vector analytic = orbit_gradient(task, w, x, y, yhat);
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return summary("orbit_gradient",
                 {{"draws", draws}, {"h", h}, {"max_abs_margin", max_abs_margin},
                  {"tolerance", tolerance}, {"seed", seed}},
                 {{"max_relative_error", worst}}, worst < tolerance);
}

CheckRecord perceptron_equivalence_suite(int steps, std::uint64_t seed) {
  const MulticlassTask task(5, 6);
  Rng rng(derive_seed(seed, {0}));
  Vector w_orbit = Vector::Zero(static_cast<Eigen::Index>(task.dim()));
  Vector w_perc = w_orbit;
  int mismatches = 0;
  int updates = 0;
  const double eta0 = uniform_real(rng, 0.1, 1.0);
  for (int t = 1; t <= steps; ++t) {
    const Vector x = standard_normal_vector(rng, task.input_dim());
    const int y = uniform_int(rng, 0, task.num_classes() - 1);
    const StepContext ctx{eta0 / std::sqrt(static_cast<double>(t)), 0.0};
    if (task.decode(w_perc, x) != y) ++updates;
    w_orbit = orbit_update_simplified(task, w_orbit, x, y, ctx);
    w_perc = perceptron_update(task, w_perc, x, y, ctx);
    if (!same_bits(w_orbit, w_perc)) ++mismatches;
  }
  return summary("perceptron_equivalence", {{"steps", steps}, {"eta0", eta0}, {"seed", seed}},
                 {{"mismatched_steps", mismatches}, {"nonzero_updates", updates}},
                 mismatches == 0);
}

CheckRecord orbit_limit_suite(int instances, double tolerance, std::uint64_t seed) {
  const MulticlassTask task(4, 3, random_cost_matrix(4, derive_seed(seed, {0})));
  const std::vector<double> alphas{1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6};
  int monotone_violations = 0;
  double worst_final_gap = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(i)}));
    const Vector x = unit_vector(rng, task.input_dim());
    const Vector w = standard_normal_vector(rng, static_cast<int>(task.dim()));
    const int yhat = task.decode(w, x);
    const int y = (yhat + uniform_int(rng, 1, task.num_classes() - 1)) % task.num_classes();
    const auto recs = orbit_limit_check(task, w, x, y, alphas);
    for (std::size_t k = 1; k < recs.size(); ++k) {
      if (recs[k].gap > recs[k - 1].gap) ++monotone_violations;
    }
    worst_final_gap = std::max(worst_final_gap, recs.back().gap);
  }
  // Zero margin: w = 0 predicts class 0, so target 1 sits exactly on the
  // boundary for every alpha.
  const Vector x0 = Vector::Ones(task.input_dim()) / std::sqrt(3.0);
  const Vector w0 = Vector::Zero(static_cast<Eigen::Index>(task.dim()));
  bool zero_margin_exact = true;
  for (double a : alphas) {
    zero_margin_exact &= orbit_loss_value(task, Vector(a * w0), x0, 1) == task.cost(1, 0) / 2.0;
  }
  const bool pass = monotone_violations == 0 && worst_final_gap < tolerance && zero_margin_exact;
  return summary("orbit_limit",
                 {{"instances", instances}, {"alpha_max", alphas.back()}, {"tolerance", tolerance},
                  {"seed", seed}},
                 {{"max_gap_at_alpha_max", worst_final_gap},
                  {"monotonicity_violations", monotone_violations},
                  {"zero_margin_equals_half_cost", zero_margin_exact}},
                 pass);
}

std::vector<CheckRecord> lemma2_suite(int instances, const BoundCheckConfig& cfg) {
  cfg.validate();
  const MulticlassTask task(3, 3, random_cost_matrix(3, derive_seed(cfg.seed, {0})).scaled(0.5));
  std::vector<CheckRecord> out;
  int bound_violations = 0;
  int split_violations = 0;
  int accepted = 0;
  int rejected = 0;
  double max_probit_minus_orbit = -1.0;
  double max_diff_prob = 0.0;
  std::vector<double> orbit_losses;
  double max_w_norm = 0.0;
  for (std::uint64_t draw = 0; accepted < instances; ++draw) {
    if (rejected > 100 * instances) {
      throw Error(ErrorCode::MarginNotMet, "could not draw instances meeting the margin condition");
    }
    Rng rng(derive_seed(cfg.seed, {1, draw}));
    const Vector x = unit_vector(rng, task.input_dim());
    const Vector w = 2.0 * standard_normal_vector(rng, static_cast<int>(task.dim()));
    const int y = uniform_int(rng, 0, task.num_classes() - 1);
    if (margin_condition_margin(task, w, x) < cfg.margin_eta) {
      ++rejected;
      continue;
    }
    ++accepted;
    BoundCheckConfig inst = cfg;
    inst.seed = derive_seed(cfg.seed, {2, draw});
    const Lemma2Result lr = lemma2_check(task, w, x, y, inst);
    const SplitCheckResult sr = probit_split_estimate(task, w, x, y, inst);
    CheckRecord lrec = lr.record(inst);
    lrec.params["instance"] = accepted - 1;
    CheckRecord srec = sr.record(inst);
    srec.params["instance"] = accepted - 1;
    out.push_back(std::move(lrec));
    out.push_back(std::move(srec));
    bound_violations += lr.verdict != Verdict::Pass;
    split_violations += sr.verdict != Verdict::Pass;
    max_probit_minus_orbit = std::max(max_probit_minus_orbit, lr.probit_mc - lr.orbit_value);
    max_diff_prob = std::max(max_diff_prob, sr.split.diff_label_prob.mean);
    orbit_losses.push_back(lr.orbit_value);
    max_w_norm = std::max(max_w_norm, w.norm());
  }
  nlohmann::json params = cfg.to_json();
  params["instances"] = instances;
  params["required_margin_eta"] = cfg.required_margin_eta();
  out.push_back(summary("lemma2_summary", params,
                        {{"violations", bound_violations},
                         {"rejected_draws", rejected},
                         {"max_probit_minus_orbit", max_probit_minus_orbit}},
                        bound_violations == 0));
  out.push_back(summary("probit_split_summary", params,
                        {{"violations", split_violations}, {"max_diff_label_prob", max_diff_prob}},
                        split_violations == 0));
  BoundCheckConfig rhs_cfg = cfg;
  rhs_cfg.m = static_cast<int>(orbit_losses.size());
  const double rhs = orbit_bound_rhs(orbit_losses, max_w_norm, rhs_cfg);
  out.push_back(summary("orbit_bound_rhs", rhs_cfg.to_json(),
                        {{"rhs", rhs}, {"w_norm", max_w_norm}}, std::isfinite(rhs)));
  return out;
}

CheckRecord binary_probit_suite(int seeds, int samples, double allowance, std::uint64_t seed) {
  const MulticlassTask task(2, 3, CostMatrix(Eigen::MatrixXd{{0.0, 0.8}, {0.6, 0.0}}));
  int violations = 0;
  double worst_z = 0.0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));
    const Vector x = unit_vector(rng, task.input_dim());
    const int y = uniform_int(rng, 0, 1);
    const Vector dphi = delta_phi_hat(task, x, y, 1 - y);
    const Vector w = with_margin(standard_normal_vector(rng, static_cast<int>(task.dim())), dphi,
                                 uniform_real(rng, 0.05, 2.0));
    const double expected = gaussian_upper_tail(w.dot(dphi)) * task.cost(y, 1 - y);
    const McEstimate est = probit_loss_estimate(task, w, x, y, static_cast<std::size_t>(samples),
                                                derive_seed(seed, {1, static_cast<std::uint64_t>(s)}));
    const double dev = std::abs(est.mean - expected);
    if (est.std_error > 0.0) worst_z = std::max(worst_z, dev / est.std_error);
    if (dev > allowance * est.std_error) ++violations;
  }
  return summary("binary_probit_closed_form",
                 {{"seeds", seeds}, {"samples", samples}, {"allowance", allowance}, {"seed", seed}},
                 {{"violations", violations}, {"max_abs_z", worst_z}}, violations == 0);
}

CheckRecord alignment_oracle_suite(int instances, std::uint64_t seed) {
  int label_mismatch = 0;
  int score_mismatch = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const int k = uniform_int(rng, 1, 4);
    const int t = uniform_int(rng, k, 8);
    const AlignmentTask task(3, AlignmentCostConfig{static_cast<double>(uniform_int(rng, 0, 2))});
    AlignmentInput x{Eigen::MatrixXd(t, 3), k};
    for (int r = 0; r < t; ++r) x.frames.row(r) = standard_normal_vector(rng, 3).transpose();
    const Vector w = standard_normal_vector(rng, 3);
    const auto labels = task.enumerate_labels(x);
    const auto& target = labels[rng() % labels.size()];
    const double scale = uniform_real(rng, -2.0, 4.0);

    const auto dp = task.decode(w, x);
    const auto bf = brute_force_decode(task, w, x);
    label_mismatch += dp != bf;
    score_mismatch += w.dot(task.phi(x, dp)) != w.dot(task.phi(x, bf));

    const auto dp_aug = task.cost_augmented_decode(w, x, target, scale);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double v = w.dot(task.phi(x, labels[j])) + scale * task.cost(target, labels[j]);
      if (v > best_score) {
        best_score = v;
        best = j;
      }
    }
    label_mismatch += dp_aug != labels[best];
  }
  return summary("alignment_decode_oracle", {{"instances", instances}, {"seed", seed}},
                 {{"label_mismatches", label_mismatch}, {"score_mismatches", score_mismatch}},
                 label_mismatch == 0 && score_mismatch == 0);
}

CheckRecord vowel_oracle_suite(int instances, std::uint64_t seed) {
  int label_mismatch = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const int t = uniform_int(rng, 2, 12);
    const VowelTask task(VowelCostConfig{uniform_real(rng, 0.0, 2.0), uniform_real(rng, 0.0, 2.0)},
                         uniform_real(rng, 2.0, 6.0));
    Eigen::MatrixXd x(t, VowelTask::kFrameDim);
    for (int r = 0; r < t; ++r) x.row(r) = standard_normal_vector(rng, VowelTask::kFrameDim).transpose();
    const Vector w = standard_normal_vector(rng, VowelTask::kNumFeatures);
    label_mismatch += task.decode(w, x) != brute_force_decode(task, w, x);
    const auto labels = task.enumerate_labels(x);
    const auto& target = labels[rng() % labels.size()];
    const double scale = uniform_real(rng, -1.0, 2.0);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double v = w.dot(task.phi(x, labels[j])) + scale * task.cost(target, labels[j]);
      if (v > best_score) {
        best_score = v;
        best = j;
      }
    }
    label_mismatch += task.cost_augmented_decode(w, x, target, scale) != labels[best];
  }
  return summary("vowel_decode_oracle", {{"instances", instances}, {"seed", seed}},
                 {{"label_mismatches", label_mismatch}}, label_mismatch == 0);
}

CheckRecord viterbi_oracle_suite(int instances, std::uint64_t seed) {
  int label_mismatch = 0;
  int score_mismatch = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const int s_len = uniform_int(rng, 1, 4);
    const int t_len = uniform_int(rng, 1, 6);
    const int p = uniform_int(rng, 1, 3);
    const HmmParams hmm = random_hmm(s_len, rng);
    const GmmStateModel gmm = random_gmm(s_len, uniform_int(rng, 1, 3), p, rng);
    Eigen::MatrixXd frames(t_len, p);
    for (int t = 0; t < t_len; ++t) frames.row(t) = standard_normal_vector(rng, p).transpose();

    const auto vit = viterbi_decode(frames, hmm, gmm);
    std::vector<int> seq(static_cast<std::size_t>(t_len), 0);
    std::vector<int> best_seq = seq;
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
      const double d = discriminant(frames, seq, hmm, gmm);
      if (d > best) {
        best = d;
        best_seq = seq;
      }
      int pos = t_len - 1;
      while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == s_len - 1) {
        seq[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++seq[static_cast<std::size_t>(pos)];
    }
    label_mismatch += vit != best_seq;
    score_mismatch += discriminant(frames, vit, hmm, gmm) != best;
  }
  return summary("viterbi_oracle", {{"instances", instances}, {"seed", seed}},
                 {{"label_mismatches", label_mismatch}, {"score_mismatches", score_mismatch}},
                 label_mismatch == 0 && score_mismatch == 0);
}

CheckRecord gmm_identity_suite(int draws, int gradient_models, std::uint64_t seed) {
  double worst_round_trip = 0.0;
  double worst_quadratic = 0.0;
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, {0, static_cast<std::uint64_t>(i)}));
    const int p = uniform_int(rng, 1, 4);
    const Vector mu = 2.0 * standard_normal_vector(rng, p);
    const Eigen::MatrixXd sigma = random_spd(p, rng);
    const double pi_w = uniform_real(rng, -2.0, 2.0);
    const Eigen::MatrixXd phi = build_phi(mu, sigma, pi_w);
    const GaussianParams g = decompose_phi(phi);
    worst_round_trip =
        std::max(worst_round_trip, (build_phi(g.mu, g.sigma, g.pi) - phi).cwiseAbs().maxCoeff());
    const Vector x = 2.0 * standard_normal_vector(rng, p);
    const Vector z = augment(x);
    const double direct = (x - mu).dot(sigma.llt().solve(x - mu)) + pi_w;
    worst_quadratic = std::max(worst_quadratic, std::abs(z.dot(phi * z) - direct));
  }

  constexpr double h = 1e-5;
  double worst_gradient = 0.0;
  for (int i = 0; i < gradient_models; ++i) {
    Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(i)}));
    const int s_len = uniform_int(rng, 1, 3);
    const int p = uniform_int(rng, 1, 3);
    const int t_len = uniform_int(rng, 1, 6);
    const HmmParams hmm = random_hmm(s_len, rng);
    GmmStateModel gmm = random_gmm(s_len, uniform_int(rng, 1, 3), p, rng);
    Eigen::MatrixXd frames(t_len, p);
    std::vector<int> states;
    for (int t = 0; t < t_len; ++t) {
      frames.row(t) = standard_normal_vector(rng, p).transpose();
      states.push_back(uniform_int(rng, 0, s_len - 1));
    }
    const GmmStateModel analytic = discriminant_gradient(frames, states, gmm);
    std::vector<double> a, n;
    for (std::size_t s = 0; s < gmm.states.size(); ++s) {
      for (std::size_t c = 0; c < gmm.states[s].size(); ++c) {
        auto& phi = gmm.states[s][c];
        for (Eigen::Index r = 0; r < phi.rows(); ++r) {
          for (Eigen::Index col = 0; col < phi.cols(); ++col) {
            const double orig = phi(r, col);
            phi(r, col) = orig + h;
            const double up = discriminant(frames, states, hmm, gmm);
            phi(r, col) = orig - h;
            const double down = discriminant(frames, states, hmm, gmm);
            phi(r, col) = orig;
            n.push_back((up - down) / (2.0 * h));
            a.push_back(analytic.states[s][c](r, col));
          }
        }
      }
    }
    worst_gradient = std::max(
        worst_gradient,
        relative_error(Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size())),
                       Eigen::Map<const Vector>(n.data(), static_cast<Eigen::Index>(n.size()))));
  }
  const bool pass = worst_round_trip < 1e-10 && worst_quadratic < 1e-9 && worst_gradient < 1e-5;
  return summary("gmm_identities",
                 {{"draws", draws}, {"gradient_models", gradient_models}, {"h", h}, {"seed", seed}},
                 {{"max_round_trip_error", worst_round_trip},
                  {"max_quadratic_form_error", worst_quadratic},
                  {"max_gradient_relative_error", worst_gradient}},
                 pass);
}

}  // namespace orbit
