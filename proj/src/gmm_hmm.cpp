#include "orbit/gmm_hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orbit/costs.hpp"
#include "orbit/rng.hpp"

namespace orbit {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kSymmetryTolerance = 1e-10;

bool is_symmetric(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1 || !m.allFinite() || !is_symmetric(m)) {
    throw Error(ErrorCode::NonSpd, std::string(what) + " is not a finite symmetric matrix");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NonSpd, std::string(what) + " is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

/// Per-component terms a_c = -z^T Phi_c z.
Vector component_terms(const Vector& z, const std::vector<Eigen::MatrixXd>& components) {
  Vector a(static_cast<Eigen::Index>(components.size()));
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& phi = components[c];
    if (phi.rows() != z.size() || phi.cols() != z.size()) {
      throw Error(ErrorCode::DimMismatch, "augmented frame has length " + std::to_string(z.size()) +
                                              " but Phi is " + std::to_string(phi.rows()) + "x" +
                                              std::to_string(phi.cols()));
    }
    a[static_cast<Eigen::Index>(c)] = -z.dot(phi * z);
  }
  return a;
}

double log_sum_exp(const Vector& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((a.array() - m).exp().sum());
}

void check_frames(const Eigen::MatrixXd& frames, const GmmStateModel& gmm) {
  if (frames.rows() < 1) throw Error(ErrorCode::LengthMismatch, "utterance has no frames");
  if (frames.cols() != gmm.frame_dim) {
    throw Error(ErrorCode::DimMismatch, "frames have " + std::to_string(frames.cols()) +
                                            " columns, model expects " +
                                            std::to_string(gmm.frame_dim));
  }
}

void check_model_pair(const HmmParams& hmm, const GmmStateModel& gmm) {
  if (hmm.num_states() != gmm.num_states()) {
    throw Error(ErrorCode::DimMismatch, "HMM has " + std::to_string(hmm.num_states()) +
                                            " states but the emission model has " +
                                            std::to_string(gmm.num_states()));
  }
}

/// Emission scores, T x S.
Eigen::MatrixXd emission_table(const Eigen::MatrixXd& frames, const GmmStateModel& gmm) {
  Eigen::MatrixXd e(frames.rows(), gmm.num_states());
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    const Vector z = augment(frames.row(t).transpose());
    for (int s = 0; s < gmm.num_states(); ++s) {
      e(t, s) = emission_score(z, gmm.states[static_cast<std::size_t>(s)]);
    }
  }
  return e;
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

void HmmParams::validate() const {
  const auto s = log_init.size();
  if (s < 1 || log_trans.rows() != s || log_trans.cols() != s) {
    throw Error(ErrorCode::DimMismatch, "HMM initial vector and transition matrix disagree in size");
  }
  if (std::abs(log_init.array().exp().sum() - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidConfig, "initial state distribution does not sum to 1");
  }
  for (Eigen::Index r = 0; r < s; ++r) {
    if (std::abs(log_trans.row(r).array().exp().sum() - 1.0) > kSumTolerance) {
      throw Error(ErrorCode::InvalidConfig,
                  "transition row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

nlohmann::json HmmParams::to_json() const {
  nlohmann::json trans = nlohmann::json::array();
  for (Eigen::Index r = 0; r < log_trans.rows(); ++r) trans.push_back(vector_json(log_trans.row(r).transpose()));
  return {{"log_init", vector_json(log_init)}, {"log_trans", trans}};
}

HmmParams HmmParams::from_json(const nlohmann::json& j) {
  HmmParams h;
  const auto init = j.at("log_init").get<std::vector<double>>();
  h.log_init = Eigen::Map<const Vector>(init.data(), static_cast<Eigen::Index>(init.size()));
  const auto& rows = j.at("log_trans");
  h.log_trans.resize(static_cast<Eigen::Index>(rows.size()), h.log_init.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != h.log_init.size()) {
      throw Error(ErrorCode::DimMismatch, "transition row has the wrong length");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      h.log_trans(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  h.validate();
  return h;
}

Eigen::MatrixXd build_phi(const Vector& mu, const Eigen::MatrixXd& sigma, double pi_w) {
  const auto p = mu.size();
  if (p < 1 || sigma.rows() != p || sigma.cols() != p) {
    throw Error(ErrorCode::DimMismatch, "mean and covariance disagree in dimension");
  }
  const Eigen::MatrixXd prec = spd_inverse(sigma, "covariance");
  const Vector b = -(prec * mu);
  Eigen::MatrixXd phi(p + 1, p + 1);
  phi.topLeftCorner(p, p) = prec;
  phi.topRightCorner(p, 1) = b;
  phi.bottomLeftCorner(1, p) = b.transpose();
  phi(p, p) = mu.dot(prec * mu) + pi_w;
  return phi;
}

GaussianParams decompose_phi(const Eigen::MatrixXd& phi) {
  if (phi.rows() != phi.cols() || phi.rows() < 2) {
    throw Error(ErrorCode::DimMismatch, "Phi must be square with side >= 2");
  }
  const auto p = phi.rows() - 1;
  const Eigen::MatrixXd prec = phi.topLeftCorner(p, p);
  GaussianParams g;
  g.sigma = spd_inverse(prec, "top-left block of Phi");
  g.mu = -(g.sigma * phi.topRightCorner(p, 1));
  g.pi = phi(p, p) - g.mu.dot(prec * g.mu);
  return g;
}

Vector augment(const Vector& x) {
  Vector z(x.size() + 1);
  z.head(x.size()) = x;
  z[x.size()] = 1.0;
  return z;
}

void GmmStateModel::validate() const {
  if (frame_dim < 1 || states.empty()) {
    throw Error(ErrorCode::InvalidConfig, "emission model needs frame_dim >= 1 and at least one state");
  }
  for (const auto& comps : states) {
    if (comps.empty()) throw Error(ErrorCode::InvalidConfig, "every state needs >= 1 component");
    for (const auto& phi : comps) {
      if (phi.rows() != frame_dim + 1 || phi.cols() != frame_dim + 1) {
        throw Error(ErrorCode::DimMismatch, "Phi matrix has the wrong size");
      }
    }
  }
}

GmmStateModel GmmStateModel::zeros_like() const {
  GmmStateModel z = *this;
  for (auto& comps : z.states) {
    for (auto& phi : comps) phi.setZero();
  }
  return z;
}

void GmmStateModel::add_scaled(const GmmStateModel& other, double scale) {
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t c = 0; c < states[s].size(); ++c) states[s][c] += scale * other.states[s][c];
  }
}

double GmmStateModel::max_abs_diff(const GmmStateModel& other) const {
  double m = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t c = 0; c < states[s].size(); ++c) {
      m = std::max(m, (states[s][c] - other.states[s][c]).cwiseAbs().maxCoeff());
    }
  }
  return m;
}

nlohmann::json GmmStateModel::to_json() const {
  nlohmann::json js = nlohmann::json::array();
  for (const auto& comps : states) {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& phi : comps) {
      nlohmann::json flat = nlohmann::json::array();
      for (Eigen::Index r = 0; r < phi.rows(); ++r) {
        for (Eigen::Index c = 0; c < phi.cols(); ++c) flat.push_back(phi(r, c));
      }
      jc.push_back(std::move(flat));
    }
    js.push_back(std::move(jc));
  }
  return {{"frame_dim", frame_dim}, {"phi_side", frame_dim + 1}, {"layout", "row-major"},
          {"states", js}};
}

GmmStateModel GmmStateModel::from_json(const nlohmann::json& j) {
  GmmStateModel m;
  m.frame_dim = j.at("frame_dim").get<int>();
  const Eigen::Index side = m.frame_dim + 1;
  for (const auto& jc : j.at("states")) {
    std::vector<Eigen::MatrixXd> comps;
    for (const auto& flat : jc) {
      const auto v = flat.get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != side * side) {
        throw Error(ErrorCode::DimMismatch, "flattened Phi has the wrong length");
      }
      Eigen::MatrixXd phi(side, side);
      for (Eigen::Index r = 0; r < side; ++r) {
        for (Eigen::Index c = 0; c < side; ++c) phi(r, c) = v[static_cast<std::size_t>(r * side + c)];
      }
      comps.push_back(std::move(phi));
    }
    m.states.push_back(std::move(comps));
  }
  m.validate();
  return m;
}

double emission_score(const Vector& z, const std::vector<Eigen::MatrixXd>& components) {
  if (components.empty()) throw Error(ErrorCode::InvalidConfig, "state has no components");
  return log_sum_exp(component_terms(z, components));
}

double discriminant(const Eigen::MatrixXd& frames, const std::vector<int>& states,
                    const HmmParams& hmm, const GmmStateModel& gmm) {
  check_frames(frames, gmm);
  check_model_pair(hmm, gmm);
  if (static_cast<Eigen::Index>(states.size()) != frames.rows()) {
    throw Error(ErrorCode::DimMismatch, "state sequence and frames differ in length");
  }
  for (int s : states) {
    if (s < 0 || s >= gmm.num_states()) throw Error(ErrorCode::InvalidConfig, "state out of range");
  }
  double d = hmm.log_init[states[0]];
  for (std::size_t t = 1; t < states.size(); ++t) d += hmm.log_trans(states[t - 1], states[t]);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const Vector z = augment(frames.row(static_cast<Eigen::Index>(t)).transpose());
    d += emission_score(z, gmm.states[static_cast<std::size_t>(states[t])]);
  }
  return d;
}

std::vector<int> viterbi_decode(const Eigen::MatrixXd& frames, const HmmParams& hmm,
                                const GmmStateModel& gmm) {
  check_frames(frames, gmm);
  check_model_pair(hmm, gmm);
  const Eigen::MatrixXd e = emission_table(frames, gmm);
  const auto t_len = frames.rows();
  const int s_len = gmm.num_states();
  Eigen::MatrixXd delta(t_len, s_len);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(t_len, s_len);
  for (int s = 0; s < s_len; ++s) delta(0, s) = hmm.log_init[s] + e(0, s);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (int s = 0; s < s_len; ++s) {
      int arg = 0;
      double best = delta(t - 1, 0) + hmm.log_trans(0, s);
      for (int r = 1; r < s_len; ++r) {
        const double v = delta(t - 1, r) + hmm.log_trans(r, s);
        if (v > best) {
          best = v;
          arg = r;
        }
      }
      delta(t, s) = best + e(t, s);
      back(t, s) = arg;
    }
  }
  std::vector<int> path(static_cast<std::size_t>(t_len));
  int last = 0;
  for (int s = 1; s < s_len; ++s) {
    if (delta(t_len - 1, s) > delta(t_len - 1, last)) last = s;
  }
  path.back() = last;
  for (Eigen::Index t = t_len - 1; t > 0; --t) {
    path[static_cast<std::size_t>(t) - 1] = back(t, path[static_cast<std::size_t>(t)]);
  }
  return path;
}

GmmStateModel discriminant_gradient(const Eigen::MatrixXd& frames, const std::vector<int>& states,
                                    const GmmStateModel& gmm) {
  check_frames(frames, gmm);
  if (static_cast<Eigen::Index>(states.size()) != frames.rows()) {
    throw Error(ErrorCode::DimMismatch, "state sequence and frames differ in length");
  }
  GmmStateModel g = gmm.zeros_like();
  for (std::size_t t = 0; t < states.size(); ++t) {
    const auto s = static_cast<std::size_t>(states[t]);
    if (states[t] < 0 || s >= gmm.states.size()) {
      throw Error(ErrorCode::InvalidConfig, "state out of range");
    }
    const Vector z = augment(frames.row(static_cast<Eigen::Index>(t)).transpose());
    const Vector a = component_terms(z, gmm.states[s]);
    const Vector r = (a.array() - log_sum_exp(a)).exp();
    const Eigen::MatrixXd zz = z * z.transpose();
    for (std::size_t c = 0; c < g.states[s].size(); ++c) {
      g.states[s][c] -= r[static_cast<Eigen::Index>(c)] * zz;
    }
  }
  return g;
}

GmmRule gmm_rule_from_kind(RuleKind kind) {
  switch (kind) {
    case RuleKind::Perceptron: return GmmRule::Perceptron;
    case RuleKind::Orbit: return GmmRule::Orbit;
    default:
      throw Error(ErrorCode::UnsupportedTask,
                  "the GMM emission model supports only the PERCEPTRON and ORBIT rules");
  }
}

GmmStepOutcome gmm_step(const Utterance& utt, const HmmParams& hmm, const GmmStateModel& gmm,
                        const StepContext& ctx, GmmRule rule) {
  GmmStepOutcome out{gmm, viterbi_decode(utt.frames, hmm, gmm), 0.0};
  out.cost = normalized_hamming_cost(utt.states, out.decoded);
  if (out.decoded == utt.states) return out;
  const double factor = rule == GmmRule::Perceptron ? 1.0 : out.cost;
  if (factor == 0.0) return out;
  GmmStateModel g = discriminant_gradient(utt.frames, utt.states, gmm);
  g.add_scaled(discriminant_gradient(utt.frames, out.decoded, gmm), -1.0);
  out.model.add_scaled(g, ctx.eta * factor);
  return out;
}

GmmStateModel gmm_update(const Utterance& utt, const HmmParams& hmm, const GmmStateModel& gmm,
                         const StepContext& ctx, GmmRule rule) {
  return gmm_step(utt, hmm, gmm, ctx, rule).model;
}

GmmSynthData synth_gmm(const GmmSynthConfig& cfg) {
  if (cfg.num_states < 1 || cfg.num_components < 1 || cfg.frame_dim < 1 || cfg.t_min < 1 ||
      cfg.t_max < cfg.t_min || cfg.count < 1 || !(cfg.self_loop >= 0.0 && cfg.self_loop <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "synth_gmm: invalid sizes or self_loop");
  }
  const int s_len = cfg.num_states;
  const int p = cfg.frame_dim;
  GmmSynthData out;

  out.hmm.log_init = Vector::Constant(s_len, -std::log(static_cast<double>(s_len)));
  out.hmm.log_trans.resize(s_len, s_len);
  for (int r = 0; r < s_len; ++r) {
    for (int c = 0; c < s_len; ++c) {
      double prob = s_len == 1 ? 1.0
                               : (r == c ? cfg.self_loop : (1.0 - cfg.self_loop) / (s_len - 1));
      out.hmm.log_trans(r, c) = std::log(prob);
    }
  }

  Rng model_rng(derive_seed(cfg.seed, {0}));
  const double pi_w = std::log(static_cast<double>(cfg.num_components));
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
  std::vector<std::vector<Vector>> means(static_cast<std::size_t>(s_len));
  out.truth.frame_dim = p;
  out.initial.frame_dim = p;
  for (int s = 0; s < s_len; ++s) {
    std::vector<Eigen::MatrixXd> truth_comps, init_comps;
    for (int c = 0; c < cfg.num_components; ++c) {
      Vector mu = cfg.separation * standard_normal_vector(model_rng, p);
      Vector shift = cfg.init_shift * normalized_or_zero(standard_normal_vector(model_rng, p));
      truth_comps.push_back(build_phi(mu, eye, pi_w));
      init_comps.push_back(build_phi(mu + shift, eye, pi_w));
      means[static_cast<std::size_t>(s)].push_back(std::move(mu));
    }
    out.truth.states.push_back(std::move(truth_comps));
    out.initial.states.push_back(std::move(init_comps));
  }

  // Score exp(-||x - mu||^2) is the N(mu, I/2) density up to a constant.
  const double sd = std::sqrt(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(i)}));
    const int t_len = cfg.t_min + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.t_max - cfg.t_min + 1));
    Utterance utt;
    utt.frames.resize(t_len, p);
    int state = static_cast<int>(rng() % static_cast<std::uint64_t>(s_len));
    for (int t = 0; t < t_len; ++t) {
      if (t > 0 && s_len > 1 && unit(rng) >= cfg.self_loop) {
        const int hop = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(s_len - 1));
        state = (state + hop) % s_len;
      }
      const auto comp = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(cfg.num_components));
      const Vector x = means[static_cast<std::size_t>(state)][comp] + sd * standard_normal_vector(rng, p);
      utt.frames.row(t) = x.transpose();
      utt.states.push_back(state);
    }
    out.utterances.push_back(std::move(utt));
  }
  return out;
}

}  // namespace orbit
