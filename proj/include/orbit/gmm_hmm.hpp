#pragma once

// Discriminative training of the emission model of a continuous-density HMM.
// Each mixture component is stored as one symmetric (p+1) x (p+1) matrix
//
//   Phi = [[ S^-1,        -S^-1 mu          ],
//          [ -mu^T S^-1,  mu^T S^-1 mu + pi ]]
//
// so that for z = (x, 1), z^T Phi z = (x - mu)^T S^-1 (x - mu) + pi. The
// emission score of state y is log sum_c exp(-z^T Phi_yc z), and Phi can be
// updated additively without any constraint bookkeeping. Transition and
// initial-state parameters are never modified.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "orbit/core.hpp"
#include "orbit/losses.hpp"

namespace orbit {

struct HmmParams {
  Vector log_init;            // log P(y_1 = s)
  Eigen::MatrixXd log_trans;  // (s, s') -> log P(y_{t+1} = s' | y_t = s)

  int num_states() const { return static_cast<int>(log_init.size()); }

  /// Throws unless shapes agree and every distribution sums to 1 within 1e-9.
  void validate() const;

  nlohmann::json to_json() const;
  static HmmParams from_json(const nlohmann::json& j);
};

struct GaussianParams {
  Vector mu;
  Eigen::MatrixXd sigma;
  double pi = 0.0;
};

/// Assembles Phi from (mu, Sigma, pi). Throws NON_SPD unless Sigma is
/// symmetric positive definite.
Eigen::MatrixXd build_phi(const Vector& mu, const Eigen::MatrixXd& sigma, double pi_w);

/// Inverse of build_phi. Throws NON_SPD unless the top-left block is
/// symmetric positive definite.
GaussianParams decompose_phi(const Eigen::MatrixXd& phi);

/// z = (x, 1).
Vector augment(const Vector& x);

struct GmmStateModel {
  int frame_dim = 1;
  std::vector<std::vector<Eigen::MatrixXd>> states;  // [state][component] -> Phi

  int num_states() const { return static_cast<int>(states.size()); }
  void validate() const;

  /// Same shape with every Phi set to zero.
  GmmStateModel zeros_like() const;
  /// this += scale * other, component by component.
  void add_scaled(const GmmStateModel& other, double scale);
  double max_abs_diff(const GmmStateModel& other) const;

  nlohmann::json to_json() const;
  static GmmStateModel from_json(const nlohmann::json& j);
};

/// log sum_c exp(-z^T Phi_c z), evaluated with a max shift.
double emission_score(const Vector& z, const std::vector<Eigen::MatrixXd>& components);

struct Utterance {
  Eigen::MatrixXd frames;   // T x p, row t holds x_{t+1}
  std::vector<int> states;  // y_1 .. y_T in [0, S)
};

/// D(x, y) = log P(y_1) + sum_t log P(y_{t+1} | y_t) + sum_t emission(z_t, y_t).
double discriminant(const Eigen::MatrixXd& frames, const std::vector<int>& states,
                    const HmmParams& hmm, const GmmStateModel& gmm);

/// argmax_y D(x, y) by max-product dynamic programming. The final state and
/// every back-pointer take the smallest maximizing state index.
std::vector<int> viterbi_decode(const Eigen::MatrixXd& frames, const HmmParams& hmm,
                                const GmmStateModel& gmm);

/// dD(x, y)/dPhi_yc = sum_{t: y_t = y} r_tc (-z_t z_t^T), with r_tc the
/// posterior weight of component c at frame t.
GmmStateModel discriminant_gradient(const Eigen::MatrixXd& frames, const std::vector<int>& states,
                                    const GmmStateModel& gmm);

enum class GmmRule { Perceptron, Orbit };

GmmRule gmm_rule_from_kind(RuleKind kind);

struct GmmStepOutcome {
  GmmStateModel model;
  std::vector<int> decoded;
  double cost = 0.0;  // normalized Hamming cost of the decoded sequence
};

/// One online step: Theta += eta * g (perceptron) or eta * cost * g (orbit),
/// g = dD(x, y)/dTheta - dD(x, yhat)/dTheta with yhat the Viterbi sequence.
/// The regularization weight in `ctx` is not used.
GmmStepOutcome gmm_step(const Utterance& utt, const HmmParams& hmm, const GmmStateModel& gmm,
                        const StepContext& ctx, GmmRule rule);

GmmStateModel gmm_update(const Utterance& utt, const HmmParams& hmm, const GmmStateModel& gmm,
                         const StepContext& ctx, GmmRule rule);

struct GmmSynthConfig {
  int num_states = 3;
  int num_components = 2;
  int frame_dim = 2;
  int t_min = 5;
  int t_max = 10;
  double self_loop = 0.6;    // P(y_{t+1} = y_t)
  double separation = 2.0;   // spread of the component means
  double init_shift = 1.0;   // displacement of the starting model's means
  int count = 50;
  std::uint64_t seed = 0;
};

struct GmmSynthData {
  HmmParams hmm;
  GmmStateModel truth;    // generating model (unit covariances, pi = log C)
  GmmStateModel initial;  // truth with every mean displaced by init_shift
  std::vector<Utterance> utterances;
};

/// Utterances sampled from a sticky HMM whose states emit equal-weight
/// mixtures of unit-covariance Gaussians.
GmmSynthData synth_gmm(const GmmSynthConfig& cfg);

}  // namespace orbit
