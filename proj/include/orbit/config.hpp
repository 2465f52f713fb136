#pragma once

// Experiment configuration: a JSON document with the sections task, dataset,
// cost, rule, train, eval, verify and output_dir. Unknown keys are rejected
// with their path; to_json() returns the fully resolved document with every
// default filled in.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbit/dataset_io.hpp"
#include "orbit/gmm_hmm.hpp"
#include "orbit/trainer.hpp"
#include "orbit/verify.hpp"

namespace orbit {

struct TaskSection {
  TaskKind kind = TaskKind::Multiclass;
  int energy_window = 3;        // alignment
  double duration_prior = 8.0;  // vowel, frames
};

/// Cost types: "default" (per task), "zero_one", "random_matrix", "matrix"
/// (multiclass); "tau_insensitive" (alignment); "vowel"; "hamming" (gmm).
struct CostSection {
  std::string type = "default";
  std::uint64_t seed = 0;  // random_matrix
  std::optional<Eigen::MatrixXd> matrix;
  double tau = 0.0;
  double tau_b = 0.0;
  double tau_e = 0.0;
};

struct GeneratorSection {
  int train_count = 200;
  int valid_count = 0;
  int test_count = 100;
  std::uint64_t seed = 0;
  MulticlassSynthConfig multiclass;
  AlignmentSynthConfig alignment;
  VowelSynthConfig vowel;
  GmmSynthConfig gmm;
};

struct DatasetSection {
  std::optional<std::string> path;  // dataset directory with manifest.json
  std::optional<GeneratorSection> generator;
  std::string train_split = "train";
};

struct EvalSection {
  std::string split = "test";
  std::optional<std::string> model;  // defaults to <output_dir>/model.json
};

struct VerifySection {
  BoundCheckConfig bound;
  bool margin_eta_auto = true;  // margin_eta = sigma sqrt(2 ln(m / sigma))
  std::vector<std::string> suites{"gradient",      "perceptron_equivalence", "orbit_limit",
                                  "lemma2",        "binary_probit",          "alignment_oracle",
                                  "vowel_oracle",  "viterbi_oracle",         "gmm_identities"};
  int gradient_draws = 100;
  double gradient_h = 1e-5;
  int equivalence_steps = 1000;
  int limit_instances = 100;
  int lemma2_instances = 50;
  int probit_seeds = 50;
  int probit_samples = 4000;
  int decode_instances = 1000;
  int gmm_draws = 1000;
  int gmm_gradient_models = 20;
};

struct ExperimentConfig {
  TaskSection task;
  DatasetSection dataset;
  CostSection cost;
  TrainConfig train;  // train.rule holds the rule section
  EvalSection eval;
  VerifySection verify;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Replaces every seed in the document with `seed`.
  void override_seed(std::uint64_t seed);
};

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace orbit
