#pragma once

// Commands behind the `orbit` executable. Each writes its artifacts under a
// directory and returns a process exit code: 0 success, 1 usage or config
// error, 2 data error, 3 verification FAIL.

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbit/config.hpp"
#include "orbit/mnist.hpp"

namespace orbit {

int exit_code_for(ErrorCode code);

/// All splits of one dataset, of the kind named by `kind`.
struct LoadedDataset {
  TaskKind kind = TaskKind::Multiclass;
  nlohmann::json manifest;
  std::string manifest_hash;
  int input_dim = 0;    // multiclass
  int num_classes = 0;  // multiclass
  int frame_dim = 0;    // alignment, gmm
  std::map<std::string, Dataset<MulticlassTask>> multiclass;
  std::map<std::string, Dataset<AlignmentTask>> alignment;
  std::map<std::string, Dataset<VowelTask>> vowel;
  std::map<std::string, std::vector<Utterance>> utterances;
  HmmParams hmm;
  GmmStateModel gmm_initial;
  GmmStateModel gmm_truth;

  std::size_t split_size(const std::string& split) const;
};

/// Builds the splits described by a generator section.
LoadedDataset generate_dataset(TaskKind kind, const GeneratorSection& gen);

/// Writes payloads and manifest.json; returns the manifest.
nlohmann::json write_dataset(const std::filesystem::path& dir, const LoadedDataset& data,
                             const nlohmann::json& generator_info);

/// Reads a dataset directory, checking every payload against its manifest hash.
LoadedDataset read_dataset(const std::filesystem::path& dir);

/// Dataset directory a config refers to: dataset.path, or
/// <output_dir>/dataset for generated data.
std::filesystem::path dataset_dir(const ExperimentConfig& cfg);

MulticlassTask make_multiclass_task(const ExperimentConfig& cfg, const LoadedDataset& data);
AlignmentTask make_alignment_task(const ExperimentConfig& cfg, const LoadedDataset& data);
VowelTask make_vowel_task(const ExperimentConfig& cfg);

struct CommandOptions {
  bool quiet = false;
  std::ostream* out = nullptr;  // progress and results; nullptr or quiet silences
};

/// Writes train/valid/test CSVs, pca.json and manifest.json into out_dir.
void cmd_ingest_mnist(const MnistIngestConfig& cfg, const std::filesystem::path& out_dir,
                      const CommandOptions& opts = {});
void cmd_synth(const ExperimentConfig& cfg, const CommandOptions& opts = {});
/// Writes model.json, report.jsonl, timing.jsonl and resolved_config.json.
void cmd_train(const ExperimentConfig& cfg, const CommandOptions& opts = {});
/// Writes eval.json holding mean_cost and error_rate.
nlohmann::json cmd_eval(const ExperimentConfig& cfg, const CommandOptions& opts = {});
/// Runs the enabled suites, each on its own stream derive_seed(seed, {k}).
std::vector<CheckRecord> run_verify_suites(const VerifySection& v);
/// Writes verify.jsonl; returns 3 when any record is FAIL, 0 otherwise.
int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts = {});
/// Summarizes training runs into summary.txt and summary.json under out_dir.
nlohmann::json cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                          const std::filesystem::path& out_dir, const CommandOptions& opts = {});

/// Error-rate table, one row per run: algorithm, error rate in percent, mean cost.
std::string format_report_table(const nlohmann::json& rows);

}  // namespace orbit
