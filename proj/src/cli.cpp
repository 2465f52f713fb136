#include "orbit/cli.hpp"

#include <fstream>

#include <fmt/format.h>

#include "orbit/rng.hpp"
#include "orbit/suites.hpp"

namespace orbit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;
const std::vector<std::string> kSplits{"train", "valid", "test"};

void say(const CommandOptions& opts, const std::string& line) {
  if (!opts.quiet && opts.out != nullptr) *opts.out << line << '\n';
}

template <class T>
std::vector<T> slice(const std::vector<T>& all, std::size_t begin, std::size_t count) {
  return {all.begin() + static_cast<std::ptrdiff_t>(begin),
          all.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

std::string payload_name(TaskKind kind, const std::string& split) {
  return split + (kind == TaskKind::Multiclass ? ".csv" : ".bin");
}

void write_split(const fs::path& path, const LoadedDataset& data, const std::string& split) {
  switch (data.kind) {
    case TaskKind::Multiclass: write_multiclass_csv(path, data.multiclass.at(split)); break;
    case TaskKind::Alignment: write_alignment_bin(path, data.alignment.at(split)); break;
    case TaskKind::Vowel: write_vowel_bin(path, data.vowel.at(split)); break;
    case TaskKind::Gmm: write_utterances_bin(path, data.utterances.at(split)); break;
  }
}

void read_split(const fs::path& path, LoadedDataset& data, const std::string& split) {
  switch (data.kind) {
    case TaskKind::Multiclass: data.multiclass[split] = read_multiclass_csv(path, data.input_dim); break;
    case TaskKind::Alignment: data.alignment[split] = read_alignment_bin(path); break;
    case TaskKind::Vowel: data.vowel[split] = read_vowel_bin(path); break;
    case TaskKind::Gmm: data.utterances[split] = read_utterances_bin(path); break;
  }
}

void check_hash(const fs::path& path, const std::string& expected) {
  const std::string actual = file_hash(path);
  if (actual != expected) {
    throw Error(ErrorCode::Io,
                fmt::format("{} has hash {}, manifest records {}", path.string(), actual, expected));
  }
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::Io, what + " is not an array");
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "row-major"}, {"values", flat}};
}

fs::path model_path(const ExperimentConfig& cfg) {
  return cfg.eval.model ? fs::path(*cfg.eval.model) : fs::path(cfg.output_dir) / "model.json";
}

void write_resolved(const ExperimentConfig& cfg) {
  write_json(fs::path(cfg.output_dir) / "resolved_config.json", cfg.to_json());
}

LoadedDataset load_for(const ExperimentConfig& cfg) {
  LoadedDataset data = read_dataset(dataset_dir(cfg));
  if (data.kind != cfg.task.kind) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("task.kind is '{}' but the dataset holds '{}'", to_string(cfg.task.kind),
                            to_string(data.kind)));
  }
  return data;
}

/// Dataset for cmd_train: generated data is materialized first so the run
/// always trains on exactly what is on disk.
LoadedDataset prepare_dataset(const ExperimentConfig& cfg, const CommandOptions& opts) {
  if (cfg.dataset.generator) {
    const fs::path dir = dataset_dir(cfg);
    const auto data = generate_dataset(cfg.task.kind, *cfg.dataset.generator);
    write_dataset(dir, data, cfg.to_json()["dataset"]["generator"]);
    say(opts, fmt::format("wrote generated dataset to {}", dir.string()));
  }
  return load_for(cfg);
}

const std::string& require_split(const LoadedDataset& data, const std::string& split) {
  if (std::find(kSplits.begin(), kSplits.end(), split) == kSplits.end()) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("unknown split '{}'", split));
  }
  if (data.split_size(split) == 0) {
    throw Error(ErrorCode::CountMismatch, fmt::format("split '{}' is empty", split));
  }
  return split;
}

json model_json(const ExperimentConfig& cfg, const LoadedDataset& data, std::size_t dim) {
  return {{"format_version", kModelFormatVersion},
          {"task_kind", to_string(cfg.task.kind)},
          {"dim", dim},
          {"config_echo", cfg.to_json()},
          {"dataset_manifest_hash", data.manifest_hash}};
}

template <class T>
void train_linear(const ExperimentConfig& cfg, const T& task, const Dataset<T>& train,
                  const Dataset<T>& valid, const LoadedDataset& data, const CommandOptions& opts) {
  const auto result = sgd_train(task, train, cfg.train, valid.empty() ? nullptr : &valid);
  json model = model_json(cfg, data, task.dim());
  model["weights"] = vector_json(result.weights);
  const fs::path out(cfg.output_dir);
  write_json(out / "model.json", model);
  write_jsonl(out / "report.jsonl", result.report.to_json_lines());
  write_jsonl(out / "timing.jsonl", result.report.timing_lines());
  for (const auto& line : result.report.to_json_lines()) say(opts, line.dump());
}

template <class T>
EvalResult eval_linear(const T& task, const json& model, const Dataset<T>& split) {
  const Vector w = vector_from_json(model.at("weights"), "model weights");
  require_dim(w, task.dim(), "model weights");
  return evaluate(task, w, split);
}

CheckRecord skipped_record(const std::string& name) {
  CheckRecord r;
  r.check = name;
  r.verdict = Verdict::Skipped;
  return r;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::ConfigUnstable:
    case ErrorCode::ZeroEpsilon:
    case ErrorCode::InvalidGamma:
    case ErrorCode::UnsupportedTask:
    case ErrorCode::TooLarge:
      return 1;
    default:
      return 2;
  }
}

std::size_t LoadedDataset::split_size(const std::string& split) const {
  auto size_of = [&](const auto& m) -> std::size_t {
    const auto it = m.find(split);
    return it == m.end() ? 0 : it->second.size();
  };
  switch (kind) {
    case TaskKind::Multiclass: return size_of(multiclass);
    case TaskKind::Alignment: return size_of(alignment);
    case TaskKind::Vowel: return size_of(vowel);
    case TaskKind::Gmm: return size_of(utterances);
  }
  return 0;
}

LoadedDataset generate_dataset(TaskKind kind, const GeneratorSection& gen) {
  LoadedDataset data;
  data.kind = kind;
  const std::size_t counts[3] = {static_cast<std::size_t>(gen.train_count),
                                 static_cast<std::size_t>(gen.valid_count),
                                 static_cast<std::size_t>(gen.test_count)};
  const int total = gen.train_count + gen.valid_count + gen.test_count;
  auto split_into = [&](const auto& all, auto& target) {
    std::size_t begin = 0;
    for (std::size_t s = 0; s < kSplits.size(); ++s) {
      target[kSplits[s]] = slice(all, begin, counts[s]);
      begin += counts[s];
    }
  };
  switch (kind) {
    case TaskKind::Multiclass: {
      auto c = gen.multiclass;
      c.count = total;
      c.seed = gen.seed;
      data.input_dim = c.input_dim;
      data.num_classes = c.num_classes;
      split_into(synth_multiclass(c), data.multiclass);
      break;
    }
    case TaskKind::Alignment: {
      auto c = gen.alignment;
      c.count = total;
      c.seed = gen.seed;
      data.frame_dim = c.frame_dim;
      split_into(synth_alignment(c), data.alignment);
      break;
    }
    case TaskKind::Vowel: {
      auto c = gen.vowel;
      c.count = total;
      c.seed = gen.seed;
      split_into(synth_vowel(c), data.vowel);
      break;
    }
    case TaskKind::Gmm: {
      auto c = gen.gmm;
      c.count = total;
      c.seed = gen.seed;
      auto synth = synth_gmm(c);
      data.frame_dim = c.frame_dim;
      data.hmm = synth.hmm;
      data.gmm_truth = synth.truth;
      data.gmm_initial = synth.initial;
      split_into(synth.utterances, data.utterances);
      break;
    }
  }
  return data;
}

json write_dataset(const fs::path& dir, const LoadedDataset& data, const json& generator_info) {
  fs::create_directories(dir);
  json manifest;
  manifest["task_kind"] = to_string(data.kind);
  manifest["generator"] = generator_info.value("name", std::string("synth_") + std::string(to_string(data.kind)));
  json params = generator_info;
  params.erase("name");
  manifest["parameters"] = params;
  manifest["seed"] = generator_info.value("seed", std::uint64_t{0});
  manifest["layout"] = binary_layout_json(data.kind);
  manifest["feature_normalizer"] = generator_info.value("feature_normalizer", json(nullptr));
  manifest["parameters"].erase("feature_normalizer");
  if (data.kind == TaskKind::Multiclass) {
    manifest["input_dim"] = data.input_dim;
    manifest["num_classes"] = data.num_classes;
  }
  if (data.kind == TaskKind::Alignment || data.kind == TaskKind::Gmm) {
    manifest["frame_dim"] = data.frame_dim;
  }
  json counts = json::object();
  json splits = json::object();
  for (const auto& split : kSplits) {
    const std::string file = payload_name(data.kind, split);
    write_split(dir / file, data, split);
    counts[split] = data.split_size(split);
    splits[split] = {{"file", file}, {"count", data.split_size(split)}, {"hash", file_hash(dir / file)}};
  }
  manifest["counts"] = counts;
  manifest["splits"] = splits;
  if (data.kind == TaskKind::Gmm) {
    json models = json::object();
    const std::pair<const char*, json> parts[] = {{"hmm", data.hmm.to_json()},
                                                  {"initial", data.gmm_initial.to_json()},
                                                  {"truth", data.gmm_truth.to_json()}};
    for (const auto& [name, content] : parts) {
      const std::string file = std::string(name) + ".json";
      write_json(dir / file, content);
      models[name] = {{"file", file}, {"hash", file_hash(dir / file)}};
    }
    manifest["models"] = models;
  }
  write_json(dir / "manifest.json", manifest);
  return manifest;
}

LoadedDataset read_dataset(const fs::path& dir) {
  LoadedDataset data;
  const fs::path manifest_path = dir / "manifest.json";
  try {
    data.manifest = read_json(manifest_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, e.detail());
  }
  data.manifest_hash = file_hash(manifest_path);
  try {
    const auto& m = data.manifest;
    data.kind = task_kind_from_string(m.at("task_kind").get<std::string>());
    if (data.kind == TaskKind::Multiclass) {
      data.input_dim = m.at("input_dim").get<int>();
      data.num_classes = m.at("num_classes").get<int>();
    }
    if (data.kind == TaskKind::Alignment || data.kind == TaskKind::Gmm) {
      data.frame_dim = m.at("frame_dim").get<int>();
    }
    for (const auto& split : kSplits) {
      if (!m.at("splits").contains(split)) continue;
      const auto& entry = m.at("splits").at(split);
      const fs::path file = dir / entry.at("file").get<std::string>();
      check_hash(file, entry.at("hash").get<std::string>());
      read_split(file, data, split);
      const auto expected = entry.at("count").get<std::size_t>();
      if (data.split_size(split) != expected) {
        throw Error(ErrorCode::CountMismatch,
                    fmt::format("{} holds {} examples, manifest records {}", file.string(),
                                data.split_size(split), expected));
      }
    }
    if (data.kind == TaskKind::Gmm) {
      auto load_part = [&](const char* name) {
        const auto& entry = m.at("models").at(name);
        const fs::path file = dir / entry.at("file").get<std::string>();
        check_hash(file, entry.at("hash").get<std::string>());
        return read_json(file);
      };
      data.hmm = HmmParams::from_json(load_part("hmm"));
      data.gmm_initial = GmmStateModel::from_json(load_part("initial"));
      data.gmm_truth = GmmStateModel::from_json(load_part("truth"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, fmt::format("{}: malformed manifest: {}", manifest_path.string(), e.what()));
  }
  return data;
}

fs::path dataset_dir(const ExperimentConfig& cfg) {
  if (cfg.dataset.path) return *cfg.dataset.path;
  if (cfg.dataset.generator) return fs::path(cfg.output_dir) / "dataset";
  throw Error(ErrorCode::InvalidConfig, "dataset: need either path or generator");
}

MulticlassTask make_multiclass_task(const ExperimentConfig& cfg, const LoadedDataset& data) {
  const int k = data.num_classes;
  const std::string type = cfg.to_json()["cost"]["type"].get<std::string>();
  if (type == "random_matrix") return {k, data.input_dim, random_cost_matrix(k, cfg.cost.seed)};
  if (type == "matrix") {
    if (cfg.cost.matrix->rows() != k) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("cost.matrix is {}x{} but the dataset has {} classes",
                              cfg.cost.matrix->rows(), cfg.cost.matrix->cols(), k));
    }
    try {
      return {k, data.input_dim, CostMatrix(*cfg.cost.matrix)};
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("cost.matrix: ") + e.detail());
    }
  }
  return {k, data.input_dim};
}

AlignmentTask make_alignment_task(const ExperimentConfig& cfg, const LoadedDataset& data) {
  return AlignmentTask(data.frame_dim, AlignmentCostConfig{cfg.cost.tau}, cfg.task.energy_window);
}

VowelTask make_vowel_task(const ExperimentConfig& cfg) {
  return VowelTask(VowelCostConfig{cfg.cost.tau_b, cfg.cost.tau_e}, cfg.task.duration_prior);
}

void cmd_ingest_mnist(const MnistIngestConfig& cfg, const fs::path& out_dir, const CommandOptions& opts) {
  const MnistSplits splits = ingest_mnist(cfg);
  LoadedDataset data;
  data.kind = TaskKind::Multiclass;
  data.input_dim = cfg.pca_dim;
  data.num_classes = 10;
  data.multiclass["train"] = splits.train;
  data.multiclass["valid"] = splits.valid;
  data.multiclass["test"] = splits.test;

  fs::create_directories(out_dir);
  write_json(out_dir / "pca.json", {{"mean", vector_json(splits.pca.mean)},
                                    {"basis", matrix_json(splits.pca.basis)},
                                    {"variances", vector_json(splits.pca.variances)},
                                    {"hash", splits.pca.hash()}});
  json info{{"name", "mnist_idx_pca"},
            {"train_images", cfg.train_images.filename().string()},
            {"train_labels", cfg.train_labels.filename().string()},
            {"test_images", cfg.test_images.filename().string()},
            {"test_labels", cfg.test_labels.filename().string()},
            {"pca_dim", cfg.pca_dim},
            {"valid_count", cfg.valid_count},
            {"seed", cfg.split_seed},
            {"feature_normalizer",
             {{"pixel_scale", "1/255"},
              {"pca_fit_split", "train"},
              {"pca_dim", cfg.pca_dim},
              {"pca_file", "pca.json"},
              {"pca_basis_hash", splits.pca.hash()},
              {"whitening", false}}}};
  write_dataset(out_dir, data, info);
  say(opts, fmt::format("wrote {} train / {} valid / {} test rows of dim {} to {}", splits.train.size(),
                        splits.valid.size(), splits.test.size(), cfg.pca_dim, out_dir.string()));
}

void cmd_synth(const ExperimentConfig& cfg, const CommandOptions& opts) {
  if (!cfg.dataset.generator) {
    throw Error(ErrorCode::InvalidConfig, "dataset.generator: required by synth");
  }
  const fs::path dir = cfg.dataset.path ? fs::path(*cfg.dataset.path) : dataset_dir(cfg);
  const auto data = generate_dataset(cfg.task.kind, *cfg.dataset.generator);
  write_dataset(dir, data, cfg.to_json()["dataset"]["generator"]);
  fs::create_directories(cfg.output_dir);
  write_resolved(cfg);
  say(opts, fmt::format("wrote {} train / {} valid / {} test examples to {}", data.split_size("train"),
                        data.split_size("valid"), data.split_size("test"), dir.string()));
}

void cmd_train(const ExperimentConfig& cfg, const CommandOptions& opts) {
  fs::create_directories(cfg.output_dir);
  write_resolved(cfg);
  const LoadedDataset data = prepare_dataset(cfg, opts);
  const std::string& train_split = require_split(data, cfg.dataset.train_split);
  const std::string valid_split = "valid";
  switch (cfg.task.kind) {
    case TaskKind::Multiclass:
      train_linear(cfg, make_multiclass_task(cfg, data), data.multiclass.at(train_split),
                   data.multiclass.at(valid_split), data, opts);
      break;
    case TaskKind::Alignment:
      train_linear(cfg, make_alignment_task(cfg, data), data.alignment.at(train_split),
                   data.alignment.at(valid_split), data, opts);
      break;
    case TaskKind::Vowel:
      train_linear(cfg, make_vowel_task(cfg), data.vowel.at(train_split), data.vowel.at(valid_split),
                   data, opts);
      break;
    case TaskKind::Gmm: {
      const auto& valid = data.utterances.at(valid_split);
      const auto result = gmm_train(data.utterances.at(train_split), data.hmm, data.gmm_initial,
                                    cfg.train, valid.empty() ? nullptr : &valid);
      std::size_t dim = 0;
      for (const auto& state : result.model.states) {
        for (const auto& phi : state) dim += static_cast<std::size_t>(phi.size());
      }
      json model = model_json(cfg, data, dim);
      model["hmm"] = data.hmm.to_json();
      model["gmm"] = result.model.to_json();
      const fs::path out(cfg.output_dir);
      write_json(out / "model.json", model);
      write_jsonl(out / "report.jsonl", result.report.to_json_lines());
      write_jsonl(out / "timing.jsonl", result.report.timing_lines());
      for (const auto& line : result.report.to_json_lines()) say(opts, line.dump());
      break;
    }
  }
}

json cmd_eval(const ExperimentConfig& cfg, const CommandOptions& opts) {
  json model;
  try {
    model = read_json(model_path(cfg));
  } catch (const Error& e) {
    throw Error(ErrorCode::Io, e.detail());
  }
  const LoadedDataset data = load_for(cfg);
  if (model.value("format_version", 0) != kModelFormatVersion ||
      model.value("task_kind", std::string()) != to_string(cfg.task.kind)) {
    throw Error(ErrorCode::Io, fmt::format("{} is not a {} model of format version {}",
                                           model_path(cfg).string(), to_string(cfg.task.kind),
                                           kModelFormatVersion));
  }
  if (model.value("dataset_manifest_hash", std::string()) != data.manifest_hash) {
    throw Error(ErrorCode::Io, "model was trained on a different dataset manifest");
  }
  const std::string& split = require_split(data, cfg.eval.split);
  EvalResult r;
  try {
    switch (cfg.task.kind) {
      case TaskKind::Multiclass:
        r = eval_linear(make_multiclass_task(cfg, data), model, data.multiclass.at(split));
        break;
      case TaskKind::Alignment:
        r = eval_linear(make_alignment_task(cfg, data), model, data.alignment.at(split));
        break;
      case TaskKind::Vowel:
        r = eval_linear(make_vowel_task(cfg), model, data.vowel.at(split));
        break;
      case TaskKind::Gmm: {
        const auto g = evaluate_gmm(data.utterances.at(split), HmmParams::from_json(model.at("hmm")),
                                    GmmStateModel::from_json(model.at("gmm")));
        r = {g.mean_cost, g.error_rate};
        break;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, fmt::format("malformed model: {}", e.what()));
  }
  json result{{"split", split},
              {"count", data.split_size(split)},
              {"mean_cost", r.mean_cost},
              {"error_rate", r.error_rate},
              {"rule", model.at("config_echo").at("rule").at("kind")},
              {"model_hash", file_hash(model_path(cfg))}};
  fs::create_directories(cfg.output_dir);
  write_json(fs::path(cfg.output_dir) / "eval.json", result);
  say(opts, fmt::format("split={} n={} mean_cost={} error_rate={}", split, data.split_size(split),
                        format_double(r.mean_cost), format_double(r.error_rate)));
  return result;
}

std::vector<CheckRecord> run_verify_suites(const VerifySection& v) {
  const std::uint64_t seed = v.bound.seed;
  std::vector<CheckRecord> records;
  auto run = [&](const std::string& name, auto&& fn) {
    if (std::find(v.suites.begin(), v.suites.end(), name) == v.suites.end()) {
      records.push_back(skipped_record(name));
      return;
    }
    fn();
  };
  // Every suite gets its own stream derived from the verify seed.
  run("gradient", [&] {
    records.push_back(gradient_check_suite(v.gradient_draws, v.gradient_h, 4.0, 1e-5, derive_seed(seed, {1})));
  });
  run("perceptron_equivalence", [&] {
    records.push_back(perceptron_equivalence_suite(v.equivalence_steps, derive_seed(seed, {2})));
  });
  run("orbit_limit", [&] {
    records.push_back(orbit_limit_suite(v.limit_instances, 1e-9, derive_seed(seed, {3})));
  });
  run("lemma2", [&] {
    BoundCheckConfig b = v.bound;
    b.seed = derive_seed(seed, {4});
    for (auto& r : lemma2_suite(v.lemma2_instances, b)) records.push_back(std::move(r));
  });
  run("binary_probit", [&] {
    records.push_back(binary_probit_suite(v.probit_seeds, v.probit_samples, v.bound.stderr_allowance,
                                          derive_seed(seed, {5})));
  });
  run("alignment_oracle", [&] {
    records.push_back(alignment_oracle_suite(v.decode_instances, derive_seed(seed, {6})));
  });
  run("vowel_oracle", [&] {
    records.push_back(vowel_oracle_suite(v.decode_instances, derive_seed(seed, {7})));
  });
  run("viterbi_oracle", [&] {
    records.push_back(viterbi_oracle_suite(v.decode_instances, derive_seed(seed, {8})));
  });
  run("gmm_identities", [&] {
    records.push_back(gmm_identity_suite(v.gmm_draws, v.gmm_gradient_models, derive_seed(seed, {9})));
  });

  return records;
}

int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const std::vector<CheckRecord> records = run_verify_suites(cfg.verify);
  std::vector<json> lines;
  bool failed = false;
  for (const auto& r : records) {
    lines.push_back(r.to_json());
    if (r.verdict == Verdict::Fail) failed = true;
  }
  fs::create_directories(cfg.output_dir);
  write_resolved(cfg);
  write_jsonl(fs::path(cfg.output_dir) / "verify.jsonl", lines);
  // Per-instance lemma2 records are in the JSONL; the console gets summaries.
  for (const auto& r : records) {
    if (r.check == "lemma2" || r.check == "probit_split") continue;
    say(opts, fmt::format("{:<28} {}", r.check, r.to_json().at("verdict").get<std::string>()));
  }
  say(opts, failed ? "verify: FAIL" : "verify: PASS");
  return failed ? 3 : 0;
}

std::string format_report_table(const json& rows) {
  std::string out = fmt::format("{:<18} {:>10} {:>10}  {}\n", "Algorithm", "Error rate", "Mean cost", "Run");
  for (const auto& row : rows) {
    out += fmt::format("{:<18} {:>9.2f}% {:>10.4f}  {}\n", row.at("rule").get<std::string>(),
                       100.0 * row.at("error_rate").get<double>(), row.at("mean_cost").get<double>(),
                       row.at("run").get<std::string>());
  }
  return out;
}

json cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir, const CommandOptions& opts) {
  if (run_dirs.empty()) throw Error(ErrorCode::InvalidConfig, "report: no run directories given");
  json rows = json::array();
  for (const auto& dir : run_dirs) {
    const json cfg = read_json(dir / "resolved_config.json");
    json row{{"run", dir.string()},
             {"task", cfg.at("task").at("kind")},
             {"rule", cfg.at("rule").at("kind")},
             {"cost", cfg.at("cost").at("type")},
             {"epochs", cfg.at("train").at("epochs")}};
    if (fs::exists(dir / "eval.json")) {
      const json ev = read_json(dir / "eval.json");
      row["split"] = ev.at("split");
      row["error_rate"] = ev.at("error_rate");
      row["mean_cost"] = ev.at("mean_cost");
    } else {
      const auto lines = read_jsonl(dir / "report.jsonl");
      if (lines.empty()) throw Error(ErrorCode::Io, (dir / "report.jsonl").string() + " is empty");
      const json& last = lines.back();
      const bool has_eval = last.contains("eval_error_rate") && !last.at("eval_error_rate").is_null();
      row["split"] = has_eval ? "valid" : "train";
      row["error_rate"] = has_eval ? last.at("eval_error_rate") : last.at("train_error_rate");
      row["mean_cost"] = has_eval ? last.at("eval_mean_cost") : last.at("train_mean_cost");
    }
    rows.push_back(row);
  }
  const std::string table = format_report_table(rows);
  fs::create_directories(out_dir);
  {
    std::ofstream txt(out_dir / "summary.txt", std::ios::trunc);
    if (!txt) throw Error(ErrorCode::Io, "cannot write " + (out_dir / "summary.txt").string());
    txt << table;
  }
  const json summary{{"rows", rows}};
  write_json(out_dir / "summary.json", summary);
  if (!opts.quiet && opts.out != nullptr) *opts.out << table;
  return summary;
}

}  // namespace orbit
