// orbit: dataset ingestion and synthesis, training, evaluation, verification
// and report tables. Exit codes: 0 success, 1 usage or config error, 2 data
// error, 3 verification FAIL.

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbit/cli.hpp"

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_global_flags(CLI::App* cmd, GlobalFlags& g, bool config_required) {
  auto* opt = cmd->add_option("--config", g.config, "Experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", g.seed, "Replace every seed in the config");
  cmd->add_option("--out", g.out, "Output directory (overrides output_dir)");
  cmd->add_flag("--quiet", g.quiet, "Print nothing on success");
}

orbit::ExperimentConfig resolve(const GlobalFlags& g) {
  orbit::ExperimentConfig cfg =
      g.config.empty() ? orbit::ExperimentConfig::from_json(nlohmann::json::object())
                       : orbit::load_config(g.config);
  if (g.seed) cfg.override_seed(*g.seed);
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured prediction with the orbit loss and comparison update rules"};
  app.require_subcommand(1);
  GlobalFlags g;

  auto* ingest = app.add_subcommand("ingest-mnist", "Read MNIST IDX files, fit PCA, write a dataset");
  orbit::MnistIngestConfig mnist;
  std::string images, labels, test_images, test_labels;
  ingest->add_option("--images", images, "Training images (IDX)")->required();
  ingest->add_option("--labels", labels, "Training labels (IDX)")->required();
  ingest->add_option("--test-images", test_images, "Test images (IDX)");
  ingest->add_option("--test-labels", test_labels, "Test labels (IDX)");
  ingest->add_option("--pca-dim", mnist.pca_dim, "Number of PCA components")->capture_default_str();
  ingest->add_option("--valid-count", mnist.valid_count, "Training images held out for validation")
      ->capture_default_str();
  ingest->add_option("--seed", g.seed, "Split seed");
  ingest->add_option("--out", g.out, "Dataset directory")->required();
  ingest->add_flag("--quiet", g.quiet, "Print nothing on success");

  auto* synth = app.add_subcommand("synth", "Write the generator dataset described by a config");
  add_global_flags(synth, g, true);
  auto* train = app.add_subcommand("train", "Train a model and write model.json and report.jsonl");
  add_global_flags(train, g, true);
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on one split");
  add_global_flags(eval, g, true);
  auto* verify = app.add_subcommand("verify", "Run the verification suites");
  add_global_flags(verify, g, false);
  auto* report = app.add_subcommand("report", "Summarize training runs as an error-rate table");
  std::vector<std::string> runs;
  report->add_option("runs", runs, "Run directories")->required();
  report->add_option("--out", g.out, "Directory for summary.txt and summary.json");
  report->add_flag("--quiet", g.quiet, "Print nothing on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  orbit::CommandOptions opts{g.quiet, &std::cout};
  try {
    if (*ingest) {
      if (test_images.empty() != test_labels.empty()) {
        std::cerr << "error: --test-images and --test-labels go together\n";
        return 1;
      }
      mnist.train_images = images;
      mnist.train_labels = labels;
      mnist.test_images = test_images;
      mnist.test_labels = test_labels;
      if (g.seed) mnist.split_seed = *g.seed;
      orbit::cmd_ingest_mnist(mnist, g.out, opts);
    } else if (*synth) {
      orbit::cmd_synth(resolve(g), opts);
    } else if (*train) {
      orbit::cmd_train(resolve(g), opts);
    } else if (*eval) {
      orbit::cmd_eval(resolve(g), opts);
    } else if (*verify) {
      return orbit::cmd_verify(resolve(g), opts);
    } else if (*report) {
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      orbit::cmd_report(dirs, g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out), opts);
    }
  } catch (const orbit::Error& e) {
    std::cerr << "error " << e.what() << '\n';
    return orbit::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error IO: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
