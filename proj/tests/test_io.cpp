#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <doctest.h>

#include "orbit/cli.hpp"
#include "orbit/config.hpp"
#include "orbit/dataset_io.hpp"
#include "orbit/mnist.hpp"

using namespace orbit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "orbit_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// IDX image file with `declared` images in the header and `stored` in the payload.
void write_idx_images(const fs::path& p, std::uint32_t magic, std::uint32_t declared, std::size_t stored) {
  std::ofstream out(p, std::ios::binary);
  put_u32(out, magic);
  put_u32(out, declared);
  put_u32(out, 2);
  put_u32(out, 2);
  for (std::size_t i = 0; i < stored * 4; ++i) out.put(static_cast<char>(i * 17 % 256));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an orbit::Error");
  return ErrorCode::Io;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ORBIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

json small_multiclass_config(const fs::path& out) {
  json j = json::parse(R"({
    "task": {"kind": "multiclass"},
    "dataset": {"generator": {"train_count": 60, "test_count": 30, "seed": 4}},
    "cost": {"type": "random_matrix", "seed": 2},
    "rule": {"kind": "ORBIT"},
    "train": {"epochs": 2, "eta0": 0.5, "lambda": 0.01, "shuffle_seed": 1}
  })");
  j["output_dir"] = out.string();
  return j;
}

}  // namespace

TEST_CASE("idx readers") {
  const fs::path dir = scratch("idx");
  write_idx_images(dir / "ok", 0x803, 3, 3);
  const auto images = read_idx_images(dir / "ok");
  CHECK(images.count == 3);
  CHECK(images.rows == 2);
  CHECK(images.pixels.size() == 12);
  const auto m = idx_to_matrix(images);
  CHECK(m(0, 1) == doctest::Approx(17.0 / 255.0));

  write_idx_images(dir / "magic", 0x801, 3, 3);
  CHECK(code_of([&] { read_idx_images(dir / "magic"); }) == ErrorCode::BadMagic);
  write_idx_images(dir / "short", 0x803, 3, 2);
  CHECK(code_of([&] { read_idx_images(dir / "short"); }) == ErrorCode::CountMismatch);
  CHECK(code_of([&] { read_idx_labels(dir / "missing"); }) == ErrorCode::Io);
}

TEST_CASE("pca") {
  Rng rng(5);
  Eigen::MatrixXd x(40, 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = standard_normal_vector(rng, 4).transpose();
  x.col(2) *= 3.0;

  const auto full = fit_pca(x, 4);
  CHECK((full.reconstruct(full.project(x)) - x).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((full.basis.transpose() * full.basis - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);
  for (Eigen::Index k = 1; k < 4; ++k) CHECK(full.variances[k - 1] >= full.variances[k]);

  const auto one = fit_pca(x, 1);
  CHECK(std::abs(one.basis(2, 0)) > 0.9);  // the stretched axis
  CHECK(one.hash() == fit_pca(x, 1).hash());
  CHECK(one.hash().size() == 16);
}

TEST_CASE("dataset files round trip") {
  const fs::path dir = scratch("datasets");
  for (TaskKind kind : {TaskKind::Multiclass, TaskKind::Alignment, TaskKind::Vowel, TaskKind::Gmm}) {
    CAPTURE(to_string(kind));
    GeneratorSection gen;
    gen.train_count = 12;
    gen.valid_count = 3;
    gen.test_count = 5;
    gen.seed = 9;
    const auto data = generate_dataset(kind, gen);
    CHECK(data.split_size("train") == 12);
    CHECK(data.split_size("valid") == 3);
    const fs::path d = dir / std::string(to_string(kind));
    write_dataset(d, data, json{{"name", "synthetic"}});
    const auto back = read_dataset(d);
    CHECK(back.kind == kind);
    CHECK(back.split_size("test") == 5);
    CHECK(back.manifest["counts"]["train"] == 12);

    const auto again = generate_dataset(kind, gen);
    write_dataset(dir / "again", again, json{{"name", "synthetic"}});
    CHECK(slurp(d / "manifest.json") == slurp(dir / "again" / "manifest.json"));
    fs::remove_all(dir / "again");
  }
  const auto mc = read_dataset(dir / "multiclass");
  const auto& first = mc.multiclass.at("train").front();
  const auto orig = generate_dataset(TaskKind::Multiclass, [] {
    GeneratorSection g;
    g.train_count = 12;
    g.valid_count = 3;
    g.test_count = 5;
    g.seed = 9;
    return g;
  }());
  CHECK(first.target == orig.multiclass.at("train").front().target);
  CHECK((first.input - orig.multiclass.at("train").front().input).cwiseAbs().maxCoeff() == 0.0);

  // A modified payload no longer matches its manifest hash.
  {
    std::ofstream out(dir / "multiclass" / "test.csv", std::ios::app);
    out << "\n";
  }
  CHECK(code_of([&] { read_dataset(dir / "multiclass"); }) == ErrorCode::Io);
  CHECK(code_of([&] { read_dataset(dir / "nowhere"); }) == ErrorCode::Io);
}

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  const double x = 1.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("config parsing") {
  SUBCASE("unknown keys name their path") {
    try {
      ExperimentConfig::from_json(json::parse(R"({"train": {"epochz": 3}})"));
      FAIL("expected INVALID_CONFIG");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
      CHECK(std::string(e.what()).find("train.epochz") != std::string::npos);
    }
  }
  SUBCASE("wrong cost type for the task") {
    CHECK(code_of([] {
            ExperimentConfig::from_json(
                json::parse(R"({"task": {"kind": "alignment"}, "cost": {"type": "zero_one"}})"));
          }) == ErrorCode::InvalidConfig);
  }
  SUBCASE("unstable step size") {
    CHECK(code_of([] {
            ExperimentConfig::from_json(json::parse(R"({"train": {"eta0": 2, "lambda": 0.5}})"));
          }) == ErrorCode::ConfigUnstable);
  }
  SUBCASE("resolved configs reload to themselves") {
    const auto cfg = ExperimentConfig::from_json(small_multiclass_config("/tmp/x"));
    const json resolved = cfg.to_json();
    CHECK(ExperimentConfig::from_json(resolved).to_json() == resolved);
    CHECK(cfg.train.rule.kind == RuleKind::Orbit);
    CHECK(cfg.cost.type == "random_matrix");
  }
  SUBCASE("seed override reaches every seed") {
    auto cfg = ExperimentConfig::from_json(small_multiclass_config("/tmp/x"));
    cfg.override_seed(77);
    CHECK(cfg.dataset.generator->seed == 77);
    CHECK(cfg.cost.seed == 77);
    CHECK(cfg.train.shuffle_seed == 77);
    CHECK(cfg.train.rule.rng_seed == 77);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::InvalidConfig) == 1);
  CHECK(exit_code_for(ErrorCode::ConfigUnstable) == 1);
  CHECK(exit_code_for(ErrorCode::BadMagic) == 2);
  CHECK(exit_code_for(ErrorCode::CountMismatch) == 2);
  CHECK(exit_code_for(ErrorCode::Io) == 2);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  auto write = [&](const std::string& name, const json& j) {
    std::ofstream(dir / name) << j.dump(2);
    return (dir / name).string();
  };

  CHECK(run_cli("") == 1);
  CHECK(run_cli("train") == 1);
  CHECK(run_cli("train --config " + (dir / "missing.json").string()) == 1);
  CHECK(run_cli("train --config " + write("bad.json", json::parse(R"({"train": {"epochz": 1}})"))) == 1);
  CHECK(run_cli("train --config " +
                write("nodata.json", json{{"dataset", {{"path", (dir / "none").string()}}},
                                          {"output_dir", (dir / "nodata").string()}})) == 2);
  CHECK(run_cli("ingest-mnist --images " + (dir / "none").string() + " --labels " +
                (dir / "none").string() + " --out " + (dir / "mnist").string()) == 2);

  const std::string cfg = write("run.json", small_multiclass_config(dir / "run"));
  REQUIRE(run_cli("train --quiet --config " + cfg) == 0);
  for (const char* f : {"model.json", "report.jsonl", "timing.jsonl", "resolved_config.json"}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  const std::string model = slurp(dir / "run" / "model.json");
  const std::string report = slurp(dir / "run" / "report.jsonl");
  CHECK(report.find("wall_time_s") == std::string::npos);

  SUBCASE("reruns are byte-identical") {
    REQUIRE(run_cli("train --quiet --config " + cfg) == 0);
    CHECK(slurp(dir / "run" / "model.json") == model);
    CHECK(slurp(dir / "run" / "report.jsonl") == report);
  }
  SUBCASE("resolved config reproduces the run") {
    const json resolved = json::parse(slurp(dir / "run" / "resolved_config.json"));
    REQUIRE(run_cli("train --quiet --config " + write("resolved.json", resolved)) == 0);
    CHECK(slurp(dir / "run" / "model.json") == model);
  }
  SUBCASE("eval and report") {
    REQUIRE(run_cli("eval --quiet --config " + cfg) == 0);
    const json ev = json::parse(slurp(dir / "run" / "eval.json"));
    CHECK(ev["split"] == "test");
    CHECK(ev["count"] == 30);
    CHECK(ev["error_rate"].get<double>() >= 0.0);
    REQUIRE(run_cli("report " + (dir / "run").string() + " --out " + (dir / "summary").string()) == 0);
    CHECK(fs::exists(dir / "summary" / "summary.txt"));
  }
  SUBCASE("a different seed changes the model") {
    REQUIRE(run_cli("train --quiet --seed 5 --config " + cfg) == 0);
    CHECK(slurp(dir / "run" / "model.json") != model);
  }
}
