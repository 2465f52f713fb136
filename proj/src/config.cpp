#include "orbit/config.hpp"

#include <set>

#include <fmt/format.h>

namespace orbit {

namespace {

using nlohmann::json;

// Reads keys out of one JSON object, remembering which were consumed so that
// finish() can reject the rest with their full path.
class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (j.is_null()) {
      obj_ = json::object();
    } else if (!j.is_object()) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("{}: expected an object", where()));
    } else {
      obj_ = j;
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", where(key), e.what()));
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) ? obj_.at(key) : null_;
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{}: unknown key", where(key)));
      }
    }
  }

 private:
  json obj_;
  std::string path_;
  std::set<std::string> seen_;
  json null_;
};

template <class Fn>
auto wrap(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::ConfigUnstable ||
        e.code() == ErrorCode::ZeroEpsilon || e.code() == ErrorCode::InvalidGamma) {
      throw Error(e.code(), fmt::format("{}: {}", where, e.detail()));
    }
    throw;
  }
}

void parse_multiclass_gen(Section& s, MulticlassSynthConfig& c) {
  s.read("num_classes", c.num_classes);
  s.read("input_dim", c.input_dim);
  s.read("separation", c.separation);
  s.read("noise", c.noise);
}

void parse_alignment_gen(Section& s, AlignmentSynthConfig& c) {
  s.read("t_min", c.t_min);
  s.read("t_max", c.t_max);
  s.read("k_min", c.k_min);
  s.read("k_max", c.k_max);
  s.read("frame_dim", c.frame_dim);
  s.read("step", c.step);
  s.read("noise", c.noise);
}

void parse_vowel_gen(Section& s, VowelSynthConfig& c) {
  s.read("t_min", c.t_min);
  s.read("t_max", c.t_max);
  s.read("duration_min", c.duration_min);
  s.read("duration_max", c.duration_max);
  s.read("level", c.level);
  s.read("noise", c.noise);
}

void parse_gmm_gen(Section& s, GmmSynthConfig& c) {
  s.read("num_states", c.num_states);
  s.read("num_components", c.num_components);
  s.read("frame_dim", c.frame_dim);
  s.read("t_min", c.t_min);
  s.read("t_max", c.t_max);
  s.read("self_loop", c.self_loop);
  s.read("separation", c.separation);
  s.read("init_shift", c.init_shift);
}

json generator_json(const GeneratorSection& g, TaskKind kind) {
  json j{{"train_count", g.train_count},
         {"valid_count", g.valid_count},
         {"test_count", g.test_count},
         {"seed", g.seed}};
  switch (kind) {
    case TaskKind::Multiclass:
      j["num_classes"] = g.multiclass.num_classes;
      j["input_dim"] = g.multiclass.input_dim;
      j["separation"] = g.multiclass.separation;
      j["noise"] = g.multiclass.noise;
      break;
    case TaskKind::Alignment:
      j["t_min"] = g.alignment.t_min;
      j["t_max"] = g.alignment.t_max;
      j["k_min"] = g.alignment.k_min;
      j["k_max"] = g.alignment.k_max;
      j["frame_dim"] = g.alignment.frame_dim;
      j["step"] = g.alignment.step;
      j["noise"] = g.alignment.noise;
      break;
    case TaskKind::Vowel:
      j["t_min"] = g.vowel.t_min;
      j["t_max"] = g.vowel.t_max;
      j["duration_min"] = g.vowel.duration_min;
      j["duration_max"] = g.vowel.duration_max;
      j["level"] = g.vowel.level;
      j["noise"] = g.vowel.noise;
      break;
    case TaskKind::Gmm:
      j["num_states"] = g.gmm.num_states;
      j["num_components"] = g.gmm.num_components;
      j["frame_dim"] = g.gmm.frame_dim;
      j["t_min"] = g.gmm.t_min;
      j["t_max"] = g.gmm.t_max;
      j["self_loop"] = g.gmm.self_loop;
      j["separation"] = g.gmm.separation;
      j["init_shift"] = g.gmm.init_shift;
      break;
  }
  return j;
}

const std::set<std::string>& cost_types_for(TaskKind kind) {
  static const std::set<std::string> multiclass{"default", "zero_one", "random_matrix", "matrix"};
  static const std::set<std::string> alignment{"default", "tau_insensitive"};
  static const std::set<std::string> vowel{"default", "vowel"};
  static const std::set<std::string> gmm{"default", "hamming"};
  switch (kind) {
    case TaskKind::Multiclass: return multiclass;
    case TaskKind::Alignment: return alignment;
    case TaskKind::Vowel: return vowel;
    case TaskKind::Gmm: return gmm;
  }
  return multiclass;
}

std::string resolved_cost_type(const CostSection& c, TaskKind kind) {
  if (c.type != "default") return c.type;
  switch (kind) {
    case TaskKind::Multiclass: return "zero_one";
    case TaskKind::Alignment: return "tau_insensitive";
    case TaskKind::Vowel: return "vowel";
    case TaskKind::Gmm: return "hamming";
  }
  return c.type;
}

const std::set<std::string> kSuiteNames{
    "gradient",     "perceptron_equivalence", "orbit_limit",    "lemma2",        "binary_probit",
    "alignment_oracle", "vowel_oracle",       "viterbi_oracle", "gmm_identities"};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  Section root(j, "");

  {
    Section s(root.raw("task"), "task");
    std::string kind = std::string(to_string(cfg.task.kind));
    s.read("kind", kind);
    cfg.task.kind = wrap(s.where("kind"), [&] {
      try {
        return task_kind_from_string(kind);
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.detail());
      }
    });
    s.read("energy_window", cfg.task.energy_window);
    s.read("duration_prior", cfg.task.duration_prior);
    if (cfg.task.energy_window < 1) {
      throw Error(ErrorCode::InvalidConfig, "task.energy_window: must be >= 1");
    }
    if (!(cfg.task.duration_prior > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "task.duration_prior: must be > 0");
    }
    s.finish();
  }

  {
    Section s(root.raw("dataset"), "dataset");
    if (s.has("path")) {
      std::string p;
      s.read("path", p);
      cfg.dataset.path = p;
    }
    s.read("train_split", cfg.dataset.train_split);
    if (s.has("generator")) {
      Section g(s.raw("generator"), "dataset.generator");
      GeneratorSection gen;
      g.read("train_count", gen.train_count);
      g.read("valid_count", gen.valid_count);
      g.read("test_count", gen.test_count);
      g.read("seed", gen.seed);
      switch (cfg.task.kind) {
        case TaskKind::Multiclass: parse_multiclass_gen(g, gen.multiclass); break;
        case TaskKind::Alignment: parse_alignment_gen(g, gen.alignment); break;
        case TaskKind::Vowel: parse_vowel_gen(g, gen.vowel); break;
        case TaskKind::Gmm: parse_gmm_gen(g, gen.gmm); break;
      }
      if (gen.train_count < 1 || gen.valid_count < 0 || gen.test_count < 0) {
        throw Error(ErrorCode::InvalidConfig,
                    "dataset.generator: need train_count >= 1 and non-negative valid/test counts");
      }
      g.finish();
      cfg.dataset.generator = gen;
    }
    if (cfg.dataset.path && cfg.dataset.generator) {
      throw Error(ErrorCode::InvalidConfig, "dataset: give either path or generator, not both");
    }
    s.finish();
  }

  {
    Section s(root.raw("cost"), "cost");
    s.read("type", cfg.cost.type);
    if (!cost_types_for(cfg.task.kind).count(cfg.cost.type)) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("cost.type: '{}' does not apply to task '{}'", cfg.cost.type,
                              to_string(cfg.task.kind)));
    }
    s.read("seed", cfg.cost.seed);
    s.read("tau", cfg.cost.tau);
    s.read("tau_b", cfg.cost.tau_b);
    s.read("tau_e", cfg.cost.tau_e);
    if (s.has("matrix")) {
      const auto rows = s.raw("matrix");
      if (!rows.is_array() || rows.empty()) {
        throw Error(ErrorCode::InvalidConfig, "cost.matrix: expected a non-empty array of rows");
      }
      const auto k = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd m(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k) {
          throw Error(ErrorCode::InvalidConfig, fmt::format("cost.matrix[{}]: expected {} entries", r, k));
        }
        for (Eigen::Index c = 0; c < k; ++c) {
          if (!row[static_cast<std::size_t>(c)].is_number()) {
            throw Error(ErrorCode::InvalidConfig, fmt::format("cost.matrix[{}][{}]: not a number", r, c));
          }
          m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
      }
      cfg.cost.matrix = m;
    }
    if (cfg.cost.type == "matrix" && !cfg.cost.matrix) {
      throw Error(ErrorCode::InvalidConfig, "cost.matrix: required when cost.type is 'matrix'");
    }
    if (cfg.cost.tau < 0.0 || cfg.cost.tau_b < 0.0 || cfg.cost.tau_e < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "cost: tolerances must be non-negative");
    }
    s.finish();
  }

  {
    Section s(root.raw("rule"), "rule");
    std::string kind = std::string(to_string(cfg.train.rule.kind));
    s.read("kind", kind);
    cfg.train.rule.kind = wrap(s.where("kind"), [&] {
      try {
        return rule_kind_from_string(kind);
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.detail());
      }
    });
    s.read("direct_epsilon", cfg.train.rule.direct_epsilon);
    s.read("probit_samples", cfg.train.rule.probit_samples);
    s.read("rng_seed", cfg.train.rule.rng_seed);
    wrap("rule", [&] { cfg.train.rule.validate(); });
    s.finish();
  }

  {
    Section s(root.raw("train"), "train");
    s.read("epochs", cfg.train.epochs);
    s.read("eta0", cfg.train.eta0);
    std::string schedule = std::string(to_string(cfg.train.schedule));
    s.read("schedule", schedule);
    cfg.train.schedule = wrap(s.where("schedule"), [&] {
      try {
        return schedule_from_string(schedule);
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.detail());
      }
    });
    s.read("lambda", cfg.train.lambda);
    s.read("shuffle_seed", cfg.train.shuffle_seed);
    s.read("average", cfg.train.average);
    if (s.has("initial_weights")) {
      std::vector<double> w;
      s.read("initial_weights", w);
      cfg.train.initial_weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    wrap("train", [&] { cfg.train.validate(); });
    s.finish();
  }

  {
    Section s(root.raw("eval"), "eval");
    s.read("split", cfg.eval.split);
    if (s.has("model")) {
      std::string m;
      s.read("model", m);
      cfg.eval.model = m;
    }
    s.finish();
  }

  {
    Section s(root.raw("verify"), "verify");
    auto& b = cfg.verify.bound;
    s.read("sigma", b.sigma);
    s.read("gamma", b.gamma);
    s.read("delta", b.delta);
    s.read("m", b.m);
    if (s.has("margin_eta")) {
      s.read("margin_eta", b.margin_eta);
      cfg.verify.margin_eta_auto = false;
    }
    s.read("mc_samples", b.mc_samples);
    s.read("seed", b.seed);
    s.read("stderr_allowance", b.stderr_allowance);
    s.read("suites", cfg.verify.suites);
    for (const auto& name : cfg.verify.suites) {
      if (!kSuiteNames.count(name)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("verify.suites: unknown suite '{}'", name));
      }
    }
    s.read("gradient_draws", cfg.verify.gradient_draws);
    s.read("gradient_h", cfg.verify.gradient_h);
    s.read("equivalence_steps", cfg.verify.equivalence_steps);
    s.read("limit_instances", cfg.verify.limit_instances);
    s.read("lemma2_instances", cfg.verify.lemma2_instances);
    s.read("probit_seeds", cfg.verify.probit_seeds);
    s.read("probit_samples", cfg.verify.probit_samples);
    s.read("decode_instances", cfg.verify.decode_instances);
    s.read("gmm_draws", cfg.verify.gmm_draws);
    s.read("gmm_gradient_models", cfg.verify.gmm_gradient_models);
    if (cfg.verify.margin_eta_auto) b.margin_eta = b.required_margin_eta();
    wrap("verify", [&] { b.validate(); });
    s.finish();
  }

  root.read("output_dir", cfg.output_dir);
  root.finish();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["task"] = {{"kind", to_string(task.kind)},
               {"energy_window", task.energy_window},
               {"duration_prior", task.duration_prior}};

  json ds{{"path", dataset.path ? json(*dataset.path) : json(nullptr)},
          {"train_split", dataset.train_split},
          {"generator", dataset.generator ? generator_json(*dataset.generator, task.kind) : json(nullptr)}};
  j["dataset"] = ds;

  json cost_j{{"type", resolved_cost_type(cost, task.kind)},
              {"seed", cost.seed},
              {"tau", cost.tau},
              {"tau_b", cost.tau_b},
              {"tau_e", cost.tau_e},
              {"matrix", nullptr}};
  if (cost.matrix) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < cost.matrix->rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < cost.matrix->cols(); ++c) row.push_back((*cost.matrix)(r, c));
      rows.push_back(row);
    }
    cost_j["matrix"] = rows;
  }
  j["cost"] = cost_j;

  j["rule"] = {{"kind", to_string(train.rule.kind)},
               {"direct_epsilon", train.rule.direct_epsilon},
               {"probit_samples", train.rule.probit_samples},
               {"rng_seed", train.rule.rng_seed}};

  json tr{{"epochs", train.epochs},
          {"eta0", train.eta0},
          {"schedule", to_string(train.schedule)},
          {"lambda", train.lambda},
          {"shuffle_seed", train.shuffle_seed},
          {"average", train.average},
          {"initial_weights", nullptr}};
  if (train.initial_weights) {
    tr["initial_weights"] =
        std::vector<double>(train.initial_weights->data(),
                            train.initial_weights->data() + train.initial_weights->size());
  }
  j["train"] = tr;

  j["eval"] = {{"split", eval.split}, {"model", eval.model ? json(*eval.model) : json(nullptr)}};

  json v = verify.bound.to_json();
  v["suites"] = verify.suites;
  v["gradient_draws"] = verify.gradient_draws;
  v["gradient_h"] = verify.gradient_h;
  v["equivalence_steps"] = verify.equivalence_steps;
  v["limit_instances"] = verify.limit_instances;
  v["lemma2_instances"] = verify.lemma2_instances;
  v["probit_seeds"] = verify.probit_seeds;
  v["probit_samples"] = verify.probit_samples;
  v["decode_instances"] = verify.decode_instances;
  v["gmm_draws"] = verify.gmm_draws;
  v["gmm_gradient_models"] = verify.gmm_gradient_models;
  j["verify"] = v;

  j["output_dir"] = output_dir;
  return j;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  if (dataset.generator) dataset.generator->seed = seed;
  cost.seed = seed;
  train.rule.rng_seed = seed;
  train.shuffle_seed = seed;
  verify.bound.seed = seed;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.detail());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace orbit
