#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "featforge/collector_config.hpp"
#include "featforge/dataset.hpp"
#include "featforge/expr.hpp"
#include "featforge/generator.hpp"
#include "featforge/models.hpp"
#include "featforge/population_db.hpp"
#include "featforge/remote_llm.hpp"

namespace featforge {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CollectorKind : std::uint8_t { Rl, Random, Restore };

inline const char* collector_name(CollectorKind c) {
  switch (c) {
    case CollectorKind::Rl: return "rl";
    case CollectorKind::Random: return "random";
    case CollectorKind::Restore: return "restore";
  }
  return "rl";
}

inline std::optional<CollectorKind> collector_from_name(const std::string& s) {
  if (s == "rl") return CollectorKind::Rl;
  if (s == "random") return CollectorKind::Random;
  if (s == "restore") return CollectorKind::Restore;
  return std::nullopt;
}

enum class BackendKind : std::uint8_t { Mock, Remote };

inline const char* backend_name(BackendKind b) { return b == BackendKind::Mock ? "mock" : "remote"; }

inline std::optional<BackendKind> backend_from_name(const std::string& s) {
  if (s == "mock") return BackendKind::Mock;
  if (s == "remote") return BackendKind::Remote;
  return std::nullopt;
}

struct RunConfig {
  std::string data_path;
  std::string target;
  std::optional<Task> task_override;
  std::string dataset_name;

  OperatorSet ops = OperatorSet::all();

  CollectorKind collector = CollectorKind::Rl;
  std::string restore_path;

  Strategy strategy = Strategy::BalancedRandomRanked;
  BackendKind backend = BackendKind::Mock;
  MockEvolverConfig mock;
  RemoteLlmConfig remote;

  int k_populations = 8;   // K
  int population_cap = 10; // P
  int demos = 4;           // M
  int max_features = 24;
  int iterations = 200;    // N
  int cull_every = 20;     // C

  EvalConfig eval;
  CollectorConfig rl;

  std::uint64_t seed = 7;
  std::string out_dir;
  std::size_t max_prompt_chars = 8192;
  int eval_budget = 5000;
  bool log_wall_ms = false;
  bool debug_validate = false;
  std::string output_marker = "### SEQUENCE:";
};

inline void validate(const RunConfig& cfg) {
  std::vector<std::string> faults;
  if (cfg.k_populations < 2) faults.push_back("k_populations must be >= 2");
  if (cfg.k_populations % 2 != 0) faults.push_back("k_populations must be even");
  if (cfg.population_cap < 1) faults.push_back("population_cap must be >= 1");
  if (cfg.demos < 1) faults.push_back("demos must be >= 1");
  if (cfg.max_features < 1) faults.push_back("max_features must be >= 1");
  if (cfg.iterations < 0) faults.push_back("iterations must be >= 0");
  if (cfg.cull_every < 1) faults.push_back("cull_every must be >= 1");
  if (cfg.eval.cv_k < 2) faults.push_back("cv.k must be >= 2");
  if (cfg.rl.episodes < 1) faults.push_back("rl.episodes must be >= 1");
  if (cfg.rl.steps < 1) faults.push_back("rl.steps must be >= 1");
  if (cfg.rl.learning_rate <= 0) faults.push_back("rl.lr must be > 0");
  if (cfg.rl.gamma < 0 || cfg.rl.gamma > 1) faults.push_back("rl.gamma must be in [0,1]");
  if (cfg.rl.epsilon_start < 0 || cfg.rl.epsilon_start > 1 || cfg.rl.epsilon_end < 0 || cfg.rl.epsilon_end > 1)
    faults.push_back("rl.epsilon must be in [0,1]");
  if (cfg.eval_budget < 1) faults.push_back("eval_budget must be >= 1");
  if (cfg.ops.size() == 0) faults.push_back("operator set is empty");
  if (cfg.collector == CollectorKind::Restore && cfg.restore_path.empty())
    faults.push_back("collector=restore requires a restore path");
  if (!faults.empty()) {
    std::string msg = "invalid config:";
    for (const auto& f : faults) msg += " " + f + ";";
    throw ConfigError(msg);
  }
}

namespace detail {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

// Populates a RunConfig from the JSON config file format. Unknown keys are
// ignored; enum strings are validated.
inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  detail::read_if(j, "data", cfg.data_path);
  detail::read_if(j, "target", cfg.target);
  detail::read_if(j, "name", cfg.dataset_name);

  if (j.contains("task")) {
    const auto s = j.at("task").get<std::string>();
    if (s == "cls")
      cfg.task_override = Task::Classification;
    else if (s == "reg")
      cfg.task_override = Task::Regression;
    else if (s != "auto")
      throw ConfigError("task must be auto|cls|reg");
  }

  if (j.contains("operators")) {
    const auto names = j.at("operators").get<std::vector<std::string>>();
    const auto ops = OperatorSet::from_names(names);
    if (!ops) throw ConfigError("unknown operator in operators list");
    cfg.ops = *ops;
  }

  if (j.contains("collector")) {
    const auto c = collector_from_name(j.at("collector").get<std::string>());
    if (!c) throw ConfigError("collector must be rl|random|restore");
    cfg.collector = *c;
  }
  detail::read_if(j, "restore", cfg.restore_path);

  if (j.contains("strategy")) {
    const auto s = strategy_from_name(j.at("strategy").get<std::string>());
    if (!s) throw ConfigError("unknown strategy");
    cfg.strategy = *s;
  }
  if (j.contains("backend")) {
    const auto b = backend_from_name(j.at("backend").get<std::string>());
    if (!b) throw ConfigError("backend must be mock|remote");
    cfg.backend = *b;
  }

  detail::read_if(j, "k_populations", cfg.k_populations);
  detail::read_if(j, "population_cap", cfg.population_cap);
  detail::read_if(j, "demos", cfg.demos);
  detail::read_if(j, "max_features", cfg.max_features);
  detail::read_if(j, "iters", cfg.iterations);
  detail::read_if(j, "cull_every", cfg.cull_every);
  detail::read_if(j, "seed", cfg.seed);
  detail::read_if(j, "out", cfg.out_dir);
  detail::read_if(j, "eval_budget", cfg.eval_budget);
  detail::read_if(j, "max_prompt_chars", cfg.max_prompt_chars);
  detail::read_if(j, "log_wall_ms", cfg.log_wall_ms);
  detail::read_if(j, "debug_validate", cfg.debug_validate);
  detail::read_if(j, "marker", cfg.output_marker);

  if (j.contains("downstream")) {
    const auto& d = j.at("downstream");
    if (d.contains("kind")) {
      const auto k = model_kind_from_name(d.at("kind").get<std::string>());
      if (!k) throw ConfigError("downstream.kind must be decision_tree|random_forest|ridge|knn");
      cfg.eval.model.kind = *k;
    }
    if (d.contains("params")) {
      const auto& p = d.at("params");
      detail::read_if(p, "depth", cfg.eval.model.max_depth);
      detail::read_if(p, "n_trees", cfg.eval.model.n_trees);
      detail::read_if(p, "lambda", cfg.eval.model.lambda);
      detail::read_if(p, "k_neighbors", cfg.eval.model.k_neighbors);
    }
  }
  if (j.contains("cv")) {
    const auto& c = j.at("cv");
    detail::read_if(c, "k", cfg.eval.cv_k);
    detail::read_if(c, "seed", cfg.eval.cv_seed);
  }
  if (j.contains("rl")) {
    const auto& r = j.at("rl");
    detail::read_if(r, "episodes", cfg.rl.episodes);
    detail::read_if(r, "steps", cfg.rl.steps);
    detail::read_if(r, "epsilon_start", cfg.rl.epsilon_start);
    detail::read_if(r, "epsilon_end", cfg.rl.epsilon_end);
    detail::read_if(r, "gamma", cfg.rl.gamma);
    detail::read_if(r, "lr", cfg.rl.learning_rate);
    detail::read_if(r, "hidden", cfg.rl.mlp_hidden);
    detail::read_if(r, "degenerate_penalty", cfg.rl.degenerate_penalty);
    if (r.contains("approximator")) {
      const auto s = r.at("approximator").get<std::string>();
      if (s == "linear")
        cfg.rl.approximator = ApproxKind::Linear;
      else if (s == "mlp")
        cfg.rl.approximator = ApproxKind::Mlp;
      else
        throw ConfigError("rl.approximator must be linear|mlp");
    }
  }
  if (j.contains("llm")) {
    const auto& l = j.at("llm");
    detail::read_if(l, "url", cfg.remote.base_url);
    detail::read_if(l, "model", cfg.remote.model);
    detail::read_if(l, "temperature", cfg.remote.temperature);
    detail::read_if(l, "max_tokens", cfg.remote.max_tokens);
    detail::read_if(l, "retries", cfg.remote.max_retries);
    detail::read_if(l, "timeout_sec", cfg.remote.timeout_sec);
    detail::read_if(l, "backoff_ms", cfg.remote.backoff_ms);
  }
  if (j.contains("mock")) {
    const auto& m = j.at("mock");
    detail::read_if(m, "crossover_rate", cfg.mock.crossover_rate);
    detail::read_if(m, "mutation_rate", cfg.mock.mutation_rate);
    detail::read_if(m, "seed", cfg.mock.seed);
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  return config_from_json(j);
}

}  // namespace featforge
