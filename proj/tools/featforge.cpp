// featforge: feature-transformation search over postfix token sequences.
//
// Subcommands:
//   collect  seed a multi-population database and dump it
//   search   run the full generate/verify/score/insert loop
//   compare  run strategy or collector ablations over several seeds
//   score    evaluate one transformation sequence on a dataset

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "featforge/featforge.hpp"

namespace ff = featforge;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string data;
  std::string target;
  std::string task = "auto";
  std::string backend;
  std::string strategy;
  std::string collector;
  std::string out;
  int iters = -1;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_search_flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file (flags override it)");
  cmd->add_option("--data", flags.data, "CSV dataset path");
  cmd->add_option("--target", flags.target, "target column name or index");
  cmd->add_option("--task", flags.task, "auto|cls|reg")->check(CLI::IsMember({"auto", "cls", "reg"}));
  cmd->add_option("--seed", flags.seed, "run seed");
  cmd->add_option("--out", flags.out, "output directory");
  if (with_search_flags) {
    cmd->add_option("--backend", flags.backend, "mock|remote");
    cmd->add_option("--strategy", flags.strategy, "balanced|top|random");
    cmd->add_option("--collector", flags.collector, "rl|random|restore");
    cmd->add_option("--iters", flags.iters, "generation iterations");
  }
}

ff::RunConfig merge_config(const CommonFlags& flags) {
  ff::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = ff::load_config_file(flags.config_path);
  if (!flags.data.empty()) cfg.data_path = flags.data;
  if (!flags.target.empty()) cfg.target = flags.target;
  if (flags.task == "cls") cfg.task_override = ff::Task::Classification;
  if (flags.task == "reg") cfg.task_override = ff::Task::Regression;
  if (!flags.backend.empty()) {
    const auto b = ff::backend_from_name(flags.backend);
    if (!b) throw ff::ConfigError("backend must be mock|remote");
    cfg.backend = *b;
  }
  if (!flags.strategy.empty()) {
    const auto s = ff::strategy_from_name(flags.strategy);
    if (!s) throw ff::ConfigError("unknown strategy: " + flags.strategy);
    cfg.strategy = *s;
  }
  if (!flags.collector.empty()) {
    const auto c = ff::collector_from_name(flags.collector);
    if (!c) throw ff::ConfigError("collector must be rl|random|restore");
    cfg.collector = *c;
  }
  if (flags.iters >= 0) cfg.iterations = flags.iters;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (cfg.data_path.empty()) throw ff::ConfigError("--data is required");
  if (cfg.target.empty()) throw ff::ConfigError("--target is required");
  return cfg;
}

ff::Dataset load(const ff::RunConfig& cfg) {
  ff::LoadOptions opts;
  opts.task_override = cfg.task_override;
  ff::Dataset ds = ff::load_csv(cfg.data_path, cfg.target, opts, cfg.dataset_name);
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  return ds;
}

int cmd_collect(const CommonFlags& flags) {
  ff::RunConfig cfg = merge_config(flags);
  const ff::Dataset ds = load(cfg);

  ff::CollectorConfig col = cfg.rl;
  col.ops = cfg.ops;
  col.seed = ff::Rng::mix(cfg.seed, 101);
  const ff::CollectionRun run = cfg.collector == ff::CollectorKind::Random
                                    ? ff::random_collect(ds, col, cfg.eval)
                                    : ff::collect(ds, col, cfg.eval);

  ff::Database db(std::max(2, col.episodes + col.episodes % 2), cfg.population_cap);
  for (std::size_t e = 0; e < run.populations.size(); ++e)
    for (const auto& ind : run.populations[e]) db.insert(static_cast<int>(e), ind);

  if (cfg.out_dir.empty()) {
    db.dump(std::cout);
  } else {
    std::filesystem::create_directories(cfg.out_dir);
    db.dump_file(cfg.out_dir + "/db_dump.jsonl");
    std::cout << "wrote " << cfg.out_dir << "/db_dump.jsonl\n";
  }
  std::cout << "baseline " << run.baseline << ", populations " << run.populations.size()
            << ", members " << db.total_members() << ", eval calls " << run.eval_calls << "\n";
  return 0;
}

int cmd_search(const CommonFlags& flags) {
  ff::RunConfig cfg = merge_config(flags);
  const ff::Dataset ds = load(cfg);
  const ff::RunReport report = ff::run(cfg, ds);

  std::cout << "baseline " << report.baseline << "\n";
  std::cout << "best     " << report.best_score << "  (" << ff::serialize(report.best) << ")\n";
  for (const auto& e : report.best.expressions) std::cout << "  " << ff::render_infix(e) << "\n";
  std::cout << "attempts " << report.attempts << ", valid " << report.valid_count
            << ", backend failures " << report.backend_failures << ", eval calls " << report.eval_calls << "\n";
  for (const auto& [name, count] : report.verdict_counts) std::cout << "  " << name << ": " << count << "\n";
  if (!report.out_dir.empty())
    std::cout << "artifacts in " << report.out_dir << " (trajectory.jsonl, summary.json, db_dump.jsonl)\n";
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::vector<std::string>& strategy_names, bool collectors,
                int repeats) {
  ff::RunConfig cfg = merge_config(flags);
  const ff::Dataset ds = load(cfg);

  std::vector<ff::CompareRow> rows;
  if (collectors) {
    rows = ff::compare_collectors(cfg, ds, repeats);
  } else {
    std::vector<ff::Strategy> strategies;
    for (const auto& name : strategy_names) {
      const auto s = ff::strategy_from_name(name);
      if (!s) throw ff::ConfigError("unknown strategy: " + name);
      strategies.push_back(*s);
    }
    if (strategies.empty())
      strategies = {ff::Strategy::BalancedRandomRanked, ff::Strategy::TopMRanked, ff::Strategy::RandomUnordered};
    rows = ff::compare_strategies(cfg, ds, strategies, repeats);
  }

  nlohmann::json table = nlohmann::json::array();
  std::printf("%-24s %12s %12s %14s %8s\n", "variant", "mean_best", "mean_valid", "mean_seed_best", "repeats");
  for (const auto& row : rows) {
    std::printf("%-24s %12.6f %12.2f %14.6f %8d\n", row.label.c_str(), row.mean_best, row.mean_valid,
                row.mean_seed_best, row.repeats);
    table.push_back({{"variant", row.label},
                     {"mean_best", row.mean_best},
                     {"mean_valid", row.mean_valid},
                     {"mean_seed_best", row.mean_seed_best},
                     {"repeats", row.repeats}});
  }
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/comparison.json");
    out << table.dump(2) << "\n";
  }
  return 0;
}

int cmd_score(const CommonFlags& flags, const std::string& seq) {
  ff::RunConfig cfg = merge_config(flags);
  const ff::Dataset ds = load(cfg);
  const ff::Vocab vocab{static_cast<int>(ds.n_cols()), cfg.ops};

  const auto parsed = ff::parse_postfix(seq, vocab);
  if (!parsed.ok()) {
    std::cerr << "error: cannot parse sequence (" << parsed.detail << ")\n";
    return 1;
  }
  const auto mat = ff::materialize(parsed.individual, ds.X);
  if (!mat) {
    std::cerr << "error: every expression evaluates to a degenerate column\n";
    return 1;
  }
  const ff::FoldPlan folds = ff::make_folds(ds, cfg.eval.cv_k, cfg.eval.cv_seed);
  const ff::Score baseline = ff::cross_val_score(ds.X, ds.y, ds.task, ds.n_classes, cfg.eval.model, folds);
  const ff::Score score = ff::cross_val_score(*mat, ds.y, ds.task, ds.n_classes, cfg.eval.model, folds);

  nlohmann::json out = {{"dataset", ds.name},
                        {"task", ff::task_name(ds.task)},
                        {"metric", ff::metric_name(score.metric)},
                        {"seq", ff::serialize(parsed.individual)},
                        {"columns", mat->n_cols()},
                        {"score", score.value},
                        {"fold_values", score.fold_values},
                        {"baseline", baseline.value}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"featforge: generative feature-transformation search"};
  app.require_subcommand(1);

  CommonFlags collect_flags, search_flags, compare_flags, score_flags;
  std::vector<std::string> strategy_names;
  bool compare_collectors_flag = false;
  int repeats = 5;
  std::string seq;

  auto* collect = app.add_subcommand("collect", "seed a database with the RL or random collector");
  add_common(collect, collect_flags, true);

  auto* search = app.add_subcommand("search", "run the full transformation search");
  add_common(search, search_flags, true);

  auto* compare = app.add_subcommand("compare", "compare prompt strategies or collectors");
  add_common(compare, compare_flags, true);
  compare->add_option("--strategies", strategy_names, "strategies to compare")->delimiter(',');
  compare->add_flag("--collectors", compare_collectors_flag, "compare rl vs random collectors instead");
  compare->add_option("--repeats", repeats, "seeds per variant");

  auto* score = app.add_subcommand("score", "score one sequence on a dataset");
  add_common(score, score_flags, false);
  score->add_option("--seq", seq, "sequence in the serialization grammar")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect->parsed()) return cmd_collect(collect_flags);
    if (search->parsed()) return cmd_search(search_flags);
    if (compare->parsed()) return cmd_compare(compare_flags, strategy_names, compare_collectors_flag, repeats);
    if (score->parsed()) return cmd_score(score_flags, seq);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
