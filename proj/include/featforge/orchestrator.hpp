#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "featforge/collector.hpp"
#include "featforge/config.hpp"
#include "featforge/cross_val.hpp"
#include "featforge/dataset.hpp"
#include "featforge/expr.hpp"
#include "featforge/generator.hpp"
#include "featforge/population_db.hpp"
#include "featforge/prompt.hpp"
#include "featforge/remote_llm.hpp"
#include "featforge/verifier.hpp"

namespace featforge {

// One line per generation attempt.
struct TrajectoryPoint {
  int iteration = 0;
  int pop = 0;
  std::string outcome;  // verdict name, or "backend_error"
  std::optional<double> candidate_score;
  double best_score_so_far = 0.0;
  int valid_count_so_far = 0;
  std::int64_t wall_ms = 0;
};

struct RunReport {
  std::string dataset;
  Task task = Task::Regression;
  double baseline = 0.0;
  double best_score = 0.0;
  Individual best;
  std::map<std::string, int> verdict_counts;
  int attempts = 0;
  int backend_failures = 0;
  int valid_count = 0;
  int eval_calls = 0;
  bool budget_exhausted = false;
  std::vector<double> seed_population_best;  // per population, at seed time
  std::vector<TrajectoryPoint> trajectory;
  std::string out_dir;
};

namespace detail {

inline nlohmann::json trajectory_line(const TrajectoryPoint& pt, bool with_wall_ms) {
  nlohmann::json line = {{"iteration", pt.iteration},
                         {"pop", pt.pop},
                         {"outcome", pt.outcome},
                         {"best_score_so_far", pt.best_score_so_far},
                         {"valid_count_so_far", pt.valid_count_so_far}};
  if (pt.candidate_score)
    line["candidate_score"] = *pt.candidate_score;
  else
    line["candidate_score"] = nullptr;
  if (with_wall_ms) line["wall_ms"] = pt.wall_ms;
  return line;
}

inline nlohmann::json summary_json(const RunConfig& cfg, const RunReport& report) {
  nlohmann::json best = nullptr;
  if (!report.best.expressions.empty()) {
    std::vector<std::string> infix;
    infix.reserve(report.best.expressions.size());
    for (const auto& e : report.best.expressions) infix.push_back(render_infix(e));
    best = {{"score", report.best_score},
            {"seq", serialize(report.best)},
            {"infix", infix},
            {"origin", origin_name(report.best.origin)}};
  }
  return nlohmann::json{{"dataset", report.dataset},
                        {"task", task_name(report.task)},
                        {"metric", report.task == Task::Classification ? "f1_weighted" : "one_minus_rae"},
                        {"baseline", report.baseline},
                        {"best", best},
                        {"attempts", report.attempts},
                        {"backend_failures", report.backend_failures},
                        {"verdicts", report.verdict_counts},
                        {"eval_calls", report.eval_calls},
                        {"budget_exhausted", report.budget_exhausted},
                        {"seed_population_best", report.seed_population_best},
                        {"iterations", cfg.iterations},
                        {"k_populations", cfg.k_populations},
                        {"population_cap", cfg.population_cap},
                        {"demos", cfg.demos},
                        {"strategy", strategy_name(cfg.strategy)},
                        {"backend", backend_name(cfg.backend)},
                        {"collector", collector_name(cfg.collector)},
                        {"downstream", model_kind_name(cfg.eval.model.kind)},
                        {"seed", cfg.seed}};
}

inline Individual raw_feature_individual(std::size_t n_features, double score) {
  Individual ind;
  ind.expressions.reserve(n_features);
  for (std::size_t i = 0; i < n_features; ++i)
    ind.expressions.push_back(Expression{{Token::feature(static_cast<int>(i))}});
  ind.score = score;
  ind.origin = Origin::Seed;
  return ind;
}

}  // namespace detail

// The full loop: seed K populations with the configured collector, then for
// each iteration sweep the populations with sample -> prompt -> generate ->
// extract -> verify -> score -> insert, culling on the configured cadence.
// Deterministic under the mock backend with fixed seeds.
inline RunReport run(const RunConfig& cfg, const Dataset& ds) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto wall_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  };

  const Vocab vocab{static_cast<int>(ds.n_cols()), cfg.ops};
  const FoldPlan folds = make_folds(ds, cfg.eval.cv_k, cfg.eval.cv_seed);

  RunReport report;
  report.dataset = ds.name;
  report.task = ds.task;
  report.out_dir = cfg.out_dir;

  std::ofstream traj_out;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    traj_out.open(cfg.out_dir + "/trajectory.jsonl", std::ios::binary);
    if (!traj_out) throw ConfigError("cannot write trajectory file in " + cfg.out_dir);
  }

  int eval_calls = 0;
  std::unordered_map<std::string, double> score_memo;  // canonical -> score
  auto score_matrix = [&](const Matrix& X) {
    ++eval_calls;
    return cross_val_score(X, ds.y, ds.task, ds.n_classes, cfg.eval.model, folds).value;
  };

  report.baseline = score_matrix(ds.X);

  // ---- Phase 1: seed the database ----
  std::unique_ptr<Database> db;
  if (cfg.collector == CollectorKind::Restore) {
    db = std::make_unique<Database>(Database::restore_file(cfg.restore_path, cfg.population_cap, vocab));
    if (db->k() % 2 != 0) throw ConfigError("restored database must hold an even population count");
    for (const auto& pop : db->populations())
      report.seed_population_best.push_back(pop.members.empty() ? report.baseline : population_score(pop));
  } else {
    CollectorConfig col = cfg.rl;
    col.episodes = cfg.k_populations;  // one population per episode
    col.ops = cfg.ops;
    col.seed = Rng::mix(cfg.seed, 101);
    const CollectionRun seeded = cfg.collector == CollectorKind::Rl ? collect(ds, col, cfg.eval)
                                                                    : random_collect(ds, col, cfg.eval);
    eval_calls += seeded.eval_calls;
    db = std::make_unique<Database>(cfg.k_populations, cfg.population_cap);
    for (int e = 0; e < cfg.k_populations; ++e) {
      const auto& members = seeded.populations[static_cast<std::size_t>(e)];
      double pop_best = report.baseline;
      for (const auto& ind : members) {
        pop_best = std::max(pop_best, ind.score.value_or(report.baseline));
        db->insert(e, ind);
      }
      report.seed_population_best.push_back(pop_best);
    }
  }

  // collection can leave a population empty (all steps degenerate or
  // globally duplicate); fall back to the untransformed feature set
  for (int e = 0; e < db->k(); ++e)
    if (db->population(e).members.empty())
      db->place_seed(e, detail::raw_feature_individual(ds.n_cols(), report.baseline));

  const int k_pops = db->k();

  double best_score = report.baseline;
  Individual best = detail::raw_feature_individual(ds.n_cols(), report.baseline);
  if (const Individual* seeded_best = db->best_individual(); seeded_best && seeded_best->score.value_or(best_score) >= best_score) {
    best = *seeded_best;
    best_score = seeded_best->score.value_or(best_score);
  }
  for (const auto& pop : db->populations())
    for (const auto& m : pop.members) score_memo[canonical_string(m.ind)] = m.ind.score.value_or(0.0);

  // ---- Phase 2: generation loop ----
  std::vector<std::unique_ptr<GeneratorBackend>> backends;
  std::vector<Rng> samplers;
  for (int p = 0; p < k_pops; ++p) {
    samplers.emplace_back(Rng::mix(cfg.seed, 300 + static_cast<std::uint64_t>(p)));
    if (cfg.backend == BackendKind::Mock) {
      MockEvolverConfig mock = cfg.mock;
      mock.marker = cfg.output_marker;
      mock.seed = Rng::mix(cfg.seed ^ cfg.mock.seed, 400 + static_cast<std::uint64_t>(p));
      backends.push_back(std::make_unique<MockEvolver>(mock, vocab));
    } else {
      backends.push_back(std::make_unique<RemoteLlm>(cfg.remote));
    }
  }

  const std::string task_text = std::string("Find a feature transformation that raises the ") +
                                (ds.task == Task::Classification ? "weighted F1" : "1-RAE") +
                                " of a downstream " + model_kind_name(cfg.eval.model.kind) +
                                " model on the tabular dataset \"" + ds.name + "\".";

  auto log_point = [&](TrajectoryPoint pt) {
    pt.wall_ms = wall_ms();
    if (traj_out.is_open()) traj_out << detail::trajectory_line(pt, cfg.log_wall_ms).dump() << "\n";
    report.trajectory.push_back(std::move(pt));
  };

  for (int iter = 1; iter <= cfg.iterations && !report.budget_exhausted; ++iter) {
    for (int p = 0; p < k_pops; ++p) {
      if (eval_calls >= cfg.eval_budget) {
        report.budget_exhausted = true;
        break;
      }

      TrajectoryPoint pt;
      pt.iteration = iter;
      pt.pop = p;
      ++report.attempts;

      GenerationResult gen;
      try {
        const auto sample = db->sample_for_prompt(p, cfg.demos, cfg.strategy, samplers[static_cast<std::size_t>(p)]);
        PromptContext ctx;
        ctx.task_description = task_text;
        ctx.operator_tokens = cfg.ops.names();
        ctx.n_features = vocab.n_features;
        ctx.output_marker = cfg.output_marker;
        ctx.max_prompt_chars = cfg.max_prompt_chars;
        for (const auto& [ind, score] : sample) ctx.demonstrations.push_back(serialize(ind));
        gen = backends[static_cast<std::size_t>(p)]->generate(build_prompt(ctx));
      } catch (const PromptError& e) {
        gen = {false, "", e.what()};
      }

      if (!gen.ok) {
        ++report.backend_failures;
        pt.outcome = "backend_error";
        pt.best_score_so_far = best_score;
        pt.valid_count_so_far = report.valid_count;
        log_point(std::move(pt));
        continue;
      }

      const auto extracted = extract_sequence(gen.text, cfg.output_marker, vocab);
      Verdict verdict = verify(extracted.value_or(""), *db, vocab, cfg.max_features);
      pt.outcome = outcome_name(verdict.outcome);
      ++report.verdict_counts[pt.outcome];

      if (verdict.outcome == VerdictOutcome::Valid) {
        ++report.valid_count;
        Individual ind = std::move(*verdict.individual);
        ind.origin = Origin::Generator;
        const std::string canonical = canonical_string(ind);

        std::optional<double> candidate_score;
        if (const auto memo = score_memo.find(canonical); memo != score_memo.end()) {
          candidate_score = memo->second;
        } else if (const auto mat = materialize(ind, ds.X)) {
          try {
            candidate_score = score_matrix(*mat);
            score_memo.emplace(canonical, *candidate_score);
          } catch (const std::runtime_error&) {
            // an unscorable candidate is skipped like an all-degenerate one;
            // only configuration and dataset errors abort a run
            candidate_score.reset();
          }
        }
        if (candidate_score) {
          ind.score = *candidate_score;
          pt.candidate_score = candidate_score;
          if (*candidate_score > best_score) {
            best_score = *candidate_score;
            best = ind;
          }
          db->insert(p, std::move(ind));
        }
        // all-degenerate candidates stay Valid in the accounting but are
        // not scorable and never inserted
      }

      pt.best_score_so_far = best_score;
      pt.valid_count_so_far = report.valid_count;
      log_point(std::move(pt));
    }

    if (!report.budget_exhausted && iter % cfg.cull_every == 0) db->cull_populations();
    if (cfg.debug_validate) db->validate();
  }

  report.best = best;
  report.best_score = best_score;
  report.eval_calls = eval_calls;
  for (const char* name : {"valid", "token_out_of_vocabulary", "malformed_postfix", "duplicate"})
    report.verdict_counts.try_emplace(name, 0);

  if (!cfg.out_dir.empty()) {
    traj_out.close();
    db->dump_file(cfg.out_dir + "/db_dump.jsonl");
    std::ofstream summary(cfg.out_dir + "/summary.json", std::ios::binary);
    summary << detail::summary_json(cfg, report).dump(2) << "\n";
  }
  return report;
}

inline RunReport run(const RunConfig& cfg) {
  LoadOptions opts;
  opts.task_override = cfg.task_override;
  const Dataset ds = load_csv(cfg.data_path, cfg.target, opts, cfg.dataset_name);
  return run(cfg, ds);
}

// ---------------------------------------------------------------------------
// Variant comparison harness (prompt strategies, collectors).
// ---------------------------------------------------------------------------

struct CompareRow {
  std::string label;
  double mean_best = 0.0;
  double mean_valid = 0.0;
  double mean_seed_best = 0.0;  // mean over populations and repeats
  int repeats = 0;
};

inline CompareRow summarize_runs(const std::string& label, const std::vector<RunReport>& reports) {
  CompareRow row;
  row.label = label;
  row.repeats = static_cast<int>(reports.size());
  for (const auto& r : reports) {
    row.mean_best += r.best_score;
    row.mean_valid += r.valid_count;
    double seed_mean = 0.0;
    for (double s : r.seed_population_best) seed_mean += s;
    row.mean_seed_best += r.seed_population_best.empty() ? 0.0 : seed_mean / static_cast<double>(r.seed_population_best.size());
  }
  const auto n = static_cast<double>(reports.size());
  row.mean_best /= n;
  row.mean_valid /= n;
  row.mean_seed_best /= n;
  return row;
}

inline std::vector<CompareRow> compare_strategies(const RunConfig& base, const Dataset& ds,
                                                  const std::vector<Strategy>& strategies, int repeats) {
  if (strategies.size() < 2) throw ConfigError("compare_strategies: need at least two strategies");
  std::vector<CompareRow> rows;
  for (Strategy strategy : strategies) {
    std::vector<RunReport> reports;
    for (int r = 0; r < repeats; ++r) {
      RunConfig cfg = base;
      cfg.strategy = strategy;
      cfg.seed = base.seed + static_cast<std::uint64_t>(r);
      if (!base.out_dir.empty())
        cfg.out_dir = base.out_dir + "/" + strategy_name(strategy) + "_seed" + std::to_string(cfg.seed);
      reports.push_back(run(cfg, ds));
    }
    rows.push_back(summarize_runs(strategy_name(strategy), reports));
  }
  return rows;
}

inline std::vector<CompareRow> compare_collectors(const RunConfig& base, const Dataset& ds, int repeats) {
  std::vector<CompareRow> rows;
  for (CollectorKind collector : {CollectorKind::Rl, CollectorKind::Random}) {
    std::vector<RunReport> reports;
    for (int r = 0; r < repeats; ++r) {
      RunConfig cfg = base;
      cfg.collector = collector;
      cfg.seed = base.seed + static_cast<std::uint64_t>(r);
      if (!base.out_dir.empty())
        cfg.out_dir = base.out_dir + "/" + collector_name(collector) + "_seed" + std::to_string(cfg.seed);
      reports.push_back(run(cfg, ds));
    }
    rows.push_back(summarize_runs(collector_name(collector), reports));
  }
  return rows;
}

}  // namespace featforge
