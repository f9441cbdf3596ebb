#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "featforge/collector_config.hpp"
#include "featforge/cross_val.hpp"
#include "featforge/dataset.hpp"
#include "featforge/expr.hpp"
#include "featforge/qlearn.hpp"
#include "featforge/rng.hpp"
#include "featforge/state_rep.hpp"

namespace featforge {

// One collection pass: M episodes of T steps; each episode's accepted steps
// form one population of scored individuals.
struct CollectionRun {
  int episodes = 0;
  int steps = 0;
  double baseline = 0.0;  // score of the untransformed feature set
  std::vector<std::vector<Individual>> populations;
  std::vector<std::vector<double>> accepted_rewards;  // per episode, accepted steps only
  std::vector<int> op_selection_counts;               // per operator-set index, all steps
  int eval_calls = 0;
};

namespace detail {

inline std::unique_ptr<QApproximator> make_approximator(const CollectorConfig& cfg, int n_actions,
                                                        std::uint64_t seed) {
  if (cfg.approximator == ApproxKind::Linear) return std::make_unique<LinearQ>(n_actions);
  return std::make_unique<MlpQ>(n_actions, cfg.mlp_hidden, seed);
}

// Shared episode loop. When agents are null every choice is uniform random
// and no learning happens (the random-collector variant).
inline CollectionRun run_episodes(const Dataset& ds, const CollectorConfig& cfg, const EvalConfig& eval,
                                  bool learn, Origin origin) {
  const int n_original = static_cast<int>(ds.n_cols());
  const int max_features = n_original + cfg.steps;
  const int total_steps = cfg.episodes * cfg.steps;

  Rng rng(cfg.seed);
  const FoldPlan folds = make_folds(ds, eval.cv_k, eval.cv_seed);

  CollectionRun run;
  run.episodes = cfg.episodes;
  run.steps = cfg.steps;

  auto score_matrix = [&](const Matrix& X) {
    ++run.eval_calls;
    return cross_val_score(X, ds.y, ds.task, ds.n_classes, eval.model, folds).value;
  };

  Agent head{AgentRole::HeadFeature, nullptr, cfg.epsilon_start, cfg.learning_rate, cfg.gamma};
  Agent operation{AgentRole::Operation, nullptr, cfg.epsilon_start, cfg.learning_rate, cfg.gamma};
  Agent tail{AgentRole::TailFeature, nullptr, cfg.epsilon_start, cfg.learning_rate, cfg.gamma};
  RunningNorm norm;
  if (learn) {
    head.q = make_approximator(cfg, max_features, Rng::mix(cfg.seed, 11));
    operation.q = make_approximator(cfg, static_cast<int>(cfg.ops.ops().size()), Rng::mix(cfg.seed, 13));
    tail.q = make_approximator(cfg, max_features, Rng::mix(cfg.seed, 17));
  }

  const auto& op_list = cfg.ops.ops();
  run.op_selection_counts.assign(op_list.size(), 0);
  run.baseline = score_matrix(ds.X);

  int global_step = 0;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    // reset the working set to the original features
    std::vector<Expression> working_exprs;
    working_exprs.reserve(static_cast<std::size_t>(max_features));
    Matrix working = ds.X;
    for (int i = 0; i < n_original; ++i) working_exprs.push_back(Expression{{Token::feature(i)}});

    double y_prev = run.baseline;
    StateVector state_raw{};
    StateVector state_std{};
    if (learn) {
      state_raw = represent(working);
      norm.observe(state_raw);
      state_std = norm.standardized(state_raw);
    }

    std::vector<Individual> population;
    std::vector<double> rewards;

    for (int step = 1; step <= cfg.steps; ++step, ++global_step) {
      const double frac = total_steps > 1 ? static_cast<double>(global_step) / static_cast<double>(total_steps - 1) : 0.0;
      const double eps = learn ? cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac : 1.0;
      head.epsilon = operation.epsilon = tail.epsilon = eps;

      const int n_current = static_cast<int>(working_exprs.size());
      int head_action, op_action, tail_action;
      if (learn) {
        head_action = select_action(head, state_std, n_current, rng);
        op_action = select_action(operation, state_std, static_cast<int>(op_list.size()), rng);
        tail_action = select_action(tail, state_std, n_current, rng);
      } else {
        head_action = static_cast<int>(rng.below(static_cast<std::size_t>(n_current)));
        op_action = static_cast<int>(rng.below(op_list.size()));
        tail_action = static_cast<int>(rng.below(static_cast<std::size_t>(n_current)));
      }

      ++run.op_selection_counts[static_cast<std::size_t>(op_action)];
      const Op op = op_list[static_cast<std::size_t>(op_action)];
      Expression candidate;
      candidate.tokens = working_exprs[static_cast<std::size_t>(head_action)].tokens;
      if (op_arity(op) == 2) {
        const auto& tail_tokens = working_exprs[static_cast<std::size_t>(tail_action)].tokens;
        candidate.tokens.insert(candidate.tokens.end(), tail_tokens.begin(), tail_tokens.end());
      }
      candidate.tokens.push_back(Token::operation(op));

      const bool terminal = step == cfg.steps;
      auto column = evaluate_expression(candidate, ds.X);

      double reward;
      StateVector next_std = state_std;
      int n_next = n_current;
      if (!column) {
        // dead action: unchanged set, fixed penalty, nothing recorded
        reward = -cfg.degenerate_penalty;
      } else {
        working.add_col(std::move(*column));
        working_exprs.push_back(candidate);
        const double y_now = score_matrix(working);
        reward = y_now - y_prev;
        y_prev = y_now;
        n_next = n_current + 1;

        Individual ind;
        ind.expressions = working_exprs;
        ind.score = y_now;
        ind.origin = origin;
        population.push_back(std::move(ind));
        rewards.push_back(reward);

        if (learn) {
          state_raw = represent(working);
          norm.observe(state_raw);
          next_std = norm.standardized(state_raw);
        }
      }

      if (learn) {
        Transition tr;
        tr.state = state_std;
        tr.next_state = next_std;
        tr.head = head_action;
        tr.op = op_action;
        tr.tail = tail_action;
        tr.reward = reward;
        tr.terminal = terminal;
        tr.n_feature_actions = n_current;
        tr.n_feature_actions_next = n_next;
        tr.n_op_actions = static_cast<int>(op_list.size());
        q_update(head, tr);
        q_update(operation, tr);
        q_update(tail, tr);
        state_std = next_std;
      }
    }

    run.populations.push_back(std::move(population));
    run.accepted_rewards.push_back(std::move(rewards));
  }
  return run;
}

}  // namespace detail

// Algorithm: three cooperating epsilon-greedy agents pick (head, operation,
// tail) per step; the crossed feature joins the working set, the downstream
// score improvement is the reward, and each agent takes a Bellman step.
inline CollectionRun collect(const Dataset& ds, const CollectorConfig& cfg, const EvalConfig& eval) {
  if (cfg.episodes < 1 || cfg.steps < 1) throw std::invalid_argument("collect: episodes and steps must be >= 1");
  return detail::run_episodes(ds, cfg, eval, true, Origin::RlCollector);
}

// Ablation collector: identical loop with uniform random selections and no
// learning.
inline CollectionRun random_collect(const Dataset& ds, const CollectorConfig& cfg, const EvalConfig& eval) {
  if (cfg.episodes < 1 || cfg.steps < 1) throw std::invalid_argument("random_collect: episodes and steps must be >= 1");
  return detail::run_episodes(ds, cfg, eval, false, Origin::RandomCollector);
}

}  // namespace featforge
