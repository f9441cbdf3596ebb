#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "featforge/rng.hpp"
#include "featforge/state_rep.hpp"

namespace featforge {

// Q-value function over a fixed maximum action count; callers mask to the
// currently available prefix. Parameter access and dQ/dtheta exist so the
// Bellman-residual gradient can be checked against finite differences.
class QApproximator {
 public:
  virtual ~QApproximator() = default;

  virtual int max_actions() const = 0;
  virtual std::vector<double> q_values(const StateVector& state) const = 0;

  // One semi-gradient step on (Q(s,a) - target)^2 with the target held
  // constant: theta -= lr * 2 * error * dQ/dtheta, error = Q(s,a) - target.
  virtual void sgd_step(const StateVector& state, int action, double error, double lr) = 0;

  virtual std::vector<double> params() const = 0;
  virtual void set_params(const std::vector<double>& p) = 0;
  virtual std::vector<double> q_gradient(const StateVector& state, int action) const = 0;

  virtual std::unique_ptr<QApproximator> clone() const = 0;
};

// q_a = w_a . s + b_a. Parameters are laid out per action: 49 weights then
// the bias. Zero-initialized, so untrained Q-values tie at zero.
class LinearQ final : public QApproximator {
 public:
  explicit LinearQ(int n_actions)
      : n_actions_(n_actions), params_(static_cast<std::size_t>(n_actions) * (kStateDim + 1), 0.0) {}

  int max_actions() const override { return n_actions_; }

  std::vector<double> q_values(const StateVector& state) const override {
    std::vector<double> q(static_cast<std::size_t>(n_actions_));
    for (int a = 0; a < n_actions_; ++a) {
      const std::size_t base = static_cast<std::size_t>(a) * (kStateDim + 1);
      double s = params_[base + kStateDim];
      for (int i = 0; i < kStateDim; ++i) s += params_[base + static_cast<std::size_t>(i)] * state[static_cast<std::size_t>(i)];
      q[static_cast<std::size_t>(a)] = s;
    }
    return q;
  }

  void sgd_step(const StateVector& state, int action, double error, double lr) override {
    const double g = 2.0 * error * lr;
    const std::size_t base = static_cast<std::size_t>(action) * (kStateDim + 1);
    for (int i = 0; i < kStateDim; ++i) params_[base + static_cast<std::size_t>(i)] -= g * state[static_cast<std::size_t>(i)];
    params_[base + kStateDim] -= g;
  }

  std::vector<double> params() const override { return params_; }
  void set_params(const std::vector<double>& p) override {
    if (p.size() != params_.size()) throw std::invalid_argument("LinearQ: parameter size mismatch");
    params_ = p;
  }

  std::vector<double> q_gradient(const StateVector& state, int action) const override {
    std::vector<double> g(params_.size(), 0.0);
    const std::size_t base = static_cast<std::size_t>(action) * (kStateDim + 1);
    for (int i = 0; i < kStateDim; ++i) g[base + static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)];
    g[base + kStateDim] = 1.0;
    return g;
  }

  std::unique_ptr<QApproximator> clone() const override { return std::make_unique<LinearQ>(*this); }

 private:
  int n_actions_;
  std::vector<double> params_;
};

// One hidden tanh layer. Layout: W1 (hidden x 49), b1, W2 (actions x hidden),
// b2. Weights start at small seeded uniform values.
class MlpQ final : public QApproximator {
 public:
  MlpQ(int n_actions, int hidden, std::uint64_t seed) : n_actions_(n_actions), hidden_(hidden) {
    params_.resize(param_count());
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(kStateDim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t i = 0; i < w1_size(); ++i) params_[i] = rng.uniform(-r1, r1);
    for (std::size_t i = w2_offset(); i < w2_offset() + w2_size(); ++i) params_[i] = rng.uniform(-r2, r2);
  }

  int max_actions() const override { return n_actions_; }

  std::vector<double> q_values(const StateVector& state) const override {
    const auto h = hidden_activations(state);
    std::vector<double> q(static_cast<std::size_t>(n_actions_));
    for (int a = 0; a < n_actions_; ++a) {
      double s = params_[b2_offset() + static_cast<std::size_t>(a)];
      const std::size_t base = w2_offset() + static_cast<std::size_t>(a) * static_cast<std::size_t>(hidden_);
      for (int j = 0; j < hidden_; ++j) s += params_[base + static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
      q[static_cast<std::size_t>(a)] = s;
    }
    return q;
  }

  void sgd_step(const StateVector& state, int action, double error, double lr) override {
    const auto grad = q_gradient(state, action);
    const double g = 2.0 * error * lr;
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= g * grad[i];
  }

  std::vector<double> params() const override { return params_; }
  void set_params(const std::vector<double>& p) override {
    if (p.size() != params_.size()) throw std::invalid_argument("MlpQ: parameter size mismatch");
    params_ = p;
  }

  std::vector<double> q_gradient(const StateVector& state, int action) const override {
    std::vector<double> grad(params_.size(), 0.0);
    const auto h = hidden_activations(state);
    const std::size_t w2_base = w2_offset() + static_cast<std::size_t>(action) * static_cast<std::size_t>(hidden_);

    // output layer
    for (int j = 0; j < hidden_; ++j) grad[w2_base + static_cast<std::size_t>(j)] = h[static_cast<std::size_t>(j)];
    grad[b2_offset() + static_cast<std::size_t>(action)] = 1.0;

    // hidden layer through tanh'
    for (int j = 0; j < hidden_; ++j) {
      const double up = params_[w2_base + static_cast<std::size_t>(j)] *
                        (1.0 - h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)]);
      const std::size_t w1_base = static_cast<std::size_t>(j) * kStateDim;
      for (int i = 0; i < kStateDim; ++i)
        grad[w1_base + static_cast<std::size_t>(i)] = up * state[static_cast<std::size_t>(i)];
      grad[b1_offset() + static_cast<std::size_t>(j)] = up;
    }
    return grad;
  }

  std::unique_ptr<QApproximator> clone() const override { return std::make_unique<MlpQ>(*this); }

 private:
  std::vector<double> hidden_activations(const StateVector& state) const {
    std::vector<double> h(static_cast<std::size_t>(hidden_));
    for (int j = 0; j < hidden_; ++j) {
      double s = params_[b1_offset() + static_cast<std::size_t>(j)];
      const std::size_t base = static_cast<std::size_t>(j) * kStateDim;
      for (int i = 0; i < kStateDim; ++i)
        s += params_[base + static_cast<std::size_t>(i)] * state[static_cast<std::size_t>(i)];
      h[static_cast<std::size_t>(j)] = std::tanh(s);
    }
    return h;
  }

  std::size_t w1_size() const { return static_cast<std::size_t>(hidden_) * kStateDim; }
  std::size_t b1_offset() const { return w1_size(); }
  std::size_t w2_offset() const { return w1_size() + static_cast<std::size_t>(hidden_); }
  std::size_t w2_size() const { return static_cast<std::size_t>(n_actions_) * static_cast<std::size_t>(hidden_); }
  std::size_t b2_offset() const { return w2_offset() + w2_size(); }
  std::size_t param_count() const { return b2_offset() + static_cast<std::size_t>(n_actions_); }

  int n_actions_;
  int hidden_;
  std::vector<double> params_;
};

// Running mean/variance standardization of state inputs (Welford); the raw
// "count" statistic would otherwise dwarf the quantile entries.
struct RunningNorm {
  std::array<double, kStateDim> mean{};
  std::array<double, kStateDim> m2{};
  std::size_t count = 0;

  void observe(const StateVector& s) {
    ++count;
    for (int i = 0; i < kStateDim; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double delta = s[idx] - mean[idx];
      mean[idx] += delta / static_cast<double>(count);
      m2[idx] += delta * (s[idx] - mean[idx]);
    }
  }

  StateVector standardized(const StateVector& s) const {
    StateVector out{};
    for (int i = 0; i < kStateDim; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double var = count > 0 ? m2[idx] / static_cast<double>(count) : 0.0;
      out[idx] = (s[idx] - mean[idx]) / std::sqrt(var + 1e-8);
    }
    return out;
  }
};

enum class AgentRole : std::uint8_t { HeadFeature, Operation, TailFeature };

struct Agent {
  AgentRole role = AgentRole::HeadFeature;
  std::unique_ptr<QApproximator> q;
  double epsilon = 0.1;
  double learning_rate = 1e-3;
  double gamma = 0.9;
};

// Epsilon-greedy over the first n_actions Q entries; greedy ties break to
// the lowest index.
inline int select_action(const Agent& agent, const StateVector& state, int n_actions, Rng& rng) {
  if (n_actions < 1) throw std::invalid_argument("select_action: need at least one action");
  n_actions = std::min(n_actions, agent.q->max_actions());
  if (rng.uniform01() < agent.epsilon) return static_cast<int>(rng.below(static_cast<std::size_t>(n_actions)));
  const auto q = agent.q->q_values(state);
  int best = 0;
  for (int a = 1; a < n_actions; ++a)
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  return best;
}

struct Transition {
  StateVector state{};
  StateVector next_state{};
  int head = 0;
  int op = 0;
  int tail = 0;
  double reward = 0.0;
  bool terminal = false;
  int n_feature_actions = 0;       // feature-agent action count at `state`
  int n_feature_actions_next = 0;  // and at `next_state`
  int n_op_actions = 0;
};

// One Bellman step: target = r + gamma * max_a' Q(s', a') (r alone when
// terminal), followed by a semi-gradient SGD update on (Q(s,a) - target)^2.
inline void q_update(Agent& agent, const Transition& tr) {
  int action = 0;
  int next_budget = 0;
  switch (agent.role) {
    case AgentRole::HeadFeature:
      action = tr.head;
      next_budget = tr.n_feature_actions_next;
      break;
    case AgentRole::Operation:
      action = tr.op;
      next_budget = tr.n_op_actions;
      break;
    case AgentRole::TailFeature:
      action = tr.tail;
      next_budget = tr.n_feature_actions_next;
      break;
  }

  double target = tr.reward;
  if (!tr.terminal) {
    const auto next_q = agent.q->q_values(tr.next_state);
    const int budget = std::min(next_budget, agent.q->max_actions());
    double best = next_q[0];
    for (int a = 1; a < budget; ++a) best = std::max(best, next_q[static_cast<std::size_t>(a)]);
    target += agent.gamma * best;
  }
  const double q_sa = agent.q->q_values(tr.state)[static_cast<std::size_t>(action)];
  agent.q->sgd_step(tr.state, action, q_sa - target, agent.learning_rate);
}

}  // namespace featforge
