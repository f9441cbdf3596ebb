#pragma once

#include <cstdint>

#include "featforge/expr.hpp"
#include "featforge/models.hpp"

namespace featforge {

enum class ApproxKind : std::uint8_t { Linear, Mlp };

struct CollectorConfig {
  int episodes = 8;
  int steps = 12;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  double gamma = 0.9;
  double learning_rate = 1e-3;
  ApproxKind approximator = ApproxKind::Mlp;
  int mlp_hidden = 32;
  double degenerate_penalty = 0.01;
  OperatorSet ops = OperatorSet::all();
  std::uint64_t seed = 0;
};

struct EvalConfig {
  ModelSpec model;
  int cv_k = 5;
  std::uint64_t cv_seed = 0;
};

}  // namespace featforge
