#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace featforge {

struct PromptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a few-shot prompt is rendered from. Demonstrations are given in
// priority order: index 0 becomes priority_v0 (lowest), the last entry the
// highest priority.
struct PromptContext {
  std::string task_description;
  std::vector<std::string> operator_tokens;
  int n_features = 0;
  std::vector<std::string> demonstrations;
  std::string output_marker = "### SEQUENCE:";
  std::size_t max_prompt_chars = 8192;
};

// Deterministic template: instruction paragraph, ranked demonstrations, then
// the request for one new sequence after the marker. Identical contexts
// render byte-identical prompts.
inline std::string build_prompt(const PromptContext& ctx) {
  if (ctx.demonstrations.empty()) throw PromptError("build_prompt: need at least one demonstration");
  if (ctx.n_features < 1) throw PromptError("build_prompt: need at least one feature");

  std::string p;
  p += ctx.task_description;
  p += "\n";
  p += "A candidate is a comma-separated list of postfix expressions built from the tokens below.\n";
  p += "Features:";
  for (int i = 0; i < ctx.n_features; ++i) {
    p += " f";
    p += std::to_string(i);
  }
  p += "\nOperators:";
  for (const auto& op : ctx.operator_tokens) {
    p += " ";
    p += op;
  }
  p += "\n";
  p += "In a postfix expression the operands come first and the operator last, so no parentheses are needed.\n";
  p += "Here are sample candidates ranked by downstream performance; a higher priority number means a better score.\n\n";

  for (std::size_t i = 0; i < ctx.demonstrations.size(); ++i) {
    p += "priority_v" + std::to_string(i) + ":\n";
    p += ctx.demonstrations[i];
    p += "\n";
  }

  p += "\nStudy how the higher-priority candidates differ from the lower ones and propose one new candidate that should score even higher.\n";
  p += "Reply with a single line containing only the new candidate, placed immediately after the marker ";
  p += ctx.output_marker;
  p += "\n";

  if (p.size() > ctx.max_prompt_chars)
    throw PromptError("build_prompt: prompt exceeds " + std::to_string(ctx.max_prompt_chars) + " chars");
  return p;
}

}  // namespace featforge
