#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featforge/expr.hpp"
#include "featforge/rng.hpp"

namespace featforge {

struct GenerationResult {
  bool ok = false;
  std::string text;   // raw backend output, marker included
  std::string error;  // set when !ok
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual GenerationResult generate(const std::string& prompt) = 0;
  virtual std::string kind() const = 0;
};

// ---------------------------------------------------------------------------
// Sequence extraction from free-form generator replies.
// ---------------------------------------------------------------------------

namespace detail {

inline bool token_boundary(char c) {
  return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_');
}

// Length of a grammar token starting at `pos`, or 0: "f" DIGIT+ or any
// enabled operator name/symbol.
inline std::size_t match_token(std::string_view text, std::size_t pos, const Vocab& vocab) {
  auto delimited = [&](std::size_t end) {
    return end >= text.size() || token_boundary(text[end]);
  };
  // feature token
  if (text[pos] == 'f') {
    std::size_t end = pos + 1;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end > pos + 1 && delimited(end)) return end - pos;
  }
  // operator token, longest name first
  std::size_t best = 0;
  for (Op op : vocab.ops.ops()) {
    for (const std::string_view cand : {std::string_view(op_info(op).name), std::string_view(op_info(op).token)}) {
      if (cand.size() <= best) continue;
      if (text.compare(pos, cand.size(), cand) != 0) continue;
      const std::size_t end = pos + cand.size();
      const bool word = std::isalpha(static_cast<unsigned char>(cand.front()));
      if (word && !delimited(end)) continue;
      if (!word && end < text.size() && std::isalnum(static_cast<unsigned char>(text[end]))) continue;
      best = cand.size();
    }
  }
  return best;
}

// Longest substring of `text` shaped like the serialization grammar:
// tokens separated by spaces, expressions separated by commas.
inline std::optional<std::string> longest_grammar_span(std::string_view text, const Vocab& vocab) {
  std::size_t best_start = 0, best_len = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (i > 0 && !token_boundary(text[i - 1])) {
      ++i;
      continue;
    }
    const std::size_t first = match_token(text, i, vocab);
    if (first == 0) {
      ++i;
      continue;
    }
    std::size_t end = i + first;
    while (true) {
      std::size_t sep = end;
      bool comma = false, space = false;
      while (sep < text.size() && (text[sep] == ' ' || text[sep] == ',')) {
        if (text[sep] == ',') {
          if (comma) break;  // at most one comma per separator
          comma = true;
        } else {
          space = true;
        }
        ++sep;
      }
      if (sep == end || !(comma || space) || sep >= text.size()) break;
      const std::size_t next = match_token(text, sep, vocab);
      if (next == 0) break;
      end = sep + next;
    }
    if (end - i > best_len) {
      best_len = end - i;
      best_start = i;
    }
    i = end + 1;
  }
  if (best_len == 0) return std::nullopt;
  return std::string(text.substr(best_start, best_len));
}

}  // namespace detail

// Pulls the candidate sequence out of a raw reply: the text after the first
// marker occurrence up to the first blank line, or failing that the longest
// substring matching the serialization grammar. nullopt when neither yields
// anything.
inline std::optional<std::string> extract_sequence(const std::string& raw, const std::string& marker,
                                                   const Vocab& vocab) {
  if (!marker.empty()) {
    const std::size_t pos = raw.find(marker);
    if (pos != std::string::npos) {
      std::size_t start = pos + marker.size();
      std::size_t end = raw.size();
      for (std::size_t i = start; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\n' && (raw[i + 1] == '\n' || (raw[i + 1] == '\r' && i + 2 < raw.size() && raw[i + 2] == '\n'))) {
          end = i;
          break;
        }
      }
      const auto picked = detail::trim(std::string_view(raw).substr(start, end - start));
      if (!picked.empty()) return std::string(picked);
    }
  }
  return detail::longest_grammar_span(raw, vocab);
}

// ---------------------------------------------------------------------------
// MockEvolver: the offline backend. Recovers the demonstrations from the
// prompt, crosses the two highest-priority ones at a single expression-list
// cut, then applies arity-preserving token mutation. Children are valid
// postfix by construction.
// ---------------------------------------------------------------------------

struct MockEvolverConfig {
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  std::uint64_t seed = 0;
  std::string marker = "### SEQUENCE:";
};

class MockEvolver final : public GeneratorBackend {
 public:
  MockEvolver(MockEvolverConfig cfg, Vocab vocab)
      : cfg_(std::move(cfg)), vocab_(std::move(vocab)), rng_(cfg_.seed) {}

  std::string kind() const override { return "mock"; }

  // Demonstration lines as rendered by build_prompt: a "priority_v<i>:" line
  // followed by the sequence line.
  static std::vector<std::string> parse_demonstrations(const std::string& prompt) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < prompt.size()) {
      std::size_t eol = prompt.find('\n', pos);
      if (eol == std::string::npos) eol = prompt.size();
      const std::string_view line(prompt.data() + pos, eol - pos);
      if (is_priority_label(line) && eol < prompt.size()) {
        std::size_t next_eol = prompt.find('\n', eol + 1);
        if (next_eol == std::string::npos) next_eol = prompt.size();
        out.emplace_back(prompt.substr(eol + 1, next_eol - eol - 1));
        pos = next_eol + 1;
      } else {
        pos = eol + 1;
      }
    }
    return out;
  }

  GenerationResult generate(const std::string& prompt) override {
    std::vector<Individual> demos;
    for (const auto& text : parse_demonstrations(prompt)) {
      auto parsed = parse_postfix(text, vocab_);
      if (parsed.ok()) demos.push_back(std::move(parsed.individual));
    }
    if (demos.empty()) return {false, "", "no parsable demonstrations in prompt"};

    const Individual& best = demos.back();
    const Individual& second = demos.size() >= 2 ? demos[demos.size() - 2] : demos.back();

    Individual child;
    if (rng_.uniform01() < cfg_.crossover_rate) {
      // single-cut crossover over expression lists; identical parents
      // reproduce themselves exactly
      const std::size_t cut = rng_.below(best.expressions.size() + 1);
      const std::size_t cut_b = std::min(cut, second.expressions.size());
      child.expressions.assign(best.expressions.begin(),
                               best.expressions.begin() + static_cast<std::ptrdiff_t>(cut));
      child.expressions.insert(child.expressions.end(),
                               second.expressions.begin() + static_cast<std::ptrdiff_t>(cut_b),
                               second.expressions.end());
      if (child.expressions.empty()) child.expressions = best.expressions;
    } else {
      child.expressions = best.expressions;
    }

    const auto unary = vocab_.ops.unary();
    const auto binary = vocab_.ops.binary();
    for (auto& expr : child.expressions) {
      for (auto& token : expr.tokens) {
        if (rng_.uniform01() >= cfg_.mutation_rate) continue;
        if (token.is_feature()) {
          token.index = static_cast<int>(rng_.below(static_cast<std::size_t>(vocab_.n_features)));
        } else if (op_arity(token.op) == 1 && !unary.empty()) {
          token.op = unary[rng_.below(unary.size())];
        } else if (op_arity(token.op) == 2 && !binary.empty()) {
          token.op = binary[rng_.below(binary.size())];
        }
      }
    }
    return {true, cfg_.marker + " " + serialize(child), ""};
  }

 private:
  static bool is_priority_label(std::string_view line) {
    if (line.size() < 12 || line.compare(0, 10, "priority_v") != 0 || line.back() != ':') return false;
    for (std::size_t i = 10; i + 1 < line.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(line[i]))) return false;
    return true;
  }

  MockEvolverConfig cfg_;
  Vocab vocab_;
  Rng rng_;
};

}  // namespace featforge
