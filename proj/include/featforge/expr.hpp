#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featforge/matrix.hpp"

namespace featforge {

// Safe-evaluation constants. Every operator result is clamped to
// [-kValueClip, kValueClip], which keeps arbitrarily deep compositions
// finite; degeneracy is judged on the clamped column.
inline constexpr double kValueClip = 1e12;
inline constexpr double kDivEps = 1e-8;
inline constexpr double kDegenerateStd = 1e-12;

enum class Op : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Sqrt,
  Log,
  Square,
  Reciprocal,
  Sin,
  Cos,
  Tanh,
};

struct OpInfo {
  Op op;
  int arity;
  const char* name;   // long form, accepted on input
  const char* token;  // serialization token ("+" for add, "sqrt" for sqrt)
};

inline const std::array<OpInfo, 11>& op_table() {
  static const std::array<OpInfo, 11> table = {{
      {Op::Add, 2, "add", "+"},
      {Op::Sub, 2, "sub", "-"},
      {Op::Mul, 2, "mul", "*"},
      {Op::Div, 2, "div", "/"},
      {Op::Sqrt, 1, "sqrt", "sqrt"},
      {Op::Log, 1, "log", "log"},
      {Op::Square, 1, "square", "square"},
      {Op::Reciprocal, 1, "reciprocal", "reciprocal"},
      {Op::Sin, 1, "sin", "sin"},
      {Op::Cos, 1, "cos", "cos"},
      {Op::Tanh, 1, "tanh", "tanh"},
  }};
  return table;
}

inline const OpInfo& op_info(Op op) { return op_table()[static_cast<std::size_t>(op)]; }
inline int op_arity(Op op) { return op_info(op).arity; }

inline double clip_value(double v) {
  if (v > kValueClip) return kValueClip;
  if (v < -kValueClip) return -kValueClip;
  return v;  // NaN cannot reach here; operands are finite and rules are total
}

inline double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Sqrt: return clip_value(std::sqrt(std::fabs(a)));
    case Op::Log: return clip_value(std::log(std::fabs(a) + kDivEps));
    case Op::Square: return clip_value(a * a);
    case Op::Reciprocal: {
      // protected division of 1; sign(0) treated as +1
      const double denom = std::fabs(a) > kDivEps ? a : (std::signbit(a) && a != 0.0 ? -kDivEps : kDivEps);
      return clip_value(1.0 / denom);
    }
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tanh: return std::tanh(a);
    default: break;
  }
  return 0.0;
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return clip_value(a + b);
    case Op::Sub: return clip_value(a - b);
    case Op::Mul: return clip_value(a * b);
    case Op::Div: {
      // protected division; sign(0) treated as +1
      const double denom = std::fabs(b) > kDivEps ? b : (std::signbit(b) && b != 0.0 ? -kDivEps : kDivEps);
      return clip_value(a / denom);
    }
    default: break;
  }
  return 0.0;
}

// The operator vocabulary configured for a run. Defaults to the full
// built-in set; a run may restrict to any subset.
class OperatorSet {
 public:
  OperatorSet() = default;

  static OperatorSet all() {
    OperatorSet s;
    for (const auto& info : op_table()) s.add(info.op);
    return s;
  }

  static OperatorSet of(const std::vector<Op>& ops) {
    OperatorSet s;
    for (Op op : ops) s.add(op);
    return s;
  }

  // Names may be long forms or the +-*/ aliases. Unknown names yield nullopt.
  static std::optional<OperatorSet> from_names(const std::vector<std::string>& names) {
    OperatorSet s;
    for (const auto& n : names) {
      const auto op = lookup(n);
      if (!op) return std::nullopt;
      s.add(*op);
    }
    if (s.ops_.empty()) return std::nullopt;
    return s;
  }

  static std::optional<Op> lookup(std::string_view text) {
    for (const auto& info : op_table())
      if (text == info.name || text == info.token) return info.op;
    return std::nullopt;
  }

  bool contains(Op op) const { return member_[static_cast<std::size_t>(op)]; }
  const std::vector<Op>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

  std::vector<Op> unary() const { return with_arity(1); }
  std::vector<Op> binary() const { return with_arity(2); }

  // Resolves a token string against this set; rejects ops not enabled here.
  std::optional<Op> resolve(std::string_view token) const {
    const auto op = lookup(token);
    if (op && contains(*op)) return op;
    return std::nullopt;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(ops_.size());
    for (Op op : ops_) out.emplace_back(op_info(op).token);
    return out;
  }

 private:
  void add(Op op) {
    if (!member_[static_cast<std::size_t>(op)]) {
      member_[static_cast<std::size_t>(op)] = true;
      ops_.push_back(op);
    }
  }

  std::vector<Op> with_arity(int a) const {
    std::vector<Op> out;
    for (Op op : ops_)
      if (op_arity(op) == a) out.push_back(op);
    return out;
  }

  std::vector<Op> ops_;
  std::array<bool, 11> member_{};
};

struct Token {
  enum class Kind : std::uint8_t { FeatureRef, Operator };

  Kind kind = Kind::FeatureRef;
  int index = 0;     // valid when kind == FeatureRef
  Op op = Op::Add;   // valid when kind == Operator

  static Token feature(int idx) {
    Token t;
    t.kind = Kind::FeatureRef;
    t.index = idx;
    return t;
  }
  static Token operation(Op op) {
    Token t;
    t.kind = Kind::Operator;
    t.op = op;
    return t;
  }

  bool is_feature() const { return kind == Kind::FeatureRef; }

  std::string text() const {
    if (is_feature()) return "f" + std::to_string(index);
    return op_info(op).token;
  }

  friend bool operator==(const Token& a, const Token& b) {
    if (a.kind != b.kind) return false;
    return a.is_feature() ? a.index == b.index : a.op == b.op;
  }
};

// One generated feature: a postfix token sequence.
struct Expression {
  std::vector<Token> tokens;

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i].text();
    }
    return out;
  }

  friend bool operator==(const Expression& a, const Expression& b) { return a.tokens == b.tokens; }
};

enum class Origin : std::uint8_t { RlCollector, RandomCollector, Generator, Seed };

inline const char* origin_name(Origin o) {
  switch (o) {
    case Origin::RlCollector: return "rl_collector";
    case Origin::RandomCollector: return "random_collector";
    case Origin::Generator: return "generator";
    case Origin::Seed: return "seed";
  }
  return "seed";
}

inline std::optional<Origin> origin_from_name(std::string_view s) {
  if (s == "rl_collector") return Origin::RlCollector;
  if (s == "random_collector") return Origin::RandomCollector;
  if (s == "generator") return Origin::Generator;
  if (s == "seed") return Origin::Seed;
  return std::nullopt;
}

// A full transformed feature set: the unit of storage and evolution.
struct Individual {
  std::vector<Expression> expressions;
  std::optional<double> score;
  Origin origin = Origin::Seed;

  bool same_expressions(const Individual& other) const { return expressions == other.expressions; }
};

struct Vocab {
  int n_features = 0;
  OperatorSet ops = OperatorSet::all();
};

// ---------------------------------------------------------------------------
// Parsing and serialization
//
// Grammar (bit-exact across prompts, generator output, dumps and CLI I/O):
//   individual := expr ("," SP expr)*
//   expr       := token (SP token)*
//   token      := "f" DIGIT+ | opname
// ---------------------------------------------------------------------------

enum class ParseStatus : std::uint8_t { Ok, Empty, UnknownToken, MalformedPostfix };

struct ParseResult {
  ParseStatus status = ParseStatus::Ok;
  Individual individual;  // populated iff status == Ok
  std::string detail;     // offending token or position note

  bool ok() const { return status == ParseStatus::Ok; }
};

inline bool stack_balanced(const Expression& e) {
  if (e.tokens.empty()) return false;
  int depth = 0;
  for (const Token& t : e.tokens) {
    if (t.is_feature()) {
      ++depth;
    } else {
      const int a = op_arity(t.op);
      if (depth < a) return false;
      depth -= a - 1;
    }
  }
  return depth == 1;
}

namespace detail {

inline std::optional<int> parse_feature_token(std::string_view s) {
  if (s.size() < 2 || s[0] != 'f') return std::nullopt;
  long value = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    value = value * 10 + (s[i] - '0');
    if (value > 1'000'000) return std::nullopt;
  }
  return static_cast<int>(value);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Tokens are resolved against the vocabulary first (across the whole text),
// then each expression is checked for stack balance; the first failure wins.
// This ordering is what lets the verifier distinguish out-of-vocabulary
// errors from malformed postfix.
inline ParseResult parse_postfix(std::string_view text, const Vocab& vocab) {
  ParseResult res;
  const auto chunks = detail::split(text, ',');

  std::vector<Expression> exprs;
  bool any_token = false;
  bool malformed_empty_chunk = false;

  for (const auto raw_chunk : chunks) {
    const auto chunk = detail::trim(raw_chunk);
    Expression e;
    std::size_t pos = 0;
    while (pos < chunk.size()) {
      while (pos < chunk.size() && std::isspace(static_cast<unsigned char>(chunk[pos]))) ++pos;
      if (pos >= chunk.size()) break;
      std::size_t end = pos;
      while (end < chunk.size() && !std::isspace(static_cast<unsigned char>(chunk[end]))) ++end;
      const std::string_view word = chunk.substr(pos, end - pos);
      pos = end;

      any_token = true;
      if (const auto idx = detail::parse_feature_token(word)) {
        if (*idx >= vocab.n_features) {
          res.status = ParseStatus::UnknownToken;
          res.detail = std::string(word);
          return res;
        }
        e.tokens.push_back(Token::feature(*idx));
      } else if (const auto op = vocab.ops.resolve(word)) {
        e.tokens.push_back(Token::operation(*op));
      } else {
        res.status = ParseStatus::UnknownToken;
        res.detail = std::string(word);
        return res;
      }
    }
    if (e.tokens.empty())
      malformed_empty_chunk = true;
    else
      exprs.push_back(std::move(e));
  }

  if (!any_token) {
    res.status = ParseStatus::Empty;
    res.detail = "no tokens";
    return res;
  }
  if (malformed_empty_chunk) {
    res.status = ParseStatus::MalformedPostfix;
    res.detail = "empty expression";
    return res;
  }
  for (const auto& e : exprs) {
    if (!stack_balanced(e)) {
      res.status = ParseStatus::MalformedPostfix;
      res.detail = e.text();
      return res;
    }
  }
  res.individual.expressions = std::move(exprs);
  return res;
}

// Authored-order serialization; inverse of parse_postfix.
inline std::string serialize(const Individual& ind) {
  std::string out;
  for (std::size_t i = 0; i < ind.expressions.size(); ++i) {
    if (i) out += ", ";
    out += ind.expressions[i].text();
  }
  return out;
}

// Order-insensitive form used by the novelty registry: expressions sorted
// lexicographically by their token strings, duplicates preserved.
inline std::string canonical_string(const Individual& ind) {
  std::vector<std::string> parts;
  parts.reserve(ind.expressions.size());
  for (const auto& e : ind.expressions) parts.push_back(e.text());
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

// Fully parenthesized infix rendering. Requires stack balance.
inline std::string render_infix(const Expression& expr) {
  std::vector<std::string> stack;
  for (const Token& t : expr.tokens) {
    if (t.is_feature()) {
      stack.push_back(t.text());
    } else if (op_arity(t.op) == 1) {
      std::string a = std::move(stack.back());
      stack.pop_back();
      stack.push_back(std::string(op_info(t.op).name) + "(" + a + ")");
    } else {
      std::string b = std::move(stack.back());
      stack.pop_back();
      std::string a = std::move(stack.back());
      stack.pop_back();
      stack.push_back("(" + a + op_info(t.op).token + b + ")");
    }
  }
  return stack.back();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline bool column_degenerate(const std::vector<double>& col) {
  double mean = 0.0;
  for (double v : col) {
    if (!std::isfinite(v)) return true;
    mean += v;
  }
  mean /= static_cast<double>(col.size());
  double var = 0.0;
  for (double v : col) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(col.size());
  return std::sqrt(var) < kDegenerateStd;
}

// Stack evaluation over whole columns. Returns nullopt when the result is
// degenerate (constant or non-finite after the safe rules).
inline std::optional<std::vector<double>> evaluate_expression(const Expression& expr, const Matrix& X) {
  const std::size_t m = X.n_rows();
  std::vector<std::vector<double>> stack;
  for (const Token& t : expr.tokens) {
    if (t.is_feature()) {
      stack.push_back(X.col(static_cast<std::size_t>(t.index)));
    } else if (op_arity(t.op) == 1) {
      auto& a = stack.back();
      for (std::size_t i = 0; i < m; ++i) a[i] = apply_unary(t.op, a[i]);
    } else {
      auto b = std::move(stack.back());
      stack.pop_back();
      auto& a = stack.back();
      for (std::size_t i = 0; i < m; ++i) a[i] = apply_binary(t.op, a[i], b[i]);
    }
  }
  auto out = std::move(stack.back());
  if (column_degenerate(out)) return std::nullopt;
  return out;
}

// Evaluates every expression of an individual against X, dropping degenerate
// columns. Column order follows the authored expression order. Returns
// nullopt when every column is degenerate.
inline std::optional<Matrix> materialize(const Individual& ind, const Matrix& X) {
  std::vector<std::vector<double>> cols;
  for (const auto& e : ind.expressions) {
    if (auto col = evaluate_expression(e, X)) cols.push_back(std::move(*col));
  }
  if (cols.empty()) return std::nullopt;
  return Matrix::from_columns(std::move(cols));
}

// True when every token resolves in the vocabulary and every expression is
// stack balanced.
inline bool valid_against(const Individual& ind, const Vocab& vocab) {
  if (ind.expressions.empty()) return false;
  for (const auto& e : ind.expressions) {
    for (const Token& t : e.tokens) {
      if (t.is_feature()) {
        if (t.index < 0 || t.index >= vocab.n_features) return false;
      } else if (!vocab.ops.contains(t.op)) {
        return false;
      }
    }
    if (!stack_balanced(e)) return false;
  }
  return true;
}

}  // namespace featforge
