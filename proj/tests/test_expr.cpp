#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "featforge/expr.hpp"
#include "support/test_helpers.hpp"

using namespace featforge;

namespace {
const Vocab kVocab4{4, OperatorSet::all()};

bool close(double a, double b, double rel = 1e-12) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}
}  // namespace

TEST_CASE("parse_postfix accepts the documented example sequence") {
  const auto res = parse_postfix("f0, f1 f2 +, f0 f2 + f3 *", kVocab4);
  REQUIRE(res.ok());
  REQUIRE(res.individual.expressions.size() == 3);
  CHECK(res.individual.expressions[0].text() == "f0");
  CHECK(res.individual.expressions[1].text() == "f1 f2 +");
  CHECK(res.individual.expressions[2].text() == "f0 f2 + f3 *");
}

TEST_CASE("parse_postfix handles the single-token identity") {
  const auto res = parse_postfix("f0", Vocab{1, OperatorSet::all()});
  REQUIRE(res.ok());
  REQUIRE(res.individual.expressions.size() == 1);
  CHECK(res.individual.expressions[0].tokens.size() == 1);
}

TEST_CASE("parse_postfix rejects stack-balance violations") {
  const auto res = parse_postfix("f1 +", kVocab4);
  CHECK(res.status == ParseStatus::MalformedPostfix);
}

TEST_CASE("parse_postfix reports unknown tokens before balance errors") {
  CHECK(parse_postfix("f9 f1 +", Vocab{3, OperatorSet::all()}).status == ParseStatus::UnknownToken);
  CHECK(parse_postfix("f0 frobnicate", kVocab4).status == ParseStatus::UnknownToken);
  CHECK(parse_postfix("f9 +", Vocab{3, OperatorSet::all()}).status == ParseStatus::UnknownToken);
  CHECK(parse_postfix("", kVocab4).status == ParseStatus::Empty);
  CHECK(parse_postfix("  ,  ", kVocab4).status == ParseStatus::Empty);
}

TEST_CASE("parse_postfix accepts long operator names as aliases") {
  const auto res = parse_postfix("f0 f1 add, f2 sqrt", kVocab4);
  REQUIRE(res.ok());
  CHECK(serialize(res.individual) == "f0 f1 +, f2 sqrt");
}

TEST_CASE("operators outside the configured set are unknown tokens") {
  const auto ops = OperatorSet::from_names({"add", "mul"});
  REQUIRE(ops.has_value());
  CHECK(parse_postfix("f0 sqrt", Vocab{4, *ops}).status == ParseStatus::UnknownToken);
  CHECK(parse_postfix("f0 f1 +", Vocab{4, *ops}).ok());
}

TEST_CASE("render_infix reproduces the documented conversions") {
  const auto res = parse_postfix("f0, f1 f2 +, f0 f2 + f3 *", kVocab4);
  REQUIRE(res.ok());
  CHECK(render_infix(res.individual.expressions[0]) == "f0");
  CHECK(render_infix(res.individual.expressions[1]) == "(f1+f2)");
  CHECK(render_infix(res.individual.expressions[2]) == "((f0+f2)*f3)");
}

TEST_CASE("render_infix names unary operators") {
  const auto res = parse_postfix("f1 sqrt, f0 f1 + tanh", kVocab4);
  REQUIRE(res.ok());
  CHECK(render_infix(res.individual.expressions[0]) == "sqrt(f1)");
  CHECK(render_infix(res.individual.expressions[1]) == "tanh((f0+f1))");
}

TEST_CASE("evaluate_expression adds columns elementwise") {
  const Matrix X = Matrix::from_rows({{1, 2}, {3, 4}});
  const auto res = parse_postfix("f0 f1 +", Vocab{2, OperatorSet::all()});
  REQUIRE(res.ok());
  const auto col = evaluate_expression(res.individual.expressions[0], X);
  REQUIRE(col.has_value());
  CHECK((*col)[0] == 3.0);
  CHECK((*col)[1] == 7.0);
}

TEST_CASE("x minus x is a degenerate constant column") {
  const Matrix X = Matrix::from_rows({{1.5, 2}, {3, 4}, {-2, 0}});
  const auto res = parse_postfix("f0 f0 -", Vocab{2, OperatorSet::all()});
  REQUIRE(res.ok());
  CHECK_FALSE(evaluate_expression(res.individual.expressions[0], X).has_value());
}

TEST_CASE("protected division matches the scalar oracle on a zero denominator") {
  const Matrix X = Matrix::from_rows({{1, 0}, {4, 2}});
  const auto res = parse_postfix("f0 f1 /", Vocab{2, OperatorSet::all()});
  REQUIRE(res.ok());
  const auto col = evaluate_expression(res.individual.expressions[0], X);
  REQUIRE(col.has_value());
  CHECK((*col)[0] == 1e8);  // 1 / (sign(0) * 1e-8)
  CHECK((*col)[1] == 2.0);
  const auto expected = oracle::tree_eval_column(res.individual.expressions[0], X);
  CHECK(close((*col)[0], expected[0]));
  CHECK(close((*col)[1], expected[1]));
}

TEST_CASE("materialize keeps authored column order and drops degenerates") {
  const Matrix X = Matrix::from_rows({{1, 2}, {3, 4}});

  SECTION("identity set returns the input columns") {
    const auto res = parse_postfix("f0, f1", Vocab{2, OperatorSet::all()});
    const auto mat = materialize(res.individual, X);
    REQUIRE(mat.has_value());
    REQUIRE(mat->n_cols() == 2);
    CHECK(mat->col(0) == X.col(0));
    CHECK(mat->col(1) == X.col(1));
  }

  SECTION("single row example") {
    const Matrix one = Matrix::from_rows({{1, 2}, {0, 5}});
    const auto res = parse_postfix("f0, f0 f1 +", Vocab{2, OperatorSet::all()});
    const auto mat = materialize(res.individual, one);
    REQUIRE(mat.has_value());
    CHECK(mat->at(0, 0) == 1.0);
    CHECK(mat->at(0, 1) == 3.0);
    CHECK(mat->at(1, 1) == 5.0);
  }

  SECTION("all-degenerate set yields nothing") {
    const auto res = parse_postfix("f0 f0 -", Vocab{2, OperatorSet::all()});
    CHECK_FALSE(materialize(res.individual, X).has_value());
  }
}

TEST_CASE("canonical_string sorts expressions and keeps duplicates") {
  const auto a = parse_postfix("f1 f2 +, f0", kVocab4);
  REQUIRE(a.ok());
  CHECK(canonical_string(a.individual) == "f0, f1 f2 +");

  const auto b = parse_postfix("f0, f0", kVocab4);
  REQUIRE(b.ok());
  CHECK(canonical_string(b.individual) == "f0, f0");
}

TEST_CASE("serialization round-trips and canonicalization is idempotent") {
  Rng rng(20240601);
  const auto ops = OperatorSet::all();
  for (int i = 0; i < 1000; ++i) {
    const Individual ind = gen::random_individual(rng, 6, ops);
    const auto back = parse_postfix(serialize(ind), Vocab{6, ops});
    REQUIRE(back.ok());
    CHECK(back.individual.same_expressions(ind));

    const auto canon = parse_postfix(canonical_string(ind), Vocab{6, ops});
    REQUIRE(canon.ok());
    CHECK(canonical_string(canon.individual) == canonical_string(ind));
  }
}

TEST_CASE("stack evaluation agrees with the recursive scalar oracle") {
  Rng rng(99);
  const auto ops = OperatorSet::all();
  for (int trial = 0; trial < 1500; ++trial) {
    const Matrix X = gen::random_matrix(rng, 20, 8);
    const Expression expr = gen::random_expression(rng, 8, ops, 5);
    const auto expected = oracle::tree_eval_column(expr, X);

    // bypass the degeneracy gate: compare through a stack evaluation that
    // the public API performs before the gate
    std::optional<std::vector<double>> got = evaluate_expression(expr, X);
    if (!got) {
      // degenerate result: the oracle column must itself be (near) constant
      double lo = expected[0], hi = expected[0];
      for (double v : expected) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const bool tiny_range = hi - lo < 1e-6;
      bool nonfinite = false;
      for (double v : expected)
        if (!std::isfinite(v)) nonfinite = true;
      CHECK((tiny_range || nonfinite));
      continue;
    }
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(close((*got)[i], expected[i]));
  }
}

TEST_CASE("stack-balance matches the decomposition checker exhaustively") {
  // alphabet: f0, f1, one unary, one binary; all strings up to length 5
  const std::vector<Token> alphabet = {Token::feature(0), Token::feature(1), Token::operation(Op::Sqrt),
                                       Token::operation(Op::Add)};
  std::size_t checked = 0;
  for (std::size_t len = 1; len <= 5; ++len) {
    std::vector<std::size_t> digits(len, 0);
    while (true) {
      Expression e;
      for (std::size_t d : digits) e.tokens.push_back(alphabet[d]);
      CHECK(stack_balanced(e) == oracle::valid_by_decomposition(e.tokens));
      ++checked;

      std::size_t pos = 0;
      while (pos < len && ++digits[pos] == alphabet.size()) digits[pos++] = 0;
      if (pos == len) break;
    }
  }
  CHECK(checked == 4 + 16 + 64 + 256 + 1024);
}

TEST_CASE("safe rules never emit NaN or Inf on finite input") {
  Rng rng(7);
  const auto ops = OperatorSet::all();
  const Matrix X = Matrix::from_rows({{0.0, 1e300, -1e300, 1e-300},
                                      {-0.0, -1e300, 1e300, -1e-300},
                                      {1e12, -1e12, 0.5, -0.5},
                                      {3.0, -3.0, 1e8, -1e8}});
  for (int trial = 0; trial < 2000; ++trial) {
    const Expression expr = gen::random_expression(rng, 4, ops, 6);
    const auto tree = oracle::tree_from_postfix(expr);  // also exercises the oracle
    const auto col = evaluate_expression(expr, X);
    if (col)
      for (double v : *col) CHECK(std::isfinite(v));
    for (std::size_t i = 0; i < X.n_rows(); ++i) CHECK(std::isfinite(oracle::tree_eval(*tree, X.row(i))));
  }
}
