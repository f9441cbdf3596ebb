#include <catch2/catch_amalgamated.hpp>

#include "featforge/verifier.hpp"
#include "support/test_helpers.hpp"

using namespace featforge;

namespace {
const Vocab kVocab{3, OperatorSet::all()};
}

TEST_CASE("verify passes a fresh well-formed sequence") {
  Database db(2, 5);
  const Verdict v = verify("f0, f1 f2 +", db, kVocab, 10);
  CHECK(v.outcome == VerdictOutcome::Valid);
  REQUIRE(v.individual.has_value());
  CHECK(v.individual->expressions.size() == 2);
  CHECK_FALSE(v.individual->score.has_value());
}

TEST_CASE("verify flags out-of-vocabulary tokens first") {
  Database db(2, 5);
  CHECK(verify("f9 f1 +", db, kVocab, 10).outcome == VerdictOutcome::TokenOutOfVocabulary);
  CHECK(verify("f0 banana", db, kVocab, 10).outcome == VerdictOutcome::TokenOutOfVocabulary);
  // vocabulary precedes the balance check when both fail
  CHECK(verify("f9 +", db, kVocab, 10).outcome == VerdictOutcome::TokenOutOfVocabulary);
}

TEST_CASE("verify flags malformed postfix, including empty text") {
  Database db(2, 5);
  CHECK(verify("f1 +", db, kVocab, 10).outcome == VerdictOutcome::MalformedPostfix);
  CHECK(verify("f0 f1", db, kVocab, 10).outcome == VerdictOutcome::MalformedPostfix);
  CHECK(verify("", db, kVocab, 10).outcome == VerdictOutcome::MalformedPostfix);
}

TEST_CASE("verify flags canonical duplicates against the database") {
  Database db(2, 5);
  auto parsed = parse_postfix("f0, f1 f2 +", kVocab);
  REQUIRE(parsed.ok());
  parsed.individual.score = 0.5;
  db.insert(0, parsed.individual);

  // same multiset of expressions, different order
  const Verdict v = verify("f1 f2 +, f0", db, kVocab, 10);
  CHECK(v.outcome == VerdictOutcome::Duplicate);
  CHECK_FALSE(v.individual.has_value());
}

TEST_CASE("verify leaves the database untouched") {
  Database db(2, 5);
  verify("f0", db, kVocab, 10);
  verify("f0", db, kVocab, 10);
  CHECK(db.total_members() == 0);
  CHECK_FALSE(db.contains("f0"));
  // and the same text stays Valid on repeat queries
  CHECK(verify("f0", db, kVocab, 10).outcome == VerdictOutcome::Valid);
}

TEST_CASE("oversized individuals are truncated, and novelty sees the truncation") {
  Database db(2, 5);
  const Verdict v = verify("f0, f1, f2, f0 f1 +", db, kVocab, 2);
  CHECK(v.outcome == VerdictOutcome::Valid);
  REQUIRE(v.individual.has_value());
  REQUIRE(v.individual->expressions.size() == 2);
  CHECK(serialize(*v.individual) == "f0, f1");

  Individual stored = *v.individual;
  stored.score = 0.1;
  db.insert(0, stored);
  // a longer text that truncates to the same head is now a duplicate
  CHECK(verify("f0, f1, f0 f2 *", db, kVocab, 2).outcome == VerdictOutcome::Duplicate);
}

TEST_CASE("valid verdicts re-verify against an empty database") {
  Rng rng(21);
  const auto ops = OperatorSet::all();
  Database db(2, 5);
  Database empty(2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const Individual ind = gen::random_individual(rng, 3, ops, 4, 3);
    const Verdict v = verify(serialize(ind), db, kVocab, 100);
    REQUIRE(v.outcome == VerdictOutcome::Valid);
    const Verdict again = verify(serialize(*v.individual), empty, kVocab, 100);
    CHECK(again.outcome == VerdictOutcome::Valid);
  }
}
