#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "featforge/expr.hpp"
#include "featforge/population_db.hpp"

namespace featforge {

// The three acceptance gates for generated text, checked in a fixed order so
// failure statistics stay comparable across runs: vocabulary membership,
// postfix well-formedness, novelty against the database.
enum class VerdictOutcome : std::uint8_t { Valid, TokenOutOfVocabulary, MalformedPostfix, Duplicate };

inline const char* outcome_name(VerdictOutcome v) {
  switch (v) {
    case VerdictOutcome::Valid: return "valid";
    case VerdictOutcome::TokenOutOfVocabulary: return "token_out_of_vocabulary";
    case VerdictOutcome::MalformedPostfix: return "malformed_postfix";
    case VerdictOutcome::Duplicate: return "duplicate";
  }
  return "malformed_postfix";
}

struct Verdict {
  VerdictOutcome outcome = VerdictOutcome::MalformedPostfix;
  std::optional<Individual> individual;  // present iff Valid, unscored
  std::string detail;
};

// Read-only with respect to the database. Valid individuals longer than
// max_features are truncated, and novelty is judged on the truncated form.
inline Verdict verify(const std::string& text, const Database& db, const Vocab& vocab, int max_features) {
  Verdict v;
  auto parsed = parse_postfix(text, vocab);
  switch (parsed.status) {
    case ParseStatus::UnknownToken:
      v.outcome = VerdictOutcome::TokenOutOfVocabulary;
      v.detail = parsed.detail;
      return v;
    case ParseStatus::Empty:
    case ParseStatus::MalformedPostfix:
      v.outcome = VerdictOutcome::MalformedPostfix;
      v.detail = parsed.detail;
      return v;
    case ParseStatus::Ok:
      break;
  }

  Individual ind = std::move(parsed.individual);
  if (max_features > 0 && ind.expressions.size() > static_cast<std::size_t>(max_features)) {
    ind.expressions.resize(static_cast<std::size_t>(max_features));
    v.detail = "truncated to " + std::to_string(max_features) + " expressions";
  }

  if (db.contains(canonical_string(ind))) {
    v.outcome = VerdictOutcome::Duplicate;
    v.individual.reset();
    return v;
  }

  v.outcome = VerdictOutcome::Valid;
  v.individual = std::move(ind);
  return v;
}

}  // namespace featforge
