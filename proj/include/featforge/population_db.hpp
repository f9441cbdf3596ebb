#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "featforge/expr.hpp"
#include "featforge/rng.hpp"

namespace featforge {

struct DbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Strategy : std::uint8_t { BalancedRandomRanked, TopMRanked, RandomUnordered };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::BalancedRandomRanked: return "balanced_random_ranked";
    case Strategy::TopMRanked: return "top_m_ranked";
    case Strategy::RandomUnordered: return "random_unordered";
  }
  return "balanced_random_ranked";
}

inline std::optional<Strategy> strategy_from_name(const std::string& s) {
  if (s == "balanced_random_ranked" || s == "balanced") return Strategy::BalancedRandomRanked;
  if (s == "top_m_ranked" || s == "top") return Strategy::TopMRanked;
  if (s == "random_unordered" || s == "random") return Strategy::RandomUnordered;
  return std::nullopt;
}

struct DbMember {
  Individual ind;
  std::uint64_t seq = 0;  // global insertion stamp, breaks score ties
};

struct Population {
  int id = 0;
  int lineage = 0;
  std::vector<DbMember> members;  // kept in insertion order
};

// Keeps the P highest-scored members; ties keep the earlier insertion.
// Member order within the population stays insertion-ordered.
inline void prune_population(Population& pop, int threshold) {
  if (threshold < 1) throw DbError("prune_population: threshold must be >= 1");
  if (pop.members.size() <= static_cast<std::size_t>(threshold)) return;
  std::vector<std::size_t> order(pop.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = pop.members[a].ind.score.value_or(0.0);
    const double sb = pop.members[b].ind.score.value_or(0.0);
    if (sa != sb) return sa > sb;
    return pop.members[a].seq < pop.members[b].seq;
  });
  order.resize(static_cast<std::size_t>(threshold));
  std::sort(order.begin(), order.end());
  std::vector<DbMember> kept;
  kept.reserve(order.size());
  for (std::size_t i : order) kept.push_back(std::move(pop.members[i]));
  pop.members = std::move(kept);
}

inline double population_score(const Population& pop) {
  if (pop.members.empty()) throw DbError("population_score: empty population");
  double best = pop.members.front().ind.score.value_or(0.0);
  for (const auto& m : pop.members) best = std::max(best, m.ind.score.value_or(0.0));
  return best;
}

// K populations of scored individuals plus the global novelty registry of
// every canonical string ever admitted.
class Database {
 public:
  Database(int k, int p) : k_(k), p_(p) {
    if (k < 1 || p < 1) throw DbError("Database: K and P must be >= 1");
    pops_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pops_[static_cast<std::size_t>(i)].id = i;
    next_id_ = k;
  }

  int k() const { return k_; }
  int p() const { return p_; }
  const Population& population(int idx) const { return pops_.at(checked(idx)); }
  const std::vector<Population>& populations() const { return pops_; }

  bool contains(const std::string& canonical) const { return seen_.count(canonical) > 0; }

  // Novelty-gated insert: canonical strings already seen are rejected
  // without mutation, admitted members are registered forever (even if the
  // prune that follows immediately drops them).
  bool insert(int pop_idx, Individual ind) {
    auto& pop = pops_.at(checked(pop_idx));
    if (!ind.score) throw DbError("insert: individual must be scored");
    std::string canonical = canonical_string(ind);
    if (seen_.count(canonical)) return false;
    seen_.insert(std::move(canonical));
    pop.members.push_back(DbMember{std::move(ind), next_seq_++});
    prune_population(pop, p_);
    return true;
  }

  // Registry-aware direct placement used only to seed a population that
  // collection left empty; never used on the generation path.
  void place_seed(int pop_idx, Individual ind) {
    auto& pop = pops_.at(checked(pop_idx));
    if (!ind.score) throw DbError("place_seed: individual must be scored");
    seen_.insert(canonical_string(ind));
    pop.members.push_back(DbMember{std::move(ind), next_seq_++});
    prune_population(pop, p_);
  }

  // Replaces the bottom half of populations (by best member score) with
  // deep copies of the top half, worst paired with best. Copies get fresh
  // ids and an incremented lineage; the registry is untouched.
  void cull_populations() {
    if (k_ % 2 != 0) throw DbError("cull_populations: K must be even");
    for (const auto& pop : pops_)
      if (pop.members.empty()) throw DbError("cull_populations: empty population");

    std::vector<std::size_t> order(pops_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return population_score(pops_[a]) > population_score(pops_[b]);
    });

    const std::size_t half = pops_.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const std::size_t src = order[i];
      const std::size_t dst = order[pops_.size() - 1 - i];
      Population copy = pops_[src];
      copy.id = next_id_++;
      copy.lineage = pops_[src].lineage + 1;
      for (auto& m : copy.members) m.seq = next_seq_++;
      pops_[dst] = std::move(copy);
    }
  }

  // Demonstration sampling. BalancedRandomRanked: random subset, ranked
  // ascending by score. TopMRanked: the best M, ranked ascending.
  // RandomUnordered: random subset in draw order.
  std::vector<std::pair<Individual, double>> sample_for_prompt(int pop_idx, int m, Strategy strategy,
                                                               Rng& rng) const {
    const auto& pop = pops_.at(checked(pop_idx));
    if (pop.members.empty()) throw DbError("sample_for_prompt: empty population");
    if (m < 1) throw DbError("sample_for_prompt: M must be >= 1");
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(m), pop.members.size());

    std::vector<std::size_t> picked;
    if (strategy == Strategy::TopMRanked) {
      picked.resize(pop.members.size());
      std::iota(picked.begin(), picked.end(), 0);
      std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
        const double sa = pop.members[a].ind.score.value_or(0.0);
        const double sb = pop.members[b].ind.score.value_or(0.0);
        if (sa != sb) return sa > sb;
        return pop.members[a].seq < pop.members[b].seq;
      });
      picked.resize(take);
      std::reverse(picked.begin(), picked.end());  // ascending score
    } else {
      // uniform sample without replacement (partial Fisher-Yates)
      std::vector<std::size_t> all(pop.members.size());
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(all.size() - i);
        std::swap(all[i], all[j]);
      }
      all.resize(take);
      picked = std::move(all);
      if (strategy == Strategy::BalancedRandomRanked) {
        std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
          const double sa = pop.members[a].ind.score.value_or(0.0);
          const double sb = pop.members[b].ind.score.value_or(0.0);
          if (sa != sb) return sa < sb;
          return pop.members[a].seq < pop.members[b].seq;
        });
      }
    }

    std::vector<std::pair<Individual, double>> out;
    out.reserve(picked.size());
    for (std::size_t i : picked)
      out.emplace_back(pop.members[i].ind, pop.members[i].ind.score.value_or(0.0));
    return out;
  }

  double best_score() const {
    double best = std::numeric_limits<double>::lowest();
    for (const auto& pop : pops_)
      for (const auto& m : pop.members) best = std::max(best, m.ind.score.value_or(best));
    return best;
  }

  const Individual* best_individual() const {
    const Individual* best = nullptr;
    std::uint64_t best_seq = 0;
    for (const auto& pop : pops_) {
      for (const auto& m : pop.members) {
        if (!best || m.ind.score.value_or(0.0) > best->score.value_or(0.0) ||
            (m.ind.score.value_or(0.0) == best->score.value_or(0.0) && m.seq < best_seq)) {
          best = &m.ind;
          best_seq = m.seq;
        }
      }
    }
    return best;
  }

  std::size_t total_members() const {
    std::size_t n = 0;
    for (const auto& pop : pops_) n += pop.members.size();
    return n;
  }

  // Debug-mode structural check: K populations, none above P, member
  // canonicals unique within a population and all registered. Duplicates
  // across populations are legal (culling copies).
  void validate() const {
    if (pops_.size() != static_cast<std::size_t>(k_)) throw DbError("validate: population count drifted");
    for (const auto& pop : pops_) {
      if (pop.members.size() > static_cast<std::size_t>(p_)) throw DbError("validate: population above cap");
      std::unordered_set<std::string> local;
      for (const auto& m : pop.members) {
        std::string canonical = canonical_string(m.ind);
        if (!seen_.count(canonical)) throw DbError("validate: member missing from registry");
        if (!local.insert(std::move(canonical)).second)
          throw DbError("validate: duplicate member within a population");
      }
    }
  }

  // One JSON object per member, population index order then insertion order.
  void dump(std::ostream& out) const {
    for (std::size_t i = 0; i < pops_.size(); ++i) {
      for (const auto& m : pops_[i].members) {
        nlohmann::json line = {{"pop", static_cast<int>(i)},
                               {"seq", serialize(m.ind)},
                               {"score", m.ind.score.value_or(0.0)},
                               {"origin", origin_name(m.ind.origin)}};
        out << line.dump() << "\n";
      }
    }
  }

  void dump_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DbError("cannot write " + path);
    dump(out);
  }

  static Database restore(std::istream& in, int p, const Vocab& vocab) {
    std::vector<std::tuple<int, Individual>> rows;
    int max_pop = -1;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("pop") || !j.contains("seq") || !j.contains("score"))
        throw DbError("bad dump record at line " + std::to_string(lineno));
      auto parsed = parse_postfix(j["seq"].get<std::string>(), vocab);
      if (!parsed.ok()) throw DbError("unparseable sequence at line " + std::to_string(lineno));
      Individual ind = std::move(parsed.individual);
      ind.score = j["score"].get<double>();
      if (j.contains("origin"))
        if (const auto o = origin_from_name(j["origin"].get<std::string>())) ind.origin = *o;
      const int pop = j["pop"].get<int>();
      if (pop < 0) throw DbError("negative population index at line " + std::to_string(lineno));
      max_pop = std::max(max_pop, pop);
      rows.emplace_back(pop, std::move(ind));
    }
    if (rows.empty()) throw DbError("empty database dump");
    Database db(max_pop + 1, p);
    for (auto& [pop, ind] : rows) db.place_seed(pop, std::move(ind));
    return db;
  }

  static Database restore_file(const std::string& path, int p, const Vocab& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DbError("cannot open " + path);
    return restore(in, p, vocab);
  }

 private:
  std::size_t checked(int idx) const {
    if (idx < 0 || idx >= k_) throw DbError("unknown population " + std::to_string(idx));
    return static_cast<std::size_t>(idx);
  }

  int k_;
  int p_;
  int next_id_ = 0;
  std::uint64_t next_seq_ = 0;
  std::vector<Population> pops_;
  std::unordered_set<std::string> seen_;
};

}  // namespace featforge
