#include "preassess/probability.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "preassess/error.hpp"

namespace preassess {

std::string_view to_string(Outcome o) { return o == Outcome::Pass ? "Pass" : "Fail"; }

Outcome parse_outcome(std::string_view text) {
  if (text == "Pass" || text == "P") return Outcome::Pass;
  if (text == "Fail" || text == "F") return Outcome::Fail;
  throw Error(ErrorCode::UnknownLabel, "outcome must be Pass or Fail, got '" + std::string(text) + "'");
}

std::vector<Outcome> parse_pf_string(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::ParseError, "performance string is empty");
  std::vector<Outcome> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case 'P': out.push_back(Outcome::Pass); break;
      case 'F': out.push_back(Outcome::Fail); break;
      default:
        throw Error(ErrorCode::ParseError, "performance string may only contain P and F (position " +
                                               std::to_string(i) + ")");
    }
  }
  return out;
}

std::string to_pf_string(std::span<const Outcome> outcomes) {
  std::string s;
  for (auto o : outcomes) s.push_back(o == Outcome::Pass ? 'P' : 'F');
  return s;
}

PerformanceVector::PerformanceVector(std::vector<PerformanceEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::EmptyPerformance, "performance vector is empty");
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.leaf).second) {
      throw Error(ErrorCode::ValidationError, "leaf '" + e.leaf + "' appears twice in performance vector");
    }
  }
}

PerformanceVector PerformanceVector::zip(const std::vector<NodeId>& leaves, std::span<const Outcome> outcomes) {
  if (leaves.size() != outcomes.size()) {
    throw Error(ErrorCode::ValidationError, "performance has " + std::to_string(outcomes.size()) +
                                                " outcomes but " + std::to_string(leaves.size()) +
                                                " leaves are assessed");
  }
  std::vector<PerformanceEntry> entries;
  for (std::size_t i = 0; i < leaves.size(); ++i) entries.push_back({leaves[i], outcomes[i]});
  return PerformanceVector(std::move(entries));
}

std::vector<Outcome> PerformanceVector::outcomes() const {
  std::vector<Outcome> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.outcome);
  return out;
}

std::size_t PerformanceVector::passes() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.outcome == Outcome::Pass; }));
}

Rational complement(const Rational& p) { return Rational(1) - p; }

Rational pass_weight(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::EmptyPerformance, "performance vector is empty");
  const auto passes = std::count(outcomes.begin(), outcomes.end(), Outcome::Pass);
  return Rational(static_cast<std::int64_t>(passes), static_cast<std::int64_t>(outcomes.size()));
}

Rational fail_weight(std::span<const Outcome> outcomes) {
  // argMax of the pass probability over any vector is 1
  return Rational(1) - pass_weight(outcomes);
}

Rational fail_weight(const PerformanceVector& perf) {
  const auto outcomes = perf.outcomes();
  return fail_weight(std::span<const Outcome>(outcomes));
}

Recommendation recommend(const KnowledgeGraph& g, std::string_view parent, const PerformanceVector& perf) {
  const auto leaves = g.leaves_under(parent);
  for (const auto& e : perf.entries()) {
    if (std::find(leaves.begin(), leaves.end(), e.leaf) == leaves.end()) {
      throw Error(ErrorCode::LeafNotUnderParent,
                  "leaf '" + e.leaf + "' is not under parent '" + std::string(parent) + "'");
    }
  }
  const Rational weight = fail_weight(perf);
  if (weight == 0) {
    auto next = g.next_higher(parent);
    return Progress{next, !next.has_value()};
  }
  Relearn r;
  for (const auto& e : perf.entries()) {
    if (e.outcome == Outcome::Fail) r.leaves.push_back(e.leaf);
  }
  r.weight = weight;
  r.per_parent.push_back({NodeId(parent), weight});
  return r;
}

PosteriorTable bayes_fail_posterior(std::span<const JointWeight> joints) {
  Rational sum(0);
  for (const auto& j : joints) {
    if (j.weight < 0) throw Error(ErrorCode::ValidationError, "joint weight of '" + j.target + "' is negative");
    sum += j.weight;
  }
  if (sum == 0) throw Error(ErrorCode::AllZeroWeights, "every joint weight is zero");
  PosteriorTable table;
  table.reserve(joints.size());
  for (const auto& j : joints) table.push_back({j.target, j.weight / sum});
  return table;
}

std::vector<JointWeight> uniform_scheme_joints(const GroupPerformance& groups) {
  std::vector<JointWeight> joints;
  if (groups.empty()) return joints;
  std::int64_t outcomes = 0;
  for (const auto& g : groups) outcomes += static_cast<std::int64_t>(g.performance.size());
  const Rational prior(1, static_cast<std::int64_t>(groups.size()));
  for (const auto& g : groups) {
    joints.push_back({g.parent, prior * Rational(static_cast<std::int64_t>(g.performance.fails()), outcomes)});
  }
  return joints;
}

std::int64_t AggregateCounts::total_pass() const {
  std::int64_t s = 0;
  for (const auto& r : rows) s += r.pass_count;
  return s;
}

std::int64_t AggregateCounts::total_fail() const {
  std::int64_t s = 0;
  for (const auto& r : rows) s += r.fail_count;
  return s;
}

std::vector<NodeId> AggregateCounts::parents() const {
  std::vector<NodeId> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.parent) == out.end()) out.push_back(r.parent);
  }
  return out;
}

std::string_view to_string(BayesScheme s) { return s == BayesScheme::Paper ? "paper" : "consistent"; }

BayesScheme parse_scheme(std::string_view text) {
  if (text == "paper") return BayesScheme::Paper;
  if (text == "consistent") return BayesScheme::Consistent;
  throw Error(ErrorCode::BadRequest, "scheme must be 'paper' or 'consistent', got '" + std::string(text) + "'");
}

Rational aggregate_scheme_posterior(const AggregateCounts& counts, std::string_view target_leaf,
                                    BayesScheme scheme) {
  const CountRow* target = nullptr;
  for (const auto& r : counts.rows) {
    if (r.leaf == target_leaf) {
      if (target) {
        throw Error(ErrorCode::ValidationError,
                    "leaf '" + std::string(target_leaf) + "' appears under more than one parent");
      }
      target = &r;
    }
  }
  if (!target) throw Error(ErrorCode::UnknownLeaf, "leaf '" + std::string(target_leaf) + "' not in counts");

  const auto parents = counts.parents();
  if (parents.size() < 2) {
    throw Error(ErrorCode::InsufficientGroups, "aggregate posterior needs at least two parent groups");
  }

  struct Group {
    std::int64_t total = 0;
    std::int64_t fails = 0;
  };
  std::map<NodeId, Group> groups;
  for (const auto& r : counts.rows) {
    groups[r.parent].total += r.total();
    groups[r.parent].fails += r.fail_count;
  }
  const std::int64_t grand = counts.grand_total();
  const std::int64_t all_fails = counts.total_fail();
  if (all_fails == 0) throw Error(ErrorCode::ZeroDenominator, "no fails recorded in any group");
  if (target->fail_count == 0) return Rational(0);

  Rational denominator(0);
  for (const auto& p : parents) {
    const auto& g = groups[p];
    denominator += Rational(g.total, grand) * Rational(g.fails, all_fails);
  }
  const auto& tg = groups[target->parent];
  const Rational prior(tg.total, grand);
  const Rational likelihood = scheme == BayesScheme::Paper ? Rational(target->fail_count, tg.fails)
                                                           : Rational(target->fail_count, all_fails);
  return prior * likelihood / denominator;
}

WeightTableRow weight_table_row(int n) {
  if (n < 1) throw Error(ErrorCode::ValidationError, "weight table row size must be positive");
  WeightTableRow row;
  row.n = n;
  row.pairs.reserve(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) row.pairs.push_back({Rational(n - j, n), Rational(j, n)});
  return row;
}

std::vector<WeightTableRow> weight_table(int n_max) {
  if (n_max < 1 || n_max > 10000) {
    throw Error(ErrorCode::ValidationError, "weight table size must be within 1..10000");
  }
  std::vector<WeightTableRow> rows;
  rows.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) rows.push_back(weight_table_row(n));
  return rows;
}

}  // namespace preassess
