#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "preassess/graph.hpp"
#include "preassess/rational.hpp"

namespace preassess {

enum class Outcome { Pass, Fail };

std::string_view to_string(Outcome o);
/// Accepts "Pass"/"Fail" and the single letters "P"/"F". Throws UnknownLabel.
Outcome parse_outcome(std::string_view text);

/// "FPPP" -> {Fail, Pass, Pass, Pass}. Throws ParseError on any other
/// character or on an empty string.
std::vector<Outcome> parse_pf_string(std::string_view text);
std::string to_pf_string(std::span<const Outcome> outcomes);

struct PerformanceEntry {
  NodeId leaf;
  Outcome outcome;

  bool operator==(const PerformanceEntry&) const = default;
};

/// Ordered Pass/Fail outcomes over distinct assessed leaves.
class PerformanceVector {
 public:
  /// Throws EmptyPerformance, or ValidationError on a repeated leaf.
  explicit PerformanceVector(std::vector<PerformanceEntry> entries);

  /// Zips leaves with outcomes index by index. Throws ValidationError on a
  /// length mismatch.
  static PerformanceVector zip(const std::vector<NodeId>& leaves, std::span<const Outcome> outcomes);

  const std::vector<PerformanceEntry>& entries() const { return entries_; }
  std::vector<Outcome> outcomes() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t passes() const;
  std::size_t fails() const { return size() - passes(); }

 private:
  std::vector<PerformanceEntry> entries_;
};

Rational complement(const Rational& p);

/// Fraction of failed outcomes, (n - passes) / n: the gap between the
/// maximum expected probability 1 and the pass proportion.
/// Throws EmptyPerformance.
Rational fail_weight(std::span<const Outcome> outcomes);
Rational fail_weight(const PerformanceVector& perf);
Rational pass_weight(std::span<const Outcome> outcomes);

struct Progress {
  /// std::nullopt when the assessed parent is terminal in the progression.
  std::optional<NodeId> target;
  bool curriculum_complete = false;

  bool operator==(const Progress&) const = default;
};

struct ParentWeight {
  NodeId parent;
  Rational weight;

  bool operator==(const ParentWeight&) const = default;
};

struct Relearn {
  std::vector<NodeId> leaves;
  Rational weight;
  std::vector<ParentWeight> per_parent;

  bool operator==(const Relearn&) const = default;
};

using Recommendation = std::variant<Progress, Relearn>;

/// Progress to the next higher parent when nothing failed, otherwise relearn
/// the failed leaves weighted by fail_weight. Throws LeafNotUnderParent.
Recommendation recommend(const KnowledgeGraph& g, std::string_view parent, const PerformanceVector& perf);

struct JointWeight {
  NodeId target;
  Rational weight;

  bool operator==(const JointWeight&) const = default;
};

struct PosteriorEntry {
  NodeId target;
  Rational posterior;

  bool operator==(const PosteriorEntry&) const = default;
};

using PosteriorTable = std::vector<PosteriorEntry>;

/// Normalizes joint fail weights into posteriors: weight_j / sum(weights).
/// Throws AllZeroWeights, or ValidationError on a negative weight.
PosteriorTable bayes_fail_posterior(std::span<const JointWeight> joints);

struct GroupEntry {
  NodeId parent;
  PerformanceVector performance;
};

using GroupPerformance = std::vector<GroupEntry>;

/// Joint weights under a uniform prior over groups:
/// (1 / #groups) * (group fails / outcomes across all groups).
std::vector<JointWeight> uniform_scheme_joints(const GroupPerformance& groups);

struct CountRow {
  NodeId parent;
  NodeId leaf;
  std::int64_t pass_count = 0;
  std::int64_t fail_count = 0;

  std::int64_t total() const { return pass_count + fail_count; }
  bool operator==(const CountRow&) const = default;
};

/// Aggregate per-leaf pass/fail counts grouped by parent; totals are derived.
struct AggregateCounts {
  std::vector<CountRow> rows;

  std::int64_t total_pass() const;
  std::int64_t total_fail() const;
  std::int64_t grand_total() const { return total_pass() + total_fail(); }
  /// Distinct parents in order of first appearance.
  std::vector<NodeId> parents() const;

  bool operator==(const AggregateCounts&) const = default;
};

enum class BayesScheme {
  /// Target likelihood = leaf fails / group fails; group likelihoods in the
  /// denominator = group fails / total fails.
  Paper,
  /// leaf fails / total fails in the numerator, group fails / total fails
  /// in the denominator.
  Consistent,
};

std::string_view to_string(BayesScheme s);
/// "paper" or "consistent"; throws BadRequest otherwise.
BayesScheme parse_scheme(std::string_view text);

/// Posterior that a failed pre-assessment lands on `target_leaf`, with
/// group priors (group total / grand total).
/// Throws UnknownLeaf, InsufficientGroups (<2 parents), ZeroDenominator.
Rational aggregate_scheme_posterior(const AggregateCounts& counts, std::string_view target_leaf,
                                    BayesScheme scheme = BayesScheme::Paper);

struct WeightPair {
  Rational pass_weight;
  Rational fail_weight;
};

struct WeightTableRow {
  int n = 0;
  std::vector<WeightPair> pairs;  // size n + 1, pair j = ((n-j)/n, j/n)
};

WeightTableRow weight_table_row(int n);
/// Rows 1..n_max. Throws ValidationError unless 1 <= n_max <= 10000.
std::vector<WeightTableRow> weight_table(int n_max);

}  // namespace preassess
