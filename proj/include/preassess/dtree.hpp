#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "preassess/infotheory.hpp"

namespace preassess {

struct TreeBranch;

/// A leaf when `attribute` is empty; otherwise an internal split.
/// Every node keeps the label counts of the training records reaching it.
struct TreeNode {
  std::string attribute;
  std::vector<TreeBranch> branches;  // lexicographic by feature
  std::string default_branch;
  Outcome label = Outcome::Fail;
  LabelCounts counts;

  bool is_leaf() const { return attribute.empty(); }
  const TreeNode* branch(std::string_view feature) const;
};

struct TreeBranch {
  std::string feature;
  TreeNode child;
};

bool operator==(const TreeNode& a, const TreeNode& b);
bool operator==(const TreeBranch& a, const TreeBranch& b);

struct DecisionTree {
  TreeNode root;

  bool operator==(const DecisionTree&) const = default;
};

enum class SplitCriterion { InfoGain, GainRatio };

std::string_view to_string(SplitCriterion c);
/// "info_gain" or "gain_ratio"; throws BadRequest otherwise.
SplitCriterion parse_criterion(std::string_view text);

struct TrainConfig {
  SplitCriterion criterion = SplitCriterion::GainRatio;
  int min_leaf = 2;
  int min_admissible_branches = 2;
};

/// C4.5-style induction. A split on an attribute is admissible when at
/// least `min_admissible_branches` of its children hold >= `min_leaf`
/// records; the admissible attribute with the largest criterion wins, ties
/// going to the earlier attribute. Throws EmptyDataset, ValidationError on
/// a bad config.
DecisionTree build_tree(const EpisodeDataset& d, const TrainConfig& cfg = {});

/// Walks the tree; unseen features follow the node's default branch.
/// Throws MissingAttribute.
Outcome classify(const DecisionTree& t, const std::map<std::string, std::string, std::less<>>& features);
Outcome classify(const DecisionTree& t, const std::vector<std::string>& attributes, const Episode& record);

struct ConfusionMatrix {
  std::int64_t true_pass_pred_pass = 0;
  std::int64_t true_pass_pred_fail = 0;
  std::int64_t true_fail_pred_pass = 0;
  std::int64_t true_fail_pred_fail = 0;

  std::int64_t total() const {
    return true_pass_pred_pass + true_pass_pred_fail + true_fail_pred_pass + true_fail_pred_fail;
  }
  std::int64_t correct() const { return true_pass_pred_pass + true_fail_pred_fail; }
  std::int64_t incorrect() const { return total() - correct(); }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix evaluate(const DecisionTree& t, const EpisodeDataset& d);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Fisher-Yates shuffle driven by std::mt19937_64(seed), index j drawn as
/// rng() % (i + 1) for i = n-1 .. 1; the first ceil(fraction * n) shuffled
/// records train, the rest test. Throws EmptyDataset, DegenerateSplit.
std::pair<EpisodeDataset, EpisodeDataset> split_dataset(const EpisodeDataset& d, const SplitSpec& s);

std::string tree_to_json(const DecisionTree& t);
/// Throws ParseError.
DecisionTree tree_from_json(std::string_view document);

/// Weka-style indented rendering, e.g. "Update = UpdateSelect: Fail (4/1)".
std::string render_tree(const DecisionTree& t);

}  // namespace preassess
