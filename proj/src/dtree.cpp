#include "preassess/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "preassess/error.hpp"

namespace preassess {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTieEpsilon = 1e-12;

Outcome majority(const LabelCounts& c) {
  return c.pass_count > c.fail_count ? Outcome::Pass : Outcome::Fail;
}

LabelCounts count_labels(const std::vector<const Episode*>& records) {
  LabelCounts c;
  for (const auto* r : records) (r->label == Outcome::Pass ? c.pass_count : c.fail_count)++;
  return c;
}

double entropy_of(const LabelCounts& c) { return c.total() == 0 ? 0.0 : entropy(c); }

struct Inducer {
  const EpisodeDataset& data;
  const TrainConfig& cfg;

  TreeNode grow(const std::vector<const Episode*>& records, std::vector<bool> used) const {
    TreeNode node;
    node.counts = count_labels(records);
    node.label = majority(node.counts);
    if (node.counts.pass_count == 0 || node.counts.fail_count == 0) return node;

    const double n = static_cast<double>(records.size());
    const double parent_entropy = entropy_of(node.counts);

    std::size_t best = data.attributes().size();
    double best_score = 0.0;
    std::map<std::string, std::vector<const Episode*>> best_parts;
    for (std::size_t a = 0; a < data.attributes().size(); ++a) {
      if (used[a]) continue;
      std::map<std::string, std::vector<const Episode*>> parts;
      for (const auto* r : records) parts[r->features[a]].push_back(r);
      const auto large = std::count_if(parts.begin(), parts.end(), [&](const auto& p) {
        return static_cast<int>(p.second.size()) >= cfg.min_leaf;
      });
      if (large < cfg.min_admissible_branches) continue;

      double children = 0.0;
      double split = 0.0;
      for (const auto& [_, part] : parts) {
        const double w = static_cast<double>(part.size()) / n;
        children += w * entropy_of(count_labels(part));
        split -= w * std::log2(w);
      }
      const double gain = parent_entropy - children;
      if (gain <= kTieEpsilon) continue;
      const double score = cfg.criterion == SplitCriterion::InfoGain ? gain : gain / split;
      if (best == data.attributes().size() || score > best_score + kTieEpsilon) {
        best = a;
        best_score = score;
        best_parts = std::move(parts);
      }
    }
    if (best == data.attributes().size()) return node;

    node.attribute = data.attributes()[best];
    used[best] = true;
    std::size_t largest = 0;
    for (const auto& [feature, part] : best_parts) {
      if (part.size() > largest) {
        largest = part.size();
        node.default_branch = feature;
      }
      node.branches.push_back({feature, grow(part, used)});
    }
    return node;
  }
};

void serialize(const TreeNode& node, json& out) {
  if (node.is_leaf()) {
    out["label"] = std::string(to_string(node.label));
    out["counts"] = {node.counts.pass_count, node.counts.fail_count};
    return;
  }
  out["attribute"] = node.attribute;
  out["branches"] = json::object();
  for (const auto& b : node.branches) {
    json child;
    serialize(b.child, child);
    out["branches"][b.feature] = std::move(child);
  }
  out["default"] = node.default_branch;
}

TreeNode deserialize(const json& in) {
  if (!in.is_object()) throw Error(ErrorCode::ParseError, "tree node must be an object");
  TreeNode node;
  if (in.contains("label")) {
    for (const auto& [key, _] : in.items()) {
      if (key != "label" && key != "counts") throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in tree leaf");
    }
    if (!in["label"].is_string()) throw Error(ErrorCode::ParseError, "leaf label must be a string");
    try {
      node.label = parse_outcome(in["label"].get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
    const auto& c = in.contains("counts") ? in["counts"] : json();
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_unsigned() || !c[1].is_number_unsigned()) {
      throw Error(ErrorCode::ParseError, "leaf counts must be [pass, fail]");
    }
    node.counts = {c[0].get<std::int64_t>(), c[1].get<std::int64_t>()};
    return node;
  }
  for (const auto& [key, _] : in.items()) {
    if (key != "attribute" && key != "branches" && key != "default") {
      throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in tree node");
    }
  }
  if (!in.contains("attribute") || !in["attribute"].is_string() || in["attribute"].get<std::string>().empty()) {
    throw Error(ErrorCode::ParseError, "internal node needs an attribute");
  }
  if (!in.contains("branches") || !in["branches"].is_object() || in["branches"].size() < 2) {
    throw Error(ErrorCode::ParseError, "internal node needs at least two branches");
  }
  if (!in.contains("default") || !in["default"].is_string()) {
    throw Error(ErrorCode::ParseError, "internal node needs a default branch");
  }
  node.attribute = in["attribute"].get<std::string>();
  node.default_branch = in["default"].get<std::string>();
  for (const auto& [feature, child] : in["branches"].items()) {
    node.branches.push_back({feature, deserialize(child)});
    node.counts.pass_count += node.branches.back().child.counts.pass_count;
    node.counts.fail_count += node.branches.back().child.counts.fail_count;
  }
  std::sort(node.branches.begin(), node.branches.end(),
            [](const TreeBranch& a, const TreeBranch& b) { return a.feature < b.feature; });
  if (!node.branch(node.default_branch)) {
    throw Error(ErrorCode::ParseError, "default branch '" + node.default_branch + "' is not a branch");
  }
  node.label = majority(node.counts);
  return node;
}

void render(const TreeNode& node, int depth, std::ostringstream& out) {
  for (const auto& b : node.branches) {
    for (int i = 0; i < depth; ++i) out << "|   ";
    out << node.attribute << " = " << b.feature;
    if (b.child.is_leaf()) {
      const auto& c = b.child.counts;
      const auto wrong = b.child.label == Outcome::Pass ? c.fail_count : c.pass_count;
      out << ": " << to_string(b.child.label) << " (" << c.total();
      if (wrong > 0) out << "/" << wrong;
      out << ")\n";
    } else {
      out << "\n";
      render(b.child, depth + 1, out);
    }
  }
}

}  // namespace

const TreeNode* TreeNode::branch(std::string_view feature) const {
  for (const auto& b : branches) {
    if (b.feature == feature) return &b.child;
  }
  return nullptr;
}

bool operator==(const TreeBranch& a, const TreeBranch& b) { return a.feature == b.feature && a.child == b.child; }

bool operator==(const TreeNode& a, const TreeNode& b) {
  return a.attribute == b.attribute && a.branches == b.branches && a.default_branch == b.default_branch &&
         a.label == b.label && a.counts == b.counts;
}

std::string_view to_string(SplitCriterion c) { return c == SplitCriterion::InfoGain ? "info_gain" : "gain_ratio"; }

SplitCriterion parse_criterion(std::string_view text) {
  if (text == "info_gain") return SplitCriterion::InfoGain;
  if (text == "gain_ratio") return SplitCriterion::GainRatio;
  throw Error(ErrorCode::BadRequest, "criterion must be 'info_gain' or 'gain_ratio', got '" + std::string(text) + "'");
}

DecisionTree build_tree(const EpisodeDataset& d, const TrainConfig& cfg) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train a tree on an empty dataset");
  if (cfg.min_leaf < 1) throw Error(ErrorCode::ValidationError, "min_leaf must be at least 1");
  if (cfg.min_admissible_branches < 2) {
    throw Error(ErrorCode::ValidationError, "min_admissible_branches must be at least 2");
  }
  std::vector<const Episode*> records;
  for (const auto& r : d.records()) records.push_back(&r);
  return DecisionTree{Inducer{d, cfg}.grow(records, std::vector<bool>(d.attributes().size(), false))};
}

Outcome classify(const DecisionTree& t, const std::map<std::string, std::string, std::less<>>& features) {
  const TreeNode* node = &t.root;
  while (!node->is_leaf()) {
    auto it = features.find(node->attribute);
    if (it == features.end()) {
      throw Error(ErrorCode::MissingAttribute, "record has no value for attribute '" + node->attribute + "'");
    }
    const TreeNode* next = node->branch(it->second);
    node = next ? next : node->branch(node->default_branch);
  }
  return node->label;
}

Outcome classify(const DecisionTree& t, const std::vector<std::string>& attributes, const Episode& record) {
  std::map<std::string, std::string, std::less<>> features;
  for (std::size_t i = 0; i < attributes.size() && i < record.features.size(); ++i) {
    features.emplace(attributes[i], record.features[i]);
  }
  return classify(t, features);
}

ConfusionMatrix evaluate(const DecisionTree& t, const EpisodeDataset& d) {
  ConfusionMatrix m;
  for (const auto& r : d.records()) {
    const Outcome predicted = classify(t, d.attributes(), r);
    if (r.label == Outcome::Pass) {
      (predicted == Outcome::Pass ? m.true_pass_pred_pass : m.true_pass_pred_fail)++;
    } else {
      (predicted == Outcome::Pass ? m.true_fail_pred_pass : m.true_fail_pred_fail)++;
    }
  }
  return m;
}

std::pair<EpisodeDataset, EpisodeDataset> split_dataset(const EpisodeDataset& d, const SplitSpec& s) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "cannot split an empty dataset");
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    throw Error(ErrorCode::ValidationError, "train fraction must lie strictly between 0 and 1");
  }
  std::vector<Episode> shuffled = d.records();
  std::mt19937_64 rng(s.seed);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(shuffled[i - 1], shuffled[j]);
  }
  const double n = static_cast<double>(shuffled.size());
  const auto train_count = static_cast<std::size_t>(std::ceil(s.train_fraction * n - 1e-9));
  if (train_count == 0 || train_count >= shuffled.size()) {
    throw Error(ErrorCode::DegenerateSplit, "split of " + std::to_string(shuffled.size()) +
                                                " records leaves the train or test side empty");
  }
  std::vector<Episode> train(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<Episode> test(shuffled.begin() + static_cast<std::ptrdiff_t>(train_count), shuffled.end());
  return {d.with_records(std::move(train)), d.with_records(std::move(test))};
}

std::string tree_to_json(const DecisionTree& t) {
  json out;
  serialize(t.root, out);
  return out.dump(2);
}

DecisionTree tree_from_json(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("tree document is not valid JSON: ") + e.what());
  }
  return DecisionTree{deserialize(doc)};
}

std::string render_tree(const DecisionTree& t) {
  std::ostringstream out;
  if (t.root.is_leaf()) {
    out << ": " << to_string(t.root.label) << " (" << t.root.counts.total() << ")\n";
  } else {
    render(t.root, 0, out);
  }
  return out.str();
}

}  // namespace preassess
