#include "preassess/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "preassess/error.hpp"

namespace preassess {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::ValidationError, what);
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ParseError, what);
}

void check_id(const std::string& id, std::string_view role) {
  if (id.empty()) invalid(std::string(role) + " id must be non-empty");
  for (unsigned char c : id) {
    if (std::isspace(c)) invalid(std::string(role) + " id '" + id + "' contains whitespace");
  }
}

/// Detects a cycle among `nodes` under `edges`. Returns a node on the cycle.
std::optional<NodeId> find_cycle(const std::vector<Edge>& edges) {
  std::map<NodeId, std::vector<NodeId>> out;
  for (const auto& e : edges) out[e.from].push_back(e.to);
  enum class Mark { Fresh, Active, Done };
  std::map<NodeId, Mark> mark;
  std::optional<NodeId> hit;
  std::function<bool(const NodeId&)> visit = [&](const NodeId& n) {
    auto& m = mark[n];
    if (m == Mark::Active) {
      hit = n;
      return true;
    }
    if (m == Mark::Done) return false;
    m = Mark::Active;
    for (const auto& next : out[n]) {
      if (visit(next)) return true;
    }
    mark[n] = Mark::Done;
    return false;
  };
  for (const auto& [node, _] : out) {
    if (visit(node)) return hit;
  }
  return std::nullopt;
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!obj.is_object()) malformed(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      malformed("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

const json& required(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed("missing key '" + std::string(key) + "' in " + std::string(where));
  return *it;
}

std::string as_string(const json& v, std::string_view where) {
  if (!v.is_string()) malformed(std::string(where) + " must be a string");
  return v.get<std::string>();
}

std::vector<Edge> parse_edges(const json& doc, const char* key) {
  std::vector<Edge> edges;
  auto it = doc.find(key);
  if (it == doc.end()) return edges;
  if (!it->is_array()) malformed(std::string(key) + " must be an array");
  for (const auto& e : *it) {
    reject_unknown_keys(e, {"from", "to"}, key);
    edges.push_back({as_string(required(e, "from", key), "edge.from"),
                     as_string(required(e, "to", key), "edge.to")});
  }
  return edges;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(std::vector<ParentSpec> parents, std::vector<Edge> prerequisites,
                                     std::vector<Edge> progression,
                                     std::map<std::string, NodeId> aliases) {
  KnowledgeGraph g;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    const auto& parent = parents[p];
    check_id(parent.id, "parent");
    if (g.parent_index_.count(parent.id)) invalid("duplicate parent id '" + parent.id + "'");
    if (g.leaf_index_.count(parent.id)) invalid("id '" + parent.id + "' is both a parent and a leaf");
    g.parent_index_.emplace(parent.id, p);
    if (parent.leaves.empty()) invalid("parent '" + parent.id + "' has no leaves");
    for (std::size_t l = 0; l < parent.leaves.size(); ++l) {
      const auto& leaf = parent.leaves[l];
      check_id(leaf.id, "leaf");
      if (auto it = g.leaf_index_.find(leaf.id); it != g.leaf_index_.end()) {
        invalid("leaf '" + leaf.id + "' listed under two parents ('" + parents[it->second.first].id +
                "' and '" + parent.id + "')");
      }
      g.leaf_index_.emplace(leaf.id, std::make_pair(p, l));
      for (const auto& item : leaf.quiz) {
        if (item.choices.size() < 2) invalid("quiz item of leaf '" + leaf.id + "' needs at least 2 choices");
        if (item.correct_index >= item.choices.size()) {
          invalid("quiz item of leaf '" + leaf.id + "' has correct_index out of range");
        }
      }
    }
  }
  // parents and leaves are disjoint: a parent id declared after a same-named leaf
  for (const auto& parent : parents) {
    if (g.leaf_index_.count(parent.id)) invalid("id '" + parent.id + "' is both a parent and a leaf");
  }

  auto check_edges = [&](const std::vector<Edge>& edges, std::string_view kind) {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : edges) {
      if (!g.parent_index_.count(e.from) || !g.parent_index_.count(e.to)) {
        invalid(std::string(kind) + " edge " + e.from + "->" + e.to + " must connect parent nodes");
      }
      if (!seen.insert({e.from, e.to}).second) {
        invalid("duplicate " + std::string(kind) + " edge " + e.from + "->" + e.to);
      }
    }
    if (auto node = find_cycle(edges)) invalid(std::string(kind) + " cycle through '" + *node + "'");
  };
  check_edges(prerequisites, "prerequisite");
  check_edges(progression, "progression");
  std::set<NodeId> has_successor;
  for (const auto& e : progression) {
    if (!has_successor.insert(e.from).second) {
      invalid("parent '" + e.from + "' has more than one progression successor");
    }
  }

  for (const auto& [alias, target] : aliases) {
    check_id(alias, "alias");
    if (g.parent_index_.count(alias) || g.leaf_index_.count(alias)) {
      invalid("alias '" + alias + "' shadows a node id");
    }
    if (!g.parent_index_.count(target) && !g.leaf_index_.count(target)) {
      invalid("alias '" + alias + "' targets unknown node '" + target + "'");
    }
  }

  g.parents_ = std::move(parents);
  g.prerequisites_ = std::move(prerequisites);
  g.progression_ = std::move(progression);
  g.aliases_ = std::move(aliases);
  return g;
}

bool KnowledgeGraph::is_parent(std::string_view id) const { return parent_index_.count(id) > 0; }

bool KnowledgeGraph::is_leaf(std::string_view id) const { return leaf_index_.count(id) > 0; }

const KnowledgeGraph::ParentSpec& KnowledgeGraph::parent_spec(std::string_view id) const {
  auto it = parent_index_.find(id);
  if (it == parent_index_.end()) {
    throw Error(ErrorCode::UnknownNode, "unknown parent node '" + std::string(id) + "'");
  }
  return parents_[it->second];
}

const NodeId& KnowledgeGraph::owner_of(std::string_view leaf) const {
  auto it = leaf_index_.find(leaf);
  if (it == leaf_index_.end()) {
    throw Error(ErrorCode::UnknownNode, "unknown leaf node '" + std::string(leaf) + "'");
  }
  return parents_[it->second.first].id;
}

std::vector<NodeId> KnowledgeGraph::prerequisites_of(std::string_view desired) const {
  parent_spec(desired);

  std::map<NodeId, std::vector<NodeId>> incoming;
  for (const auto& e : prerequisites_) incoming[e.to].push_back(e.from);

  std::set<NodeId> ancestors;
  std::vector<NodeId> stack{NodeId(desired)};
  while (!stack.empty()) {
    NodeId n = std::move(stack.back());
    stack.pop_back();
    for (const auto& src : incoming[n]) {
      if (ancestors.insert(src).second) stack.push_back(src);
    }
  }
  ancestors.erase(NodeId(desired));

  // Kahn over the ancestor subgraph; std::set keeps the ready list sorted
  std::map<NodeId, int> indegree;
  for (const auto& a : ancestors) indegree[a] = 0;
  for (const auto& e : prerequisites_) {
    if (ancestors.count(e.from) && ancestors.count(e.to)) ++indegree[e.to];
  }
  std::set<NodeId> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.insert(n);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& e : prerequisites_) {
      if (e.from == n && ancestors.count(e.to) && --indegree[e.to] == 0) ready.insert(e.to);
    }
  }
  return order;
}

std::vector<NodeId> KnowledgeGraph::leaves_under(std::string_view parent) const {
  const auto& spec = parent_spec(parent);
  std::vector<NodeId> out;
  out.reserve(spec.leaves.size());
  for (const auto& leaf : spec.leaves) out.push_back(leaf.id);
  return out;
}

std::optional<NodeId> KnowledgeGraph::next_higher(std::string_view parent) const {
  parent_spec(parent);
  for (const auto& e : progression_) {
    if (e.from == parent) return e.to;
  }
  return std::nullopt;
}

const std::vector<QuizItem>& KnowledgeGraph::quiz_for(std::string_view leaf) const {
  auto it = leaf_index_.find(leaf);
  if (it == leaf_index_.end()) {
    throw Error(ErrorCode::UnknownNode, "unknown leaf node '" + std::string(leaf) + "'");
  }
  return parents_[it->second.first].leaves[it->second.second].quiz;
}

NodeId KnowledgeGraph::resolve(std::string_view id_or_alias) const {
  if (is_parent(id_or_alias) || is_leaf(id_or_alias)) return NodeId(id_or_alias);
  if (auto it = aliases_.find(std::string(id_or_alias)); it != aliases_.end()) return it->second;
  throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id_or_alias) + "'");
}

KnowledgeGraph load_graph(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    malformed(std::string("graph document is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(doc, {"parents", "prerequisites", "progression", "aliases"}, "graph document");

  std::vector<KnowledgeGraph::ParentSpec> parents;
  const auto& parents_json = required(doc, "parents", "graph document");
  if (!parents_json.is_array()) malformed("parents must be an array");
  for (const auto& p : parents_json) {
    reject_unknown_keys(p, {"id", "leaves"}, "parent");
    KnowledgeGraph::ParentSpec parent;
    parent.id = as_string(required(p, "id", "parent"), "parent.id");
    const auto& leaves = required(p, "leaves", "parent '" + parent.id + "'");
    if (!leaves.is_array()) malformed("leaves of '" + parent.id + "' must be an array");
    for (const auto& l : leaves) {
      reject_unknown_keys(l, {"id", "quiz"}, "leaf");
      KnowledgeGraph::LeafSpec leaf;
      leaf.id = as_string(required(l, "id", "leaf"), "leaf.id");
      if (auto q = l.find("quiz"); q != l.end()) {
        if (!q->is_array()) malformed("quiz of '" + leaf.id + "' must be an array");
        for (const auto& item : *q) {
          reject_unknown_keys(item, {"prompt", "choices", "correct_index"}, "quiz item");
          QuizItem qi;
          qi.prompt = as_string(required(item, "prompt", "quiz item"), "prompt");
          const auto& choices = required(item, "choices", "quiz item");
          if (!choices.is_array()) malformed("choices must be an array");
          for (const auto& c : choices) qi.choices.push_back(as_string(c, "choice"));
          const auto& idx = required(item, "correct_index", "quiz item");
          if (!idx.is_number_unsigned()) malformed("correct_index must be a non-negative integer");
          qi.correct_index = idx.get<std::size_t>();
          leaf.quiz.push_back(std::move(qi));
        }
      }
      parent.leaves.push_back(std::move(leaf));
    }
    parents.push_back(std::move(parent));
  }

  std::map<std::string, NodeId> aliases;
  if (auto a = doc.find("aliases"); a != doc.end()) {
    if (!a->is_object()) malformed("aliases must be an object");
    for (const auto& [alias, target] : a->items()) aliases.emplace(alias, as_string(target, "alias target"));
  }

  return KnowledgeGraph::build(std::move(parents), parse_edges(doc, "prerequisites"),
                               parse_edges(doc, "progression"), std::move(aliases));
}

KnowledgeGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_graph(buf.str());
}

std::string serialize_graph(const KnowledgeGraph& g) {
  json doc;
  doc["parents"] = json::array();
  for (const auto& p : g.parents()) {
    json pj;
    pj["id"] = p.id;
    pj["leaves"] = json::array();
    for (const auto& l : p.leaves) {
      json lj;
      lj["id"] = l.id;
      if (!l.quiz.empty()) {
        lj["quiz"] = json::array();
        for (const auto& q : l.quiz) {
          lj["quiz"].push_back({{"prompt", q.prompt}, {"choices", q.choices}, {"correct_index", q.correct_index}});
        }
      }
      pj["leaves"].push_back(std::move(lj));
    }
    doc["parents"].push_back(std::move(pj));
  }
  auto edges = [](const std::vector<Edge>& es) {
    json arr = json::array();
    for (const auto& e : es) arr.push_back({{"from", e.from}, {"to", e.to}});
    return arr;
  };
  doc["prerequisites"] = edges(g.prerequisite_edges());
  doc["progression"] = edges(g.progression_edges());
  if (!g.aliases().empty()) {
    doc["aliases"] = json::object();
    for (const auto& [alias, target] : g.aliases()) doc["aliases"][alias] = target;
  }
  return doc.dump(2) + "\n";
}

bool operator==(const KnowledgeGraph::LeafSpec& a, const KnowledgeGraph::LeafSpec& b) {
  return a.id == b.id && a.quiz == b.quiz;
}

bool operator==(const KnowledgeGraph::ParentSpec& a, const KnowledgeGraph::ParentSpec& b) {
  return a.id == b.id && a.leaves == b.leaves;
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.parents() == b.parents() && a.prerequisite_edges() == b.prerequisite_edges() &&
         a.progression_edges() == b.progression_edges() && a.aliases() == b.aliases();
}

}  // namespace preassess
