#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace preassess {

using NodeId = std::string;

struct QuizItem {
  std::string prompt;
  std::vector<std::string> choices;
  std::size_t correct_index = 0;

  bool operator==(const QuizItem&) const = default;
};

struct Edge {
  NodeId from;
  NodeId to;

  bool operator==(const Edge&) const = default;
};

/// Ontology of learning objects: parent concepts, the leaf skills each one
/// owns, prerequisite edges and the "next higher" progression chain.
///
/// Immutable once built; construct through load_graph or KnowledgeGraph::build.
class KnowledgeGraph {
 public:
  struct LeafSpec {
    NodeId id;
    std::vector<QuizItem> quiz;
  };
  struct ParentSpec {
    NodeId id;
    std::vector<LeafSpec> leaves;
  };

  /// Validates and assembles a graph. Throws Error(ValidationError) naming
  /// the violated invariant.
  static KnowledgeGraph build(std::vector<ParentSpec> parents, std::vector<Edge> prerequisites,
                              std::vector<Edge> progression,
                              std::map<std::string, NodeId> aliases = {});

  /// Parents in declaration order.
  const std::vector<ParentSpec>& parents() const { return parents_; }
  const std::vector<Edge>& prerequisite_edges() const { return prerequisites_; }
  const std::vector<Edge>& progression_edges() const { return progression_; }
  const std::map<std::string, NodeId>& aliases() const { return aliases_; }

  bool is_parent(std::string_view id) const;
  bool is_leaf(std::string_view id) const;

  /// Owning parent of a leaf. Throws UnknownNode.
  const NodeId& owner_of(std::string_view leaf) const;

  /// Transitive prerequisites of `desired`, topologically ordered with
  /// lexicographic tie-breaks; excludes `desired`. Throws UnknownNode.
  std::vector<NodeId> prerequisites_of(std::string_view desired) const;

  /// Leaves of `parent` in declaration order. Throws UnknownNode.
  std::vector<NodeId> leaves_under(std::string_view parent) const;

  /// Progression successor, std::nullopt when terminal. Throws UnknownNode.
  std::optional<NodeId> next_higher(std::string_view parent) const;

  /// Quiz items for a leaf (possibly empty). Throws UnknownNode.
  const std::vector<QuizItem>& quiz_for(std::string_view leaf) const;

  /// Maps an alias (e.g. "SOB") or an id to the canonical id; ids pass
  /// through unchanged. Throws UnknownNode.
  NodeId resolve(std::string_view id_or_alias) const;

 private:
  const ParentSpec& parent_spec(std::string_view id) const;

  std::vector<ParentSpec> parents_;
  std::vector<Edge> prerequisites_;
  std::vector<Edge> progression_;
  std::map<std::string, NodeId> aliases_;
  std::map<NodeId, std::size_t, std::less<>> parent_index_;
  std::map<NodeId, std::pair<std::size_t, std::size_t>, std::less<>> leaf_index_;
};

/// Parses a graph document (JSON). Throws Error(ParseError) for malformed
/// JSON or schema violations, Error(ValidationError) for invariant violations.
KnowledgeGraph load_graph(std::string_view document);

/// Reads and parses a graph file. Throws Error(StorageFailure) when unreadable.
KnowledgeGraph load_graph_file(const std::string& path);

/// Canonical JSON document for a graph; load_graph(serialize_graph(g)) == g.
std::string serialize_graph(const KnowledgeGraph& g);

bool operator==(const KnowledgeGraph::LeafSpec& a, const KnowledgeGraph::LeafSpec& b);
bool operator==(const KnowledgeGraph::ParentSpec& a, const KnowledgeGraph::ParentSpec& b);
bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

}  // namespace preassess
