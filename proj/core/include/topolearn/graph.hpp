#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <span>
#include <vector>

namespace topolearn {

using NodeId = std::size_t;
using NodeSet = std::set<NodeId>;

/// Unordered node pair, stored with a < b.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;

  Edge() = default;
  Edge(NodeId u, NodeId v) : a(u < v ? u : v), b(u < v ? v : u) {}

  auto operator<=>(const Edge&) const = default;
};

/// Simple undirected graph on nodes 0..node_count-1. No self-loops, no multi-edges.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t node_count);
  UndirectedGraph(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  void add_edge(NodeId u, NodeId v);
  void remove_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;

  const NodeSet& neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  /// Edges in lexicographic order.
  std::vector<Edge> edges() const;

  /// Subgraph with every edge touching `removed` deleted. Node indexing is kept.
  UndirectedGraph without_nodes(const NodeSet& removed) const;

  bool operator==(const UndirectedGraph& other) const = default;

 private:
  void check_node(NodeId v) const;

  std::vector<NodeSet> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Shortest-path hop counts from `source`; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> hop_distances(const UndirectedGraph& g, NodeId source);

/// Nodes whose shortest-path distance from i is exactly n.
NodeSet n_hop_neighbors(const UndirectedGraph& g, NodeId i, std::size_t n);

bool is_connected(const UndirectedGraph& g);
bool is_forest(const UndirectedGraph& g);
bool is_tree(const UndirectedGraph& g);

/// Degree-one nodes of a tree.
NodeSet leaves(const UndirectedGraph& tree);

/// Tree plus an edge between every pair of 2-hop neighbors. Throws on non-forest input.
UndirectedGraph moral_graph(const UndirectedGraph& topology);

/// Moral graph plus i-j whenever some moral path from i to j has only corrupt intermediates.
UndirectedGraph perturbed_graph(const UndirectedGraph& moral, const NodeSet& corrupt);

bool is_clique(const UndirectedGraph& g, const NodeSet& nodes);

/// True iff N(i) together with i is a clique.
bool neighborhood_is_clique(const UndirectedGraph& g, NodeId i);

/// True iff c and d fall in different components once `cut` is deleted.
bool separates(const UndirectedGraph& g, NodeId c, NodeId d, const NodeSet& cut);

/// Components ordered by smallest member.
std::vector<NodeSet> connected_components(const UndirectedGraph& g);

/// Components of the subgraph induced by `active`, ordered by smallest member.
std::vector<NodeSet> connected_components(const UndirectedGraph& g, const NodeSet& active);

}  // namespace topolearn
