#include "topolearn/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

namespace topolearn {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

}  // namespace

UndirectedGraph::UndirectedGraph(std::size_t node_count) : adjacency_(node_count) {}

UndirectedGraph::UndirectedGraph(std::size_t node_count, std::span<const Edge> edges)
    : adjacency_(node_count) {
  for (const Edge& e : edges) add_edge(e.a, e.b);
}

void UndirectedGraph::check_node(NodeId v) const {
  if (v >= adjacency_.size()) {
    throw std::out_of_range("node index " + std::to_string(v) + " outside graph of " +
                            std::to_string(adjacency_.size()) + " nodes");
  }
}

void UndirectedGraph::add_edge(NodeId u, NodeId v) {
  check_node(u);
  check_node(v);
  if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
  if (adjacency_[u].insert(v).second) {
    adjacency_[v].insert(u);
    ++edge_count_;
  }
}

void UndirectedGraph::remove_edge(NodeId u, NodeId v) {
  check_node(u);
  check_node(v);
  if (adjacency_[u].erase(v) != 0) {
    adjacency_[v].erase(u);
    --edge_count_;
  }
}

bool UndirectedGraph::has_edge(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  return adjacency_[u].contains(v);
}

const NodeSet& UndirectedGraph::neighbors(NodeId v) const {
  check_node(v);
  return adjacency_[v];
}

std::vector<Edge> UndirectedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

UndirectedGraph UndirectedGraph::without_nodes(const NodeSet& removed) const {
  UndirectedGraph out(node_count());
  for (const Edge& e : edges()) {
    if (!removed.contains(e.a) && !removed.contains(e.b)) out.add_edge(e.a, e.b);
  }
  return out;
}

std::vector<std::size_t> hop_distances(const UndirectedGraph& g, NodeId source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreached);
  g.neighbors(source);  // range check
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

NodeSet n_hop_neighbors(const UndirectedGraph& g, NodeId i, std::size_t n) {
  NodeSet out;
  const auto dist = hop_distances(g, i);
  for (NodeId v = 0; v < dist.size(); ++v) {
    if (dist[v] == n) out.insert(v);
  }
  return out;
}

bool is_connected(const UndirectedGraph& g) {
  if (g.node_count() == 0) return true;
  const auto dist = hop_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == kUnreached; });
}

bool is_forest(const UndirectedGraph& g) {
  return g.edge_count() + connected_components(g).size() == g.node_count();
}

bool is_tree(const UndirectedGraph& g) {
  return g.node_count() > 0 && is_connected(g) && g.edge_count() + 1 == g.node_count();
}

NodeSet leaves(const UndirectedGraph& tree) {
  NodeSet out;
  for (NodeId v = 0; v < tree.node_count(); ++v) {
    if (tree.degree(v) == 1) out.insert(v);
  }
  return out;
}

UndirectedGraph moral_graph(const UndirectedGraph& topology) {
  if (!is_forest(topology)) throw std::invalid_argument("moral_graph: topology is not a tree");
  UndirectedGraph moral = topology;
  for (NodeId k = 0; k < topology.node_count(); ++k) {
    const NodeSet& nb = topology.neighbors(k);
    for (auto it = nb.begin(); it != nb.end(); ++it) {
      for (auto jt = std::next(it); jt != nb.end(); ++jt) moral.add_edge(*it, *jt);
    }
  }
  return moral;
}

UndirectedGraph perturbed_graph(const UndirectedGraph& moral, const NodeSet& corrupt) {
  UndirectedGraph out = moral;
  if (corrupt.empty()) return out;
  for (NodeId v : corrupt) moral.neighbors(v);  // range check

  // Each maximal corrupt region R (connected through moral edges among corrupt
  // nodes) turns R together with its moral boundary into a clique.
  for (const NodeSet& region : connected_components(moral, corrupt)) {
    NodeSet closure = region;
    for (NodeId r : region) closure.insert(moral.neighbors(r).begin(), moral.neighbors(r).end());
    for (auto it = closure.begin(); it != closure.end(); ++it) {
      for (auto jt = std::next(it); jt != closure.end(); ++jt) out.add_edge(*it, *jt);
    }
  }
  return out;
}

bool is_clique(const UndirectedGraph& g, const NodeSet& nodes) {
  for (auto it = nodes.begin(); it != nodes.end(); ++it) {
    for (auto jt = std::next(it); jt != nodes.end(); ++jt) {
      if (!g.has_edge(*it, *jt)) return false;
    }
  }
  return true;
}

bool neighborhood_is_clique(const UndirectedGraph& g, NodeId i) {
  NodeSet closed = g.neighbors(i);
  closed.insert(i);
  return is_clique(g, closed);
}

bool separates(const UndirectedGraph& g, NodeId c, NodeId d, const NodeSet& cut) {
  g.neighbors(c);
  g.neighbors(d);
  if (cut.contains(c) || cut.contains(d)) {
    throw std::invalid_argument("separates: endpoints must lie outside the cut");
  }
  if (c == d) return false;
  std::vector<bool> seen(g.node_count(), false);
  for (NodeId v : cut) seen.at(v) = true;
  std::queue<NodeId> frontier;
  seen[c] = true;
  frontier.push(c);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    if (u == d) return false;
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        frontier.push(v);
      }
    }
  }
  return true;
}

std::vector<NodeSet> connected_components(const UndirectedGraph& g) {
  NodeSet all;
  for (NodeId v = 0; v < g.node_count(); ++v) all.insert(all.end(), v);
  return connected_components(g, all);
}

std::vector<NodeSet> connected_components(const UndirectedGraph& g, const NodeSet& active) {
  std::vector<NodeSet> out;
  std::vector<bool> seen(g.node_count(), false);
  // Ascending seed order makes components come out sorted by smallest member.
  for (NodeId seed : active) {
    if (seen.at(seed)) continue;
    NodeSet component;
    std::queue<NodeId> frontier;
    seen[seed] = true;
    frontier.push(seed);
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop();
      component.insert(u);
      for (NodeId v : g.neighbors(u)) {
        if (!seen[v] && active.contains(v)) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    out.push_back(std::move(component));
  }
  return out;
}

}  // namespace topolearn
