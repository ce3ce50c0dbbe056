#include "topolearn/reconstruction.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "topolearn/error.hpp"
#include "topolearn/spectral.hpp"

namespace topolearn {

namespace {

std::string join_labels(const std::vector<std::string>& labels, std::initializer_list<NodeId> nodes) {
  std::string out;
  for (NodeId v : nodes) {
    if (!out.empty()) out += '-';
    out += labels[v];
  }
  return out;
}

}  // namespace

std::string to_string(EdgeOrigin origin) {
  switch (origin) {
    case EdgeOrigin::Leaf: return "leaf_edge";
    case EdgeOrigin::Separation: return "separation_edge";
    case EdgeOrigin::Placement: return "placement_edge";
  }
  return "leaf_edge";
}

UndirectedGraph observed_support_graph(const SpectralMatrix& psd, const NodeSet& corrupt,
                                       const EdgeDecisionParams& params, double ridge) {
  params.validate();
  std::vector<NodeId> observed;
  for (NodeId v = 0; v < psd.node_count(); ++v) {
    if (!corrupt.contains(v)) observed.push_back(v);
  }
  if (observed.size() < 2) throw AssumptionViolation("fewer than two observed nodes");
  const SpectralMatrix inv = marginal_inverse_psd(psd, observed, ridge);
  const UndirectedGraph local = infer_support_graph(inv, params);
  UndirectedGraph out(psd.node_count());
  for (const Edge& e : local.edges()) out.add_edge(observed[e.a], observed[e.b]);
  return out;
}

std::vector<Edge> true_edges_by_separation(const UndirectedGraph& support, const NodeSet& observed,
                                           const NodeSet& leaves, std::span<const Edge> leaf_edges) {
  std::set<Edge> kept(leaf_edges.begin(), leaf_edges.end());
  for (const Edge& e : support.edges()) {
    if (!observed.contains(e.a) || !observed.contains(e.b)) continue;
    if (leaves.contains(e.a) || leaves.contains(e.b)) continue;
    NodeSet rest = observed;
    rest.erase(e.a);
    rest.erase(e.b);
    if (connected_components(support, rest).size() >= 2) kept.insert(e);
  }
  return {kept.begin(), kept.end()};
}

TopologyEstimate place_corrupt_nodes(std::span<const Edge> true_edges, const NodeSet& corrupt,
                                     const UndirectedGraph& perturbed, const SpectralMatrix& inverse,
                                     const EdgeDecisionParams& params) {
  params.validate();
  const std::size_t n = perturbed.node_count();
  TopologyEstimate est;
  est.labels = inverse.labels();
  est.graph = UndirectedGraph(n, true_edges);
  NodeSet observed;
  for (NodeId v = 0; v < n; ++v) {
    if (!corrupt.contains(v)) observed.insert(v);
  }
  est.components_before_placement = connected_components(est.graph, observed);
  const auto& comps = est.components_before_placement;
  for (const NodeSet& c : comps) {
    if (c.size() < 2) {
      est.diagnostics.push_back({"component_too_small",
                                 "observed component {" + est.labels[*c.begin()] + "} has a single node",
                                 {c.begin(), c.end()}});
    }
  }

  // Ordered pairs (q, p): q in the component and p a neighbour of q inside it.
  auto anchors = [&](const NodeSet& comp) {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId q : comp) {
      for (NodeId p : est.graph.neighbors(q)) {
        if (comp.contains(p)) out.emplace_back(q, p);
      }
    }
    return out;
  };

  std::vector<Edge> placed;
  for (std::size_t a = 0; a < comps.size(); ++a) {
    const auto left = anchors(comps[a]);
    for (std::size_t b = a + 1; b < comps.size(); ++b) {
      const auto right = anchors(comps[b]);
      std::set<std::tuple<NodeId, NodeId, NodeId>> alignments;
      for (NodeId l : corrupt) {
        for (const auto& [q, p] : left) {
          if (!perturbed.has_edge(q, l) || !perturbed.has_edge(p, l)) continue;
          for (const auto& [r, s] : right) {
            if (!is_clique(perturbed, {p, q, l, r, s})) continue;
            PlacementTrial trial{a, b, l, p, q, r, s, phase_nonconstancy_score(inverse, p, s, params), false};
            trial.passed = trial.phase_score < params.phase_threshold;
            if (trial.passed) alignments.emplace(q, l, r);
            est.trials.push_back(trial);
          }
        }
      }
      if (alignments.size() == 1) {
        const auto& [q, l, r] = *alignments.begin();
        placed.emplace_back(q, l);
        placed.emplace_back(l, r);
      } else if (alignments.size() > 1) {
        std::vector<NodeId> involved;
        for (const auto& [q, l, r] : alignments) involved.insert(involved.end(), {q, l, r});
        std::string which;
        for (const auto& [q, l, r] : alignments) which += (which.empty() ? "" : ", ") + join_labels(est.labels, {q, l, r});
        est.diagnostics.push_back({"conflicting_placement",
                                   "components " + std::to_string(a) + " and " + std::to_string(b) +
                                       " admit several alignments: " + which,
                                   involved});
      }
    }
  }
  for (const Edge& e : true_edges) est.provenance.emplace(e, EdgeOrigin::Separation);
  for (const Edge& e : placed) {
    if (!est.graph.has_edge(e.a, e.b)) est.graph.add_edge(e.a, e.b);
    est.provenance[e] = EdgeOrigin::Placement;
  }
  for (NodeId l : corrupt) {
    if (est.graph.degree(l) == 0) {
      est.diagnostics.push_back({"corrupt_node_unplaced", "no alignment certifies a position for node " + est.labels[l], {l}});
    }
  }
  return est;
}

bool satisfies_assumption(const UndirectedGraph& tree, const NodeSet& corrupt) {
  const NodeSet leaf_set = leaves(tree);
  for (NodeId c : corrupt) {
    const auto dist = hop_distances(tree, c);
    for (NodeId l : leaf_set) {
      if (dist[l] < 3) return false;
    }
    for (NodeId o : corrupt) {
      if (o != c && dist[o] < 3) return false;
    }
  }
  return true;
}

TopologyEstimate hide_and_learn(const SpectralMatrix& psd, const SpectralMatrix& inverse,
                                const DetectionReport& report, const EdgeDecisionParams& params, double ridge) {
  const std::size_t n = psd.node_count();
  if (inverse.node_count() != n || report.perturbed.node_count() != n) {
    throw DataError("spectrum, inverse and report disagree on the node count");
  }
  NodeSet observed;
  for (NodeId v = 0; v < n; ++v) {
    if (!report.corrupt.contains(v)) observed.insert(v);
  }
  if (observed.size() < 2) {
    TopologyEstimate est;
    est.labels = psd.labels();
    est.graph = UndirectedGraph(n);
    est.observed_support = UndirectedGraph(n);
    est.diagnostics.push_back({"too_few_observed", "fewer than two nodes remain after hiding the corrupt ones",
                               {report.corrupt.begin(), report.corrupt.end()}});
    return est;
  }
  const UndirectedGraph support = observed_support_graph(psd, report.corrupt, params, ridge);
  const std::vector<Edge> true_edges = true_edges_by_separation(support, observed, report.leaves, report.leaf_edges);
  TopologyEstimate est = place_corrupt_nodes(true_edges, report.corrupt, report.perturbed, inverse, params);
  est.observed_support = support;
  for (const Edge& e : report.leaf_edges) est.provenance[e] = EdgeOrigin::Leaf;

  // Self-consistency of the result with everything observed along the way.
  if (!is_tree(est.graph)) {
    est.diagnostics.push_back({"not_a_tree", "the estimated topology is not a spanning tree", {}});
  } else {
    if (!satisfies_assumption(est.graph, report.corrupt)) {
      std::vector<NodeId> nodes(report.corrupt.begin(), report.corrupt.end());
      est.diagnostics.push_back({"assumption_violated",
                                 "in the estimate some corrupt node lies within two hops of a leaf or another corrupt node",
                                 nodes});
    }
    if (perturbed_graph(moral_graph(est.graph), report.corrupt) != report.perturbed) {
      est.diagnostics.push_back({"support_mismatch",
                                 "the estimate does not reproduce the observed support graph", {}});
    }
  }
  return est;
}

}  // namespace topolearn
