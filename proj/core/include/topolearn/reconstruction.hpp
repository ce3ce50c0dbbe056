#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "topolearn/detection.hpp"
#include "topolearn/graph.hpp"
#include "topolearn/spectrum.hpp"

namespace topolearn {

enum class EdgeOrigin { Leaf, Separation, Placement };

std::string to_string(EdgeOrigin origin);

/// One candidate alignment p - q - corrupt - r - s between two components.
struct PlacementTrial {
  std::size_t component_a = 0;
  std::size_t component_b = 0;
  NodeId corrupt = 0;
  NodeId p = 0;
  NodeId q = 0;
  NodeId r = 0;
  NodeId s = 0;
  double phase_score = 0.0;  // phase score of the (p, s) entry
  bool passed = false;
};

struct TopologyEstimate {
  std::vector<std::string> labels;
  UndirectedGraph graph;
  std::map<Edge, EdgeOrigin> provenance;
  UndirectedGraph observed_support;
  std::vector<NodeSet> components_before_placement;
  std::vector<PlacementTrial> trials;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Support graph of the inverse of the observed principal submatrix, on all N node indices.
/// Nodes in `corrupt` are left isolated.
UndirectedGraph observed_support_graph(const SpectralMatrix& psd, const NodeSet& corrupt,
                                       const EdgeDecisionParams& params, double ridge = 0.0);

/// Edges of `support` between non-leaf observed nodes whose removal (both endpoints)
/// disconnects the remaining observed nodes, together with `leaf_edges`.
std::vector<Edge> true_edges_by_separation(const UndirectedGraph& support, const NodeSet& observed,
                                           const NodeSet& leaves, std::span<const Edge> leaf_edges);

/// Splices each corrupt node between pairs of components of the observed true-edge graph.
/// The returned estimate carries the edges, components, trials and diagnostics.
TopologyEstimate place_corrupt_nodes(std::span<const Edge> true_edges, const NodeSet& corrupt,
                                     const UndirectedGraph& perturbed, const SpectralMatrix& inverse,
                                     const EdgeDecisionParams& params);

/// Full reconstruction from the (corrupted) PSD, its inverse and a detection report.
TopologyEstimate hide_and_learn(const SpectralMatrix& psd, const SpectralMatrix& inverse,
                                const DetectionReport& report, const EdgeDecisionParams& params,
                                double ridge = 0.0);

/// Every corrupt node at least three hops from every leaf and from every other corrupt node.
bool satisfies_assumption(const UndirectedGraph& tree, const NodeSet& corrupt);

}  // namespace topolearn
