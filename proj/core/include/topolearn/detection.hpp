#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topolearn/graph.hpp"
#include "topolearn/spectrum.hpp"

namespace topolearn {

/// Thresholds that turn finite-precision spectra into graph decisions.
struct EdgeDecisionParams {
  double magnitude_threshold = 0.05;     // normalised support score; >= means edge
  double phase_threshold = 0.1;          // radians; >= means non-constant phase
  double magnitude_floor_quantile = 0.25;
  std::size_t band_edge_bins = 2;

  /// Throws ConfigError.
  void validate() const;

  /// Settings for exact (analytic) spectra, where absent entries vanish to rounding error.
  static EdgeDecisionParams exact();
};

/// Structured, non-fatal finding attached to a report.
struct Diagnostic {
  std::string code;
  std::string message;
  std::vector<NodeId> nodes;
};

struct PhaseEvidence {
  NodeId neighbor = 0;
  double score = 0.0;
  bool nonconstant = false;
};

struct DetectionReport {
  std::vector<std::string> labels;
  UndirectedGraph perturbed;   // support graph of the inverse spectrum
  Eigen::MatrixXd support_scores;
  NodeSet candidates;          // clique neighbourhoods
  NodeSet corrupt;
  NodeSet leaves;
  NodeSet unclassified;        // candidates without any non-constant edge
  std::vector<Edge> leaf_edges;
  std::map<NodeId, std::vector<PhaseEvidence>> evidence;
  std::vector<Diagnostic> diagnostics;
};

/// s(i, j) = max over non-excluded frequencies of |M_ij| / sqrt(|M_ii| |M_jj|); diagonal is zero.
/// Throws NumericalError if some node has a non-positive diagonal at every frequency.
Eigen::MatrixXd support_scores(const SpectralMatrix& inverse);

/// Graph with i-j iff scores(i, j) >= threshold.
UndirectedGraph threshold_graph(const Eigen::MatrixXd& scores, double threshold);

UndirectedGraph infer_support_graph(const SpectralMatrix& inverse, const EdgeDecisionParams& params);

/// Magnitude-weighted circular standard deviation of arg M_ij over frequencies away
/// from the band edges whose magnitude reaches the configured quantile.
/// Throws NumericalError when no frequency qualifies.
double phase_nonconstancy_score(const SpectralMatrix& inverse, NodeId i, NodeId j, const EdgeDecisionParams& params);

/// Clique-neighbourhood candidates classified by counting non-constant-phase edges.
DetectionReport detect(const SpectralMatrix& inverse, const EdgeDecisionParams& params);

}  // namespace topolearn
