#include "topolearn/detection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "topolearn/error.hpp"

namespace topolearn {

void EdgeDecisionParams::validate() const {
  if (!(magnitude_threshold > 0.0)) throw ConfigError("magnitude threshold must be positive");
  if (!(phase_threshold > 0.0)) throw ConfigError("phase threshold must be positive");
  if (!(magnitude_floor_quantile >= 0.0 && magnitude_floor_quantile < 1.0)) {
    throw ConfigError("magnitude floor quantile must lie in [0, 1)");
  }
}

EdgeDecisionParams EdgeDecisionParams::exact() {
  EdgeDecisionParams p;
  p.magnitude_threshold = 1e-6;
  return p;
}

Eigen::MatrixXd support_scores(const SpectralMatrix& inverse) {
  const auto n = static_cast<Eigen::Index>(inverse.node_count());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, n);
  std::vector<bool> usable(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < inverse.size(); ++k) {
    if (inverse.excluded(k)) continue;
    const Eigen::MatrixXcd& m = inverse.at(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dii = m(i, i).real();
      if (!(dii > 0.0)) continue;
      usable[static_cast<std::size_t>(i)] = true;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double djj = m(j, j).real();
        if (!(djj > 0.0)) continue;
        const double s = std::abs(m(i, j)) / std::sqrt(dii * djj);
        if (s > scores(i, j)) scores(i, j) = scores(j, i) = s;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!usable[static_cast<std::size_t>(i)]) {
      throw NumericalError("inverse spectrum has no positive diagonal for node " +
                           inverse.labels()[static_cast<std::size_t>(i)]);
    }
  }
  return scores;
}

UndirectedGraph threshold_graph(const Eigen::MatrixXd& scores, double threshold) {
  const auto n = scores.rows();
  UndirectedGraph g(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (scores(i, j) >= threshold) g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return g;
}

UndirectedGraph infer_support_graph(const SpectralMatrix& inverse, const EdgeDecisionParams& params) {
  params.validate();
  return threshold_graph(support_scores(inverse), params.magnitude_threshold);
}

double phase_nonconstancy_score(const SpectralMatrix& inverse, NodeId i, NodeId j, const EdgeDecisionParams& params) {
  if (i >= inverse.node_count() || j >= inverse.node_count() || i == j) {
    throw ConfigError("phase score needs two distinct valid nodes");
  }
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  std::vector<Complex> values;
  for (std::size_t k = 0; k < inverse.size(); ++k) {
    if (inverse.excluded(k) || !inverse.grid().outside_band_edges(k, params.band_edge_bins)) continue;
    values.push_back(inverse.at(k)(ii, jj));
  }
  if (values.empty()) throw NumericalError("no admissible frequencies for the phase test");
  std::vector<double> mags;
  mags.reserve(values.size());
  for (const Complex& v : values) mags.push_back(std::abs(v));
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  const auto pos = static_cast<std::size_t>(params.magnitude_floor_quantile * static_cast<double>(sorted.size() - 1));
  const double floor = sorted[pos];

  Complex resultant = 0.0;
  double weight = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mags[k] < floor || mags[k] == 0.0) continue;
    resultant += values[k];  // magnitude-weighted unit phasor
    weight += mags[k];
  }
  if (!(weight > 0.0)) throw NumericalError("no admissible frequencies for the phase test");
  const double r = std::min(1.0, std::abs(resultant) / weight);
  if (r >= 1.0) return 0.0;
  return std::sqrt(-2.0 * std::log(std::max(r, 1e-300)));
}

DetectionReport detect(const SpectralMatrix& inverse, const EdgeDecisionParams& params) {
  params.validate();
  DetectionReport report;
  report.labels = inverse.labels();
  report.support_scores = support_scores(inverse);
  report.perturbed = threshold_graph(report.support_scores, params.magnitude_threshold);
  const UndirectedGraph& g = report.perturbed;

  std::set<Edge> leaf_edges;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.degree(i) == 0 || !neighborhood_is_clique(g, i)) continue;
    report.candidates.insert(i);
    std::vector<PhaseEvidence>& ev = report.evidence[i];
    std::vector<NodeId> nonconstant;
    for (NodeId j : g.neighbors(i)) {
      const double score = phase_nonconstancy_score(inverse, i, j, params);
      const bool flag = score >= params.phase_threshold;
      ev.push_back({j, score, flag});
      if (flag) nonconstant.push_back(j);
    }
    if (nonconstant.size() >= 2) {
      report.corrupt.insert(i);
    } else if (nonconstant.size() == 1) {
      report.leaves.insert(i);
      leaf_edges.insert(Edge(i, nonconstant.front()));
    } else {
      report.unclassified.insert(i);
      report.diagnostics.push_back({"candidate_without_true_edge",
                                    "node " + report.labels[i] +
                                        " has a clique neighbourhood but no edge with non-constant phase",
                                    {i}});
    }
  }
  report.leaf_edges.assign(leaf_edges.begin(), leaf_edges.end());
  return report;
}

}  // namespace topolearn
