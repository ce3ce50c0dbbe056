#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topolearn/graph.hpp"
#include "topolearn/spectrum.hpp"

namespace topolearn {

/// Self dynamics of one node.
///
/// S(z) = z^m - ar[0] z^(m-1) - ... - ar[m-1], with m = ar.size() >= 1. In the
/// time domain the node obeys
///   x_i[t] = sum_k ar[k-1] x_i[t-k] + sum_j b_ij x_j[t-m] + w_i[t],
/// with w_i white Gaussian of variance noise_variance.
struct NodeDynamics {
  std::vector<double> ar{0.0};
  double noise_variance = 1.0;

  std::size_t order() const { return ar.size(); }
  Complex characteristic(double omega) const;  // S(e^{j omega})
};

/// Bidirectional LTI network on a forest topology.
class GenerativeModel {
 public:
  using Coupling = std::map<std::pair<NodeId, NodeId>, double>;

  GenerativeModel() = default;

  /// `coupling[{i, j}]` is b_ij, the weight of x_j in node i's equation. Every
  /// topology edge needs both directions nonzero; no other pair may appear.
  GenerativeModel(UndirectedGraph topology, std::vector<std::string> labels, Coupling coupling,
                  std::vector<NodeDynamics> dynamics);

  std::size_t node_count() const { return labels_.size(); }
  const UndirectedGraph& topology() const { return topology_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Coupling& coupling() const { return coupling_; }
  const NodeDynamics& dynamics(NodeId i) const { return dynamics_.at(i); }
  const std::vector<NodeDynamics>& dynamics() const { return dynamics_; }

  /// b_ij, zero for non-adjacent pairs.
  double coupling(NodeId i, NodeId j) const;

  /// G_ij(e^{j omega}) = b_ij / S_i(e^{j omega}).
  Complex transfer(NodeId i, NodeId j, double omega) const;

  /// PSD of e_i = w_i / S_i at omega.
  double innovation_psd(NodeId i, double omega) const;

  /// Companion state matrix over the stacked history x[t-1..t-D], D = max order.
  Eigen::MatrixXd state_matrix() const;
  double spectral_radius() const;

  /// Throws NumericalError unless 1 - spectral_radius >= margin.
  void require_stable(double margin = 1e-3) const;

  /// Node order permuted: node i of the result is node perm[i] of this model.
  GenerativeModel permuted(std::span<const NodeId> perm) const;

 private:
  UndirectedGraph topology_;
  std::vector<std::string> labels_;
  Coupling coupling_;
  std::vector<NodeDynamics> dynamics_;
};

/// N channels of T samples each, stored channel-major.
class TimeSeriesPanel {
 public:
  TimeSeriesPanel() = default;
  TimeSeriesPanel(std::vector<std::string> labels, std::size_t length, double dt = 1.0);

  std::size_t channel_count() const { return labels_.size(); }
  std::size_t length() const { return length_; }
  double dt() const { return dt_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::span<double> channel(std::size_t i);
  std::span<const double> channel(std::size_t i) const;

  double& operator()(std::size_t i, std::size_t t) { return data_[i * length_ + t]; }
  double operator()(std::size_t i, std::size_t t) const { return data_[i * length_ + t]; }

  /// Copies samples [begin, begin + rows) into `out` time-major (row = one time step).
  void copy_rows(std::size_t begin, std::size_t rows, std::span<double> out) const;

  /// Throws DataError on shape problems or non-finite samples.
  void validate() const;

  bool operator==(const TimeSeriesPanel& other) const = default;

 private:
  std::vector<std::string> labels_;
  std::size_t length_ = 0;
  double dt_ = 1.0;
  std::vector<double> data_;
};

/// Streaming trajectory generator. Successive calls continue the same trajectory.
class Simulator {
 public:
  Simulator(const GenerativeModel& model, std::uint64_t seed, std::size_t burn_in = 10'000);

  /// Fills `rows` complete time steps into `out` (size rows * N, time-major).
  void generate(std::span<double> out);

  std::size_t channel_count() const { return n_; }

 private:
  void step(double* row);

  std::size_t n_;
  std::size_t depth_;
  std::vector<double> ar_;          // n_ x depth_, zero padded
  std::vector<std::size_t> order_;  // per node
  std::vector<std::vector<std::pair<NodeId, double>>> inputs_;
  std::vector<double> sigma_;
  std::vector<std::mt19937_64> engines_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> history_;  // ring of depth_ rows
  std::size_t head_ = 0;         // row index of x[t-1]
};

/// In-memory trajectory of `length` samples after discarding `burn_in` samples.
TimeSeriesPanel simulate(const GenerativeModel& model, std::size_t length, std::uint64_t seed,
                         std::size_t burn_in = 10'000);

/// (I - G)^-1 Phi_e (I - G)^-H at a single frequency.
Eigen::MatrixXcd analytic_psd_at(const GenerativeModel& model, double omega);

/// (I - G)^-1 Phi_e (I - G)^-H on every grid frequency.
SpectralMatrix analytic_psd(const GenerativeModel& model, const FrequencyGrid& grid);

/// Inverse PSD assembled entrywise from the tree structure (1-hop, 2-hop, diagonal, zero).
SpectralMatrix analytic_inverse_psd(const GenerativeModel& model, const FrequencyGrid& grid);

/// Entry (i, j) of the assembled inverse PSD at a single frequency.
Complex analytic_inverse_psd_entry(const GenerativeModel& model, NodeId i, NodeId j, double omega);

}  // namespace topolearn
