#include "topolearn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "topolearn/error.hpp"

namespace topolearn {

Complex NodeDynamics::characteristic(double omega) const {
  // Horner on z^m - ar[0] z^(m-1) - ... - ar[m-1].
  const Complex z = std::polar(1.0, omega);
  Complex s = 1.0;
  for (double a : ar) s = s * z - a;
  return s;
}

GenerativeModel::GenerativeModel(UndirectedGraph topology, std::vector<std::string> labels,
                                 Coupling coupling, std::vector<NodeDynamics> dynamics)
    : topology_(std::move(topology)),
      labels_(std::move(labels)),
      coupling_(std::move(coupling)),
      dynamics_(std::move(dynamics)) {
  const std::size_t n = topology_.node_count();
  if (n == 0) throw ConfigError("model has no nodes");
  if (labels_.size() != n || dynamics_.size() != n) {
    throw ConfigError("model labels/dynamics do not match the node count");
  }
  if (!is_forest(topology_)) throw ConfigError("model topology must be a tree (or forest)");
  for (const auto& [pair, b] : coupling_) {
    const auto [i, j] = pair;
    if (i >= n || j >= n || !topology_.has_edge(i, j)) {
      throw ConfigError("coupling given for non-edge " + std::to_string(i) + "," + std::to_string(j));
    }
    if (b == 0.0 || !std::isfinite(b)) throw ConfigError("coupling coefficients must be finite and nonzero");
  }
  for (const Edge& e : topology_.edges()) {
    if (!coupling_.contains({e.a, e.b}) || !coupling_.contains({e.b, e.a})) {
      throw ConfigError("edge " + labels_[e.a] + "-" + labels_[e.b] + " needs couplings in both directions");
    }
  }
  for (const NodeDynamics& d : dynamics_) {
    if (d.ar.empty()) throw ConfigError("self dynamics need order >= 1");
    if (!(d.noise_variance > 0.0) || !std::isfinite(d.noise_variance)) {
      throw ConfigError("noise variances must be positive");
    }
    for (double a : d.ar) {
      if (!std::isfinite(a)) throw ConfigError("non-finite self dynamics coefficient");
    }
  }
}

double GenerativeModel::coupling(NodeId i, NodeId j) const {
  auto it = coupling_.find({i, j});
  return it == coupling_.end() ? 0.0 : it->second;
}

Complex GenerativeModel::transfer(NodeId i, NodeId j, double omega) const {
  const double b = coupling(i, j);
  if (b == 0.0) return 0.0;
  return b / dynamics_[i].characteristic(omega);
}

double GenerativeModel::innovation_psd(NodeId i, double omega) const {
  return dynamics_[i].noise_variance / std::norm(dynamics_[i].characteristic(omega));
}

Eigen::MatrixXd GenerativeModel::state_matrix() const {
  const auto n = static_cast<Eigen::Index>(node_count());
  std::size_t depth = 1;
  for (const auto& d : dynamics_) depth = std::max(depth, d.order());
  const auto dd = static_cast<Eigen::Index>(depth);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * dd, n * dd);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& dyn = dynamics_[static_cast<std::size_t>(i)];
    for (std::size_t k = 1; k <= dyn.order(); ++k) {
      a(i, static_cast<Eigen::Index>(k - 1) * n + i) += dyn.ar[k - 1];
    }
    const auto lag_block = static_cast<Eigen::Index>(dyn.order() - 1) * n;
    for (NodeId j : topology_.neighbors(static_cast<NodeId>(i))) {
      a(i, lag_block + static_cast<Eigen::Index>(j)) += coupling(static_cast<NodeId>(i), j);
    }
  }
  for (Eigen::Index r = 1; r < dd; ++r) {
    a.block(r * n, (r - 1) * n, n, n).setIdentity();
  }
  return a;
}

double GenerativeModel::spectral_radius() const {
  const Eigen::MatrixXd a = state_matrix();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed for state matrix");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void GenerativeModel::require_stable(double margin) const {
  const double rho = spectral_radius();
  if (!(1.0 - rho >= margin)) {
    std::ostringstream msg;
    msg << "model is not stable: spectral radius " << rho << " leaves margin below " << margin;
    throw NumericalError(msg.str());
  }
}

GenerativeModel GenerativeModel::permuted(std::span<const NodeId> perm) const {
  const std::size_t n = node_count();
  if (perm.size() != n) throw std::invalid_argument("permutation size mismatch");
  std::vector<NodeId> inverse(n, n);
  for (std::size_t i = 0; i < n; ++i) inverse.at(perm[i]) = i;
  UndirectedGraph topo(n);
  for (const Edge& e : topology_.edges()) topo.add_edge(inverse[e.a], inverse[e.b]);
  std::vector<std::string> labels(n);
  std::vector<NodeDynamics> dyn(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = labels_[perm[i]];
    dyn[i] = dynamics_[perm[i]];
  }
  Coupling c;
  for (const auto& [pair, b] : coupling_) c[{inverse[pair.first], inverse[pair.second]}] = b;
  return GenerativeModel(std::move(topo), std::move(labels), std::move(c), std::move(dyn));
}

TimeSeriesPanel::TimeSeriesPanel(std::vector<std::string> labels, std::size_t length, double dt)
    : labels_(std::move(labels)), length_(length), dt_(dt), data_(labels_.size() * length, 0.0) {}

std::span<double> TimeSeriesPanel::channel(std::size_t i) {
  if (i >= labels_.size()) throw std::out_of_range("channel index out of range");
  return {data_.data() + i * length_, length_};
}

std::span<const double> TimeSeriesPanel::channel(std::size_t i) const {
  if (i >= labels_.size()) throw std::out_of_range("channel index out of range");
  return {data_.data() + i * length_, length_};
}

void TimeSeriesPanel::copy_rows(std::size_t begin, std::size_t rows, std::span<double> out) const {
  const std::size_t n = channel_count();
  if (begin + rows > length_ || out.size() < rows * n) throw std::out_of_range("copy_rows out of range");
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < n; ++i) out[t * n + i] = data_[i * length_ + begin + t];
  }
}

void TimeSeriesPanel::validate() const {
  if (labels_.size() < 2) throw DataError("panel needs at least two channels");
  if (length_ < 1) throw DataError("panel is empty");
  if (!(dt_ > 0.0)) throw DataError("sample interval must be positive");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DataError("panel contains non-finite samples");
  }
}

Simulator::Simulator(const GenerativeModel& model, std::uint64_t seed, std::size_t burn_in)
    : n_(model.node_count()), depth_(1) {
  model.require_stable();
  for (const auto& d : model.dynamics()) depth_ = std::max(depth_, d.order());
  ar_.assign(n_ * depth_, 0.0);
  order_.resize(n_);
  inputs_.resize(n_);
  sigma_.resize(n_);
  engines_.reserve(n_);
  for (NodeId i = 0; i < n_; ++i) {
    const auto& d = model.dynamics(i);
    order_[i] = d.order();
    std::copy(d.ar.begin(), d.ar.end(), ar_.begin() + static_cast<std::ptrdiff_t>(i * depth_));
    for (NodeId j : model.topology().neighbors(i)) inputs_[i].emplace_back(j, model.coupling(i, j));
    sigma_[i] = std::sqrt(d.noise_variance);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), 0x51u};
    engines_.emplace_back(seq);
  }
  history_.assign(n_ * depth_, 0.0);
  std::vector<double> row(n_);
  for (std::size_t t = 0; t < burn_in; ++t) step(row.data());
}

void Simulator::step(double* row) {
  // Slot of x[t-k] is (head_ + depth_ - (k - 1)) % depth_.
  auto lagged = [&](std::size_t k, NodeId j) {
    return history_[((head_ + depth_ - (k - 1)) % depth_) * n_ + j];
  };
  for (NodeId i = 0; i < n_; ++i) {
    double v = 0.0;
    const double* a = ar_.data() + i * depth_;
    for (std::size_t k = 1; k <= order_[i]; ++k) v += a[k - 1] * lagged(k, i);
    for (const auto& [j, b] : inputs_[i]) v += b * lagged(order_[i], j);
    v += sigma_[i] * normal_(engines_[i]);
    row[i] = v;
  }
  head_ = (head_ + 1) % depth_;
  std::copy(row, row + n_, history_.begin() + static_cast<std::ptrdiff_t>(head_ * n_));
}

void Simulator::generate(std::span<double> out) {
  if (out.size() % n_ != 0) throw std::invalid_argument("generate: buffer is not a whole number of rows");
  const std::size_t rows = out.size() / n_;
  for (std::size_t t = 0; t < rows; ++t) {
    double* row = out.data() + t * n_;
    step(row);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!std::isfinite(row[i])) throw NumericalError("simulation produced non-finite samples");
    }
  }
}

TimeSeriesPanel simulate(const GenerativeModel& model, std::size_t length, std::uint64_t seed,
                         std::size_t burn_in) {
  if (length < 1) throw ConfigError("trajectory length must be at least 1");
  Simulator sim(model, seed, burn_in);
  const std::size_t n = model.node_count();
  TimeSeriesPanel panel(model.labels(), length);
  constexpr std::size_t kBlock = 4096;
  std::vector<double> buf(kBlock * n);
  for (std::size_t t0 = 0; t0 < length; t0 += kBlock) {
    const std::size_t rows = std::min(kBlock, length - t0);
    sim.generate(std::span<double>(buf.data(), rows * n));
    for (std::size_t t = 0; t < rows; ++t) {
      for (std::size_t i = 0; i < n; ++i) panel(i, t0 + t) = buf[t * n + i];
    }
  }
  return panel;
}

Eigen::MatrixXcd analytic_psd_at(const GenerativeModel& model, double omega) {
  const auto n = static_cast<Eigen::Index>(model.node_count());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXd innov(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<NodeId>(i);
    innov(i) = model.innovation_psd(ii, omega);
    for (NodeId j : model.topology().neighbors(ii)) m(i, static_cast<Eigen::Index>(j)) -= model.transfer(ii, j, omega);
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  if (!(lu.rcond() > 1e-13)) {
    std::ostringstream msg;
    msg << "I - G is singular at omega = " << omega;
    throw NumericalError(msg.str());
  }
  const Eigen::MatrixXcd inv = lu.inverse();
  Eigen::MatrixXcd p = inv * innov.cast<Complex>().asDiagonal() * inv.adjoint();
  return 0.5 * (p + p.adjoint());
}

SpectralMatrix analytic_psd(const GenerativeModel& model, const FrequencyGrid& grid) {
  SpectralMatrix out(grid, model.labels());
  for (std::size_t k = 0; k < grid.size(); ++k) out.at(k) = analytic_psd_at(model, grid[k]);
  return out;
}

Complex analytic_inverse_psd_entry(const GenerativeModel& model, NodeId i, NodeId j, double omega) {
  const UndirectedGraph& g = model.topology();
  // 1 / Phi_e_k = |S_k|^2 / sigma_k^2
  auto inv_innov = [&](NodeId k) { return 1.0 / model.innovation_psd(k, omega); };
  if (i == j) {
    Complex v = inv_innov(i);
    for (NodeId k : g.neighbors(i)) v += std::norm(model.transfer(k, i, omega)) * inv_innov(k);
    return v;
  }
  if (g.has_edge(i, j)) {
    return -model.transfer(i, j, omega) * inv_innov(i) - std::conj(model.transfer(j, i, omega)) * inv_innov(j);
  }
  const NodeSet& ni = g.neighbors(i);
  for (NodeId k : g.neighbors(j)) {
    if (ni.contains(k)) {
      // Unique in a forest.
      return std::conj(model.transfer(k, i, omega)) * model.transfer(k, j, omega) * inv_innov(k);
    }
  }
  return 0.0;
}

SpectralMatrix analytic_inverse_psd(const GenerativeModel& model, const FrequencyGrid& grid) {
  const std::size_t n = model.node_count();
  const UndirectedGraph moral = moral_graph(model.topology());
  SpectralMatrix out(grid, model.labels());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto& m = out.at(k);
    for (NodeId i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m(ii, ii) = analytic_inverse_psd_entry(model, i, i, grid[k]);
      for (NodeId j : moral.neighbors(i)) {
        if (j < i) continue;
        const Complex v = analytic_inverse_psd_entry(model, i, j, grid[k]);
        m(ii, static_cast<Eigen::Index>(j)) = v;
        m(static_cast<Eigen::Index>(j), ii) = std::conj(v);
      }
    }
  }
  return out;
}

}  // namespace topolearn
