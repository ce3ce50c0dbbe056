#include "topolearn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "topolearn/error.hpp"

namespace topolearn {

double default_ridge(const SpectralMatrix& s) {
  std::vector<double> diag;
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (Eigen::Index i = 0; i < s.at(k).rows(); ++i) diag.push_back(std::abs(s.at(k)(i, i)));
  }
  if (diag.empty()) return 0.0;
  auto mid = diag.begin() + static_cast<std::ptrdiff_t>(diag.size() / 2);
  std::nth_element(diag.begin(), mid, diag.end());
  return 1e-10 * *mid;
}

SpectralMatrix invert_spectrum(const SpectralMatrix& s, double ridge, double max_condition) {
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  SpectralMatrix out(s.grid(), s.labels());
  const auto n = static_cast<Eigen::Index>(s.node_count());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Eigen::MatrixXcd& m = s.at(k);
    const double norm = m.norm();
    if (norm > 0.0 && (m - m.adjoint()).norm() > 1e-6 * norm) {
      std::ostringstream msg;
      msg << "matrix is not Hermitian at omega = " << s.grid()[k];
      throw NumericalError(msg.str());
    }
    if (s.excluded(k)) {
      out.at(k).setZero();
      out.exclude(k);
      continue;
    }
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    h.diagonal().array() += ridge;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    if (eig.info() != Eigen::Success || n == 0 || !(lambda(0) > 0.0) || lambda(n - 1) / lambda(0) > max_condition) {
      out.at(k).setZero();
      out.exclude(k);
      continue;
    }
    const Eigen::MatrixXcd& v = eig.eigenvectors();
    Eigen::MatrixXcd inv = v * lambda.cwiseInverse().cast<Complex>().asDiagonal() * v.adjoint();
    out.at(k) = 0.5 * (inv + inv.adjoint());
  }
  return out;
}

SpectralMatrix analytic_corrupted_psd(const GenerativeModel& model, const SignatureMap& signatures,
                                      const FrequencyGrid& grid) {
  SpectralMatrix out = analytic_psd(model, grid);
  for (const auto& [node, sig] : signatures) {
    if (node >= model.node_count()) throw ConfigError("signature for a node outside the model");
    if (sig.size() != grid.size()) throw ConfigError("signature length differs from the frequency grid");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Eigen::MatrixXcd& m = out.at(k);
    for (const auto& [node, sig] : signatures) {
      const auto v = static_cast<Eigen::Index>(node);
      m.row(v) *= sig.h[k];
      m.col(v) *= std::conj(sig.h[k]);
      m(v, v) += sig.d[k];
    }
  }
  return out;
}

WoodburyChain woodbury_chain_inverse(const GenerativeModel& model, const SignatureMap& signatures,
                                     const FrequencyGrid& grid, std::span<const NodeId> order) {
  WoodburyChain chain;
  if (order.empty()) {
    for (const auto& [node, sig] : signatures) chain.order.push_back(node);
  } else {
    chain.order.assign(order.begin(), order.end());
    std::vector<NodeId> sorted = chain.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<NodeId> keys;
    for (const auto& [node, sig] : signatures) keys.push_back(node);
    if (sorted != keys) throw ConfigError("update order must list every corrupt node exactly once");
  }
  for (const auto& [node, sig] : signatures) {
    if (node >= model.node_count()) throw ConfigError("signature for a node outside the model");
    if (sig.size() != grid.size()) throw ConfigError("signature length differs from the frequency grid");
  }

  SpectralMatrix psi = analytic_inverse_psd(model, grid);
  const auto n = static_cast<Eigen::Index>(model.node_count());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Ones(n);
    for (const auto& [node, sig] : signatures) h(static_cast<Eigen::Index>(node)) = sig.h[k];
    if ((h.array().abs() < 1e-12).any()) {
      psi.at(k).setZero();
      psi.exclude(k);
      continue;
    }
    const Eigen::VectorXcd inv_h = h.cwiseInverse();
    psi.at(k) = inv_h.conjugate().asDiagonal() * psi.at(k) * inv_h.asDiagonal();
  }
  chain.steps.push_back(psi);

  for (std::size_t step = 0; step < chain.order.size(); ++step) {
    const NodeId node = chain.order[step];
    const CorruptionSignature& sig = signatures.at(node);
    const auto v = static_cast<Eigen::Index>(node);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (psi.excluded(k) || sig.d[k] == 0.0) continue;
      Eigen::MatrixXcd& m = psi.at(k);
      const Complex delta = 1.0 / sig.d[k] + m(v, v);
      if (std::abs(delta) < 1e-300 || !std::isfinite(std::abs(delta))) {
        std::ostringstream msg;
        msg << "rank-one update denominator vanishes at omega = " << grid[k] << " (step " << step + 1 << ", node "
            << model.labels()[node] << ")";
        throw NumericalError(msg.str());
      }
      const Eigen::VectorXcd col = m.col(v);
      const Eigen::RowVectorXcd row = m.row(v);
      m.noalias() -= (col * row) / delta;
    }
    chain.steps.push_back(psi);
  }
  chain.inverse = std::move(psi);
  return chain;
}

SpectralMatrix principal_submatrix(const SpectralMatrix& s, std::span<const NodeId> nodes) {
  std::vector<std::string> labels;
  for (NodeId i : nodes) {
    if (i >= s.node_count()) throw ConfigError("submatrix node out of range");
    labels.push_back(s.labels()[i]);
  }
  SpectralMatrix out(s.grid(), labels);
  const auto m = static_cast<Eigen::Index>(nodes.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    Eigen::MatrixXcd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        sub(a, b) = s.at(k)(static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(a)]),
                            static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(b)]));
      }
    }
    out.at(k) = std::move(sub);
    if (s.excluded(k)) out.exclude(k);
  }
  return out;
}

SpectralMatrix marginal_inverse_psd(const SpectralMatrix& psd, std::span<const NodeId> observed, double ridge) {
  if (observed.size() < 2) throw ConfigError("marginalisation needs at least two observed nodes");
  return invert_spectrum(principal_submatrix(psd, observed), ridge);
}

}  // namespace topolearn
