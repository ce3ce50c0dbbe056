#include "topolearn/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace topolearn {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.size() < 8) throw std::invalid_argument("frequency grid needs at least 8 points");
  const double tol = 1e-12;
  for (std::size_t k = 0; k < omegas_.size(); ++k) {
    const double w = omegas_[k];
    if (!std::isfinite(w) || w <= -kPi + tol || w > kPi + tol) {
      throw std::invalid_argument("frequency outside (-pi, pi]");
    }
    if (k > 0 && !(w > omegas_[k - 1])) {
      throw std::invalid_argument("frequency grid must be strictly increasing");
    }
  }
  bin_width_ = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < omegas_.size(); ++k) {
    bin_width_ = std::min(bin_width_, omegas_[k] - omegas_[k - 1]);
  }
  symmetric_ = true;
  for (std::size_t k = 0; k < omegas_.size() && symmetric_; ++k) {
    if (std::abs(std::abs(omegas_[k]) - kPi) < tol) continue;
    symmetric_ = mirror_index(k) != omegas_.size();
  }
}

FrequencyGrid FrequencyGrid::dft(std::size_t segment_length) {
  if (segment_length < 8 || segment_length % 2 != 0) {
    throw std::invalid_argument("DFT grid needs an even segment length of at least 8");
  }
  const auto m = static_cast<long>(segment_length);
  std::vector<double> w;
  w.reserve(segment_length);
  for (long k = -m / 2 + 1; k <= m / 2; ++k) w.push_back(2.0 * kPi * static_cast<double>(k) / static_cast<double>(m));
  return FrequencyGrid(std::move(w));
}

std::size_t FrequencyGrid::mirror_index(std::size_t k) const {
  const double target = -omegas_.at(k);
  auto it = std::lower_bound(omegas_.begin(), omegas_.end(), target - 1e-12);
  if (it != omegas_.end() && std::abs(*it - target) <= 1e-12) {
    return static_cast<std::size_t>(it - omegas_.begin());
  }
  return omegas_.size();
}

bool FrequencyGrid::outside_band_edges(std::size_t k, std::size_t bins) const {
  const double margin = (static_cast<double>(bins) + 0.5) * bin_width_;
  const double w = std::abs(omegas_.at(k));
  return w > margin && kPi - w > margin;
}

SpectralMatrix::SpectralMatrix(FrequencyGrid grid, std::vector<std::string> labels)
    : grid_(std::move(grid)),
      labels_(std::move(labels)),
      values_(grid_.size(), Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(labels_.size()),
                                                   static_cast<Eigen::Index>(labels_.size()))),
      excluded_(grid_.size(), false) {}

std::vector<Complex> SpectralMatrix::entry(std::size_t i, std::size_t j) const {
  std::vector<Complex> out;
  out.reserve(values_.size());
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  for (const auto& m : values_) out.push_back(m(ii, jj));
  return out;
}

std::vector<std::size_t> SpectralMatrix::excluded_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < excluded_.size(); ++k) {
    if (excluded_[k]) out.push_back(k);
  }
  return out;
}

double SpectralMatrix::hermitian_defect() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (excluded_[k]) continue;
    const double scale = values_[k].norm();
    if (scale == 0.0) continue;
    worst = std::max(worst, (values_[k] - values_[k].adjoint()).norm() / scale);
  }
  return worst;
}

double max_relative_error(const SpectralMatrix& a, const SpectralMatrix& b) {
  if (a.size() != b.size() || a.node_count() != b.node_count()) {
    throw std::invalid_argument("max_relative_error: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.excluded(k) || b.excluded(k)) continue;
    const double scale = b.at(k).norm();
    const double diff = (a.at(k) - b.at(k)).norm();
    worst = std::max(worst, scale > 0.0 ? diff / scale : diff);
  }
  return worst;
}

}  // namespace topolearn
