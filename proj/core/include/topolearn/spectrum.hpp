#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace topolearn {

using Complex = std::complex<double>;

/// Strictly increasing angular frequencies in (-pi, pi].
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  /// Validates ordering, range and size (at least 8 points). `symmetric` is derived.
  explicit FrequencyGrid(std::vector<double> omegas);

  /// DFT bin frequencies 2*pi*k/M for k = -M/2+1 .. M/2 (M even).
  static FrequencyGrid dft(std::size_t segment_length);

  std::size_t size() const { return omegas_.size(); }
  double operator[](std::size_t k) const { return omegas_[k]; }
  const std::vector<double>& omegas() const { return omegas_; }

  /// Closed under negation, except for the endpoint pi.
  bool symmetric() const { return symmetric_; }

  /// Smallest spacing between neighbouring frequencies.
  double bin_width() const { return bin_width_; }

  /// Index of -omega[k] if present, otherwise size().
  std::size_t mirror_index(std::size_t k) const;

  /// True for frequencies more than `bins` bin widths away from 0 and from +-pi.
  bool outside_band_edges(std::size_t k, std::size_t bins) const;

  bool operator==(const FrequencyGrid& other) const { return omegas_ == other.omegas_; }

 private:
  std::vector<double> omegas_;
  bool symmetric_ = false;
  double bin_width_ = 0.0;
};

/// Per-frequency N x N complex matrices over a FrequencyGrid.
///
/// Frequencies can be flagged as excluded (singular inversion, vanishing
/// corruption transfer function, ...). Downstream scoring skips them.
class SpectralMatrix {
 public:
  SpectralMatrix() = default;
  SpectralMatrix(FrequencyGrid grid, std::vector<std::string> labels);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t node_count() const { return labels_.size(); }
  std::size_t size() const { return values_.size(); }

  Eigen::MatrixXcd& at(std::size_t k) { return values_[k]; }
  const Eigen::MatrixXcd& at(std::size_t k) const { return values_[k]; }

  /// Entry (i, j) across the grid.
  std::vector<Complex> entry(std::size_t i, std::size_t j) const;

  bool excluded(std::size_t k) const { return excluded_[k]; }
  void exclude(std::size_t k) { excluded_[k] = true; }
  std::vector<std::size_t> excluded_indices() const;

  /// Largest relative Hermitian defect max_k ||M - M^H|| / ||M|| (Frobenius).
  double hermitian_defect() const;

 private:
  FrequencyGrid grid_;
  std::vector<std::string> labels_;
  std::vector<Eigen::MatrixXcd> values_;
  std::vector<bool> excluded_;
};

/// Relative Frobenius distance ||A - B|| / ||B||, maximised over non-excluded frequencies.
double max_relative_error(const SpectralMatrix& a, const SpectralMatrix& b);

}  // namespace topolearn
