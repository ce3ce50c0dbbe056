#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "topolearn/model.hpp"
#include "topolearn/spectrum.hpp"

namespace topolearn {

enum class Window { Hann, Hamming, Rectangular };

struct WelchParams {
  std::size_t segment_length = 1024;  // power of two
  double overlap_fraction = 0.5;      // in [0, 1)
  Window window = Window::Hann;

  std::size_t step() const;
  std::size_t segments_for(std::size_t length) const;
  /// Throws ConfigError on bad parameters.
  void validate() const;
  /// Additionally requires at least 8 segments from `length` samples (DataError otherwise).
  void validate_for(std::size_t length) const;
};

std::vector<double> make_window(Window window, std::size_t length);

/// Streaming Welch cross-spectral estimator.
///
/// Samples arrive as time-major rows (one value per channel per time step).
/// The estimate is (1 / (K sum w^2)) sum_segments X(w) X(w)^H on the DFT grid
/// of the segment, so that white noise of variance s^2 gives a flat s^2.
class WelchAccumulator {
 public:
  WelchAccumulator(std::vector<std::string> labels, WelchParams params);
  ~WelchAccumulator();
  WelchAccumulator(WelchAccumulator&&) noexcept;
  WelchAccumulator& operator=(WelchAccumulator&&) noexcept;
  WelchAccumulator(const WelchAccumulator&) = delete;
  WelchAccumulator& operator=(const WelchAccumulator&) = delete;

  void push(std::span<const double> rows);

  std::size_t channel_count() const;
  std::size_t segments() const;
  std::size_t samples() const;

  /// Throws DataError when fewer than 8 segments were accumulated.
  SpectralMatrix finish() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpectralMatrix estimate_cpsd(const TimeSeriesPanel& panel, const WelchParams& params);

}  // namespace topolearn
