#include "topolearn/welch.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "topolearn/error.hpp"
#include "fftw_lock.hpp"

namespace topolearn {

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

std::size_t WelchParams::step() const {
  const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(segment_length)));
  return std::max<std::size_t>(1, segment_length - overlap);
}

std::size_t WelchParams::segments_for(std::size_t length) const {
  if (length < segment_length) return 0;
  return (length - segment_length) / step() + 1;
}

void WelchParams::validate() const {
  if (segment_length < 8 || !is_power_of_two(segment_length)) {
    throw ConfigError("Welch segment length must be a power of two >= 8");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("Welch overlap fraction must lie in [0, 1)");
  }
}

void WelchParams::validate_for(std::size_t length) const {
  validate();
  if (length < segment_length) throw DataError("series shorter than one Welch segment");
  if (segments_for(length) < 8) throw DataError("series too short: fewer than 8 Welch segments");
}

std::vector<double> make_window(Window window, std::size_t length) {
  std::vector<double> w(length, 1.0);
  const double n = static_cast<double>(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / n;
    switch (window) {
      case Window::Hann: w[t] = 0.5 - 0.5 * std::cos(phase); break;
      case Window::Hamming: w[t] = 0.54 - 0.46 * std::cos(phase); break;
      case Window::Rectangular: break;
    }
  }
  return w;
}

struct WelchAccumulator::Impl {
  std::vector<std::string> labels;
  WelchParams params;
  std::size_t n = 0;
  std::size_t bins = 0;
  std::vector<double> window;
  double window_power = 0.0;

  std::vector<double> buffer;  // time-major
  std::size_t offset = 0;      // first unconsumed row in buffer
  std::size_t segments = 0;
  std::size_t samples = 0;

  double* fft_in = nullptr;
  fftw_complex* fft_out = nullptr;
  fftw_plan plan = nullptr;
  std::vector<Complex> spectra;  // n x bins for the current segment
  std::vector<Complex> acc;      // bins x n x n, upper triangle used

  Impl(std::vector<std::string> l, WelchParams p) : labels(std::move(l)), params(p) {
    params.validate();
    n = labels.size();
    if (n == 0) throw DataError("Welch estimator needs at least one channel");
    const std::size_t m = params.segment_length;
    bins = m / 2 + 1;
    window = make_window(params.window, m);
    for (double w : window) window_power += w * w;
    spectra.assign(n * bins, Complex{});
    acc.assign(bins * n * n, Complex{});
    std::lock_guard lock(detail::fftw_planner_mutex());
    fft_in = fftw_alloc_real(m);
    fft_out = fftw_alloc_complex(bins);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), fft_in, fft_out, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(fft_in);
    fftw_free(fft_out);
  }

  void process_segment(const double* rows) {
    const std::size_t m = params.segment_length;
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t t = 0; t < m; ++t) fft_in[t] = window[t] * rows[t * n + c];
      fftw_execute(plan);
      Complex* dst = spectra.data() + c * bins;
      for (std::size_t f = 0; f < bins; ++f) dst[f] = Complex(fft_out[f][0], fft_out[f][1]);
    }
    for (std::size_t f = 0; f < bins; ++f) {
      Complex* a = acc.data() + f * n * n;
      for (std::size_t i = 0; i < n; ++i) {
        const Complex xi = spectra[i * bins + f];
        for (std::size_t j = i; j < n; ++j) a[i * n + j] += xi * std::conj(spectra[j * bins + f]);
      }
    }
    ++segments;
  }

  void push(std::span<const double> rows) {
    if (rows.size() % n != 0) throw DataError("Welch input is not a whole number of rows");
    for (double v : rows) {
      if (!std::isfinite(v)) throw DataError("non-finite sample in spectral estimation input");
    }
    samples += rows.size() / n;
    buffer.insert(buffer.end(), rows.begin(), rows.end());
    const std::size_t m = params.segment_length;
    const std::size_t step = params.step();
    while ((buffer.size() / n) - offset >= m) {
      process_segment(buffer.data() + offset * n);
      offset += step;
    }
    // Compact once the consumed prefix dominates.
    const std::size_t drop = std::min(offset, buffer.size() / n);
    if (drop > 0 && drop * n * 2 >= buffer.size()) {
      buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(drop * n));
      offset -= drop;
    }
  }
};

WelchAccumulator::WelchAccumulator(std::vector<std::string> labels, WelchParams params)
    : impl_(std::make_unique<Impl>(std::move(labels), params)) {}
WelchAccumulator::~WelchAccumulator() = default;
WelchAccumulator::WelchAccumulator(WelchAccumulator&&) noexcept = default;
WelchAccumulator& WelchAccumulator::operator=(WelchAccumulator&&) noexcept = default;

void WelchAccumulator::push(std::span<const double> rows) { impl_->push(rows); }
std::size_t WelchAccumulator::channel_count() const { return impl_->n; }
std::size_t WelchAccumulator::segments() const { return impl_->segments; }
std::size_t WelchAccumulator::samples() const { return impl_->samples; }

SpectralMatrix WelchAccumulator::finish() const {
  const Impl& s = *impl_;
  if (s.segments < 8) throw DataError("too few samples for spectral estimation: fewer than 8 Welch segments");
  const std::size_t m = s.params.segment_length;
  const std::size_t n = s.n;
  SpectralMatrix out(FrequencyGrid::dft(m), s.labels);
  const double scale = 1.0 / (static_cast<double>(s.segments) * s.window_power);
  const auto half = static_cast<long>(m / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const long bin = static_cast<long>(k) - half + 1;  // grid index -> signed DFT bin
    const auto f = static_cast<std::size_t>(std::labs(bin));
    const Complex* a = s.acc.data() + f * n * n;
    auto& mat = out.at(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        Complex v = a[i * n + j] * scale;
        if (bin < 0) v = std::conj(v);
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        if (i == j) {
          mat(ii, ii) = Complex(v.real(), 0.0);
        } else {
          mat(ii, jj) = v;
          mat(jj, ii) = std::conj(v);
        }
      }
    }
  }
  return out;
}

SpectralMatrix estimate_cpsd(const TimeSeriesPanel& panel, const WelchParams& params) {
  params.validate_for(panel.length());
  WelchAccumulator acc(panel.labels(), params);
  const std::size_t n = panel.channel_count();
  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> rows(kBlock * n);
  for (std::size_t t0 = 0; t0 < panel.length(); t0 += kBlock) {
    const std::size_t count = std::min(kBlock, panel.length() - t0);
    panel.copy_rows(t0, count, rows);
    acc.push(std::span<const double>(rows.data(), count * n));
  }
  return acc.finish();
}

}  // namespace topolearn
