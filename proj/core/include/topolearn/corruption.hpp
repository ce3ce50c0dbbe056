#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "topolearn/graph.hpp"
#include "topolearn/model.hpp"
#include "topolearn/spectrum.hpp"
#include "topolearn/welch.hpp"

namespace topolearn {

enum class CorruptionKind { None, RandomDelay, PacketDrop, NoisyFilter };

std::string to_string(CorruptionKind kind);
CorruptionKind corruption_kind_from_string(const std::string& name);

/// u[t] = x[t + first] with probability p, x[t + second] otherwise.
struct RandomDelay {
  long first = 0;
  long second = 0;
  double p = 1.0;
};

/// u[t] = x[t] with probability p (sample received), u[t-1] otherwise.
struct PacketDrop {
  double p = 1.0;
};

/// u[t] = sum_k taps[k] x[t-k] + v[t], v white Gaussian of the given variance.
struct NoisyFilter {
  std::vector<double> taps{1.0};
  double noise_variance = 0.0;
};

struct CorruptionSpec {
  NodeId node = 0;
  std::variant<std::monostate, RandomDelay, PacketDrop, NoisyFilter> model;

  CorruptionKind kind() const;
  /// Samples of x ahead of t the corruption may read.
  std::size_t lookahead() const;
  /// Samples of x behind t the corruption may read.
  std::size_t lookback() const;
  /// Throws ConfigError on invalid parameters.
  void validate() const;
};

/// Throws ConfigError on invalid or duplicate specs or an out-of-range node.
void validate_specs(std::span<const CorruptionSpec> specs, std::size_t channel_count);

/// Multiplicative response h and additive spectrum d of one corruption over a grid.
struct CorruptionSignature {
  std::vector<Complex> h;
  std::vector<double> d;

  static CorruptionSignature identity(std::size_t size);
  std::size_t size() const { return h.size(); }
};

using SignatureMap = std::map<NodeId, CorruptionSignature>;

/// Streaming corruption of time-major rows.
///
/// Output lags input by the largest lookahead among the specs; `finish` flushes
/// the remaining rows, clamping reads past the end to the last sample. Random
/// draws happen per output sample on a per-node engine, so the result does not
/// depend on how the input is chunked.
class StreamCorruptor {
 public:
  StreamCorruptor(std::size_t channel_count, std::vector<CorruptionSpec> specs, std::uint64_t seed);

  /// Consumes whole rows and appends every row that became final to `out`.
  void push(std::span<const double> rows, std::vector<double>& out);
  void finish(std::vector<double>& out);

  std::size_t channel_count() const { return n_; }

 private:
  struct Channel {
    CorruptionSpec spec;
    std::mt19937_64 engine;
    double held = 0.0;  // last delivered sample for packet drop
  };

  double history(std::size_t channel, long t) const;
  void emit(std::size_t t, std::size_t last_valid, std::vector<double>& out);

  std::size_t n_;
  std::size_t lookahead_ = 0;
  std::size_t window_ = 1;
  std::vector<double> ring_;  // window_ rows
  std::size_t received_ = 0;
  std::size_t emitted_ = 0;
  std::vector<long> channel_slot_;  // channel -> index into channels_, -1 if clean
  std::vector<Channel> channels_;
  bool finished_ = false;
};

TimeSeriesPanel apply_corruption(const TimeSeriesPanel& panel, std::span<const CorruptionSpec> specs,
                                 std::uint64_t seed);

/// Signature from a two-channel spectrum with the clean series first and the corrupted second.
CorruptionSignature signature_from_pair_spectrum(const SpectralMatrix& pair, double floor = 1e-12);

/// h = Phi_ux / Phi_xx and d = Phi_uu - |h|^2 Phi_xx (floored at zero) from Welch estimates.
/// Throws NumericalError when Phi_xx drops below `floor` at some frequency.
CorruptionSignature estimate_signature(std::span<const double> clean, std::span<const double> corrupted,
                                       const WelchParams& params, double floor = 1e-12);

/// Exact signature of `spec` acting on node spec.node of `model`.
CorruptionSignature analytic_signature(const GenerativeModel& model, const CorruptionSpec& spec,
                                       const FrequencyGrid& grid);

SignatureMap analytic_signatures(const GenerativeModel& model, std::span<const CorruptionSpec> specs,
                                 const FrequencyGrid& grid);

/// Autocovariance R(0..max_lag) of node `node` from its analytic spectrum.
std::vector<double> analytic_autocovariance(const GenerativeModel& model, NodeId node, std::size_t max_lag);

/// CSV with columns omega, re_h, im_h, d.
void write_signature_csv(std::ostream& os, const FrequencyGrid& grid, const CorruptionSignature& sig);

}  // namespace topolearn
