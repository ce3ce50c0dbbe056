#include "topolearn/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <fftw3.h>

#include "fftw_lock.hpp"
#include "topolearn/error.hpp"

namespace topolearn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double node_psd(const GenerativeModel& model, NodeId node, double omega) {
  const auto n = static_cast<Eigen::Index>(model.node_count());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<NodeId>(i);
    for (NodeId j : model.topology().neighbors(ii)) m(i, static_cast<Eigen::Index>(j)) -= model.transfer(ii, j, omega);
  }
  // Row `node` of (I - G)^-1 solves (I - G)^T a = e_node.
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e(static_cast<Eigen::Index>(node)) = 1.0;
  const Eigen::VectorXcd a = m.transpose().partialPivLu().solve(e);
  double v = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) v += std::norm(a(k)) * model.innovation_psd(static_cast<NodeId>(k), omega);
  return v;
}

std::size_t next_power_of_two(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

std::uint64_t mix_seed(std::uint64_t seed, NodeId node) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(node), 0xC0u};
  std::uint64_t out = 0;
  std::uint32_t parts[2];
  seq.generate(parts, parts + 2);
  out = (static_cast<std::uint64_t>(parts[0]) << 32) | parts[1];
  return out;
}

}  // namespace

std::string to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::None: return "none";
    case CorruptionKind::RandomDelay: return "random_delay";
    case CorruptionKind::PacketDrop: return "packet_drop";
    case CorruptionKind::NoisyFilter: return "noisy_filter";
  }
  return "none";
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
  if (name == "none") return CorruptionKind::None;
  if (name == "random_delay") return CorruptionKind::RandomDelay;
  if (name == "packet_drop") return CorruptionKind::PacketDrop;
  if (name == "noisy_filter") return CorruptionKind::NoisyFilter;
  throw ConfigError("unknown corruption kind '" + name + "'");
}

CorruptionKind CorruptionSpec::kind() const {
  return std::visit(Overloaded{
                        [](std::monostate) { return CorruptionKind::None; },
                        [](const RandomDelay&) { return CorruptionKind::RandomDelay; },
                        [](const PacketDrop&) { return CorruptionKind::PacketDrop; },
                        [](const NoisyFilter&) { return CorruptionKind::NoisyFilter; },
                    },
                    model);
}

std::size_t CorruptionSpec::lookahead() const {
  if (const auto* d = std::get_if<RandomDelay>(&model)) {
    return static_cast<std::size_t>(std::max({0L, d->first, d->second}));
  }
  return 0;
}

std::size_t CorruptionSpec::lookback() const {
  if (const auto* d = std::get_if<RandomDelay>(&model)) {
    return static_cast<std::size_t>(-std::min({0L, d->first, d->second}));
  }
  if (const auto* f = std::get_if<NoisyFilter>(&model)) return f->taps.empty() ? 0 : f->taps.size() - 1;
  return 0;
}

void CorruptionSpec::validate() const {
  auto probability_ok = [](double p) { return p > 0.0 && p <= 1.0; };
  std::visit(Overloaded{
                 [](std::monostate) {},
                 [&](const RandomDelay& d) {
                   if (!probability_ok(d.p)) throw ConfigError("random delay probability must lie in (0, 1]");
                   if (d.first == 0 && d.second == 0) throw ConfigError("random delay needs a nonzero shift");
                   if (std::labs(d.first) > 1'000'000 || std::labs(d.second) > 1'000'000) {
                     throw ConfigError("random delay shift too large");
                   }
                 },
                 [&](const PacketDrop& d) {
                   if (!probability_ok(d.p)) throw ConfigError("packet reception probability must lie in (0, 1]");
                 },
                 [](const NoisyFilter& f) {
                   if (f.taps.empty()) throw ConfigError("noisy filter needs at least one tap");
                   for (double c : f.taps) {
                     if (!std::isfinite(c)) throw ConfigError("noisy filter taps must be finite");
                   }
                   if (!(f.noise_variance >= 0.0) || !std::isfinite(f.noise_variance)) {
                     throw ConfigError("noisy filter noise variance must be finite and nonnegative");
                   }
                 },
             },
             model);
}

void validate_specs(std::span<const CorruptionSpec> specs, std::size_t channel_count) {
  std::set<NodeId> seen;
  for (const auto& s : specs) {
    if (s.node >= channel_count) {
      throw ConfigError("corruption refers to node " + std::to_string(s.node) + " outside the panel");
    }
    if (!seen.insert(s.node).second) {
      throw ConfigError("more than one corruption for node " + std::to_string(s.node));
    }
    s.validate();
  }
}

CorruptionSignature CorruptionSignature::identity(std::size_t size) {
  return CorruptionSignature{std::vector<Complex>(size, Complex(1.0, 0.0)), std::vector<double>(size, 0.0)};
}

StreamCorruptor::StreamCorruptor(std::size_t channel_count, std::vector<CorruptionSpec> specs, std::uint64_t seed)
    : n_(channel_count), channel_slot_(channel_count, -1) {
  validate_specs(specs, channel_count);
  std::size_t lookback = 0;
  for (auto& s : specs) {
    if (s.kind() == CorruptionKind::None) continue;
    lookahead_ = std::max(lookahead_, s.lookahead());
    lookback = std::max(lookback, s.lookback());
    channel_slot_[s.node] = static_cast<long>(channels_.size());
    const NodeId node = s.node;
    channels_.push_back(Channel{std::move(s), std::mt19937_64(mix_seed(seed, node)), 0.0});
  }
  window_ = lookahead_ + lookback + 1;
  ring_.assign(window_ * n_, 0.0);
}

double StreamCorruptor::history(std::size_t channel, long t) const {
  return ring_[(static_cast<std::size_t>(t) % window_) * n_ + channel];
}

void StreamCorruptor::emit(std::size_t t, std::size_t last_valid, std::vector<double>& out) {
  const long tl = static_cast<long>(t);
  const long hi = static_cast<long>(last_valid);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t c = 0; c < n_; ++c) {
    const long slot = channel_slot_[c];
    if (slot < 0) {
      out.push_back(history(c, tl));
      continue;
    }
    Channel& ch = channels_[static_cast<std::size_t>(slot)];
    double value = 0.0;
    if (const auto* d = std::get_if<RandomDelay>(&ch.spec.model)) {
      const long shift = uniform(ch.engine) < d->p ? d->first : d->second;
      value = history(c, std::clamp(tl + shift, 0L, hi));
    } else if (const auto* d = std::get_if<PacketDrop>(&ch.spec.model)) {
      if (t == 0 || uniform(ch.engine) < d->p) ch.held = history(c, tl);
      value = ch.held;
    } else if (const auto* f = std::get_if<NoisyFilter>(&ch.spec.model)) {
      for (std::size_t k = 0; k < f->taps.size() && k <= t; ++k) value += f->taps[k] * history(c, tl - static_cast<long>(k));
      if (f->noise_variance > 0.0) {
        std::normal_distribution<double> normal(0.0, std::sqrt(f->noise_variance));
        value += normal(ch.engine);
      }
    }
    out.push_back(value);
  }
}

void StreamCorruptor::push(std::span<const double> rows, std::vector<double>& out) {
  if (finished_) throw DataError("corruptor already finished");
  if (rows.size() % n_ != 0) throw DataError("corruption input is not a whole number of rows");
  for (std::size_t r = 0; r < rows.size() / n_; ++r) {
    std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(r * n_), n_, ring_.begin() + static_cast<std::ptrdiff_t>((received_ % window_) * n_));
    ++received_;
    if (received_ > lookahead_) {
      emit(emitted_, received_ - 1, out);
      ++emitted_;
    }
  }
}

void StreamCorruptor::finish(std::vector<double>& out) {
  if (finished_) return;
  finished_ = true;
  while (emitted_ < received_) {
    emit(emitted_, received_ - 1, out);
    ++emitted_;
  }
}

TimeSeriesPanel apply_corruption(const TimeSeriesPanel& panel, std::span<const CorruptionSpec> specs,
                                 std::uint64_t seed) {
  const std::size_t n = panel.channel_count();
  StreamCorruptor corruptor(n, std::vector<CorruptionSpec>(specs.begin(), specs.end()), seed);
  TimeSeriesPanel out(panel.labels(), panel.length(), panel.dt());
  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> rows(kBlock * n);
  std::vector<double> produced;
  std::size_t written = 0;
  auto drain = [&] {
    const std::size_t count = produced.size() / n;
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t c = 0; c < n; ++c) out(c, written + r) = produced[r * n + c];
    }
    written += count;
    produced.clear();
  };
  for (std::size_t t0 = 0; t0 < panel.length(); t0 += kBlock) {
    const std::size_t count = std::min(kBlock, panel.length() - t0);
    panel.copy_rows(t0, count, rows);
    corruptor.push(std::span<const double>(rows.data(), count * n), produced);
    drain();
  }
  corruptor.finish(produced);
  drain();
  return out;
}

CorruptionSignature signature_from_pair_spectrum(const SpectralMatrix& pair, double floor) {
  if (pair.node_count() != 2) throw DataError("signature estimation needs exactly two channels");
  double peak = 0.0;
  for (std::size_t k = 0; k < pair.size(); ++k) peak = std::max(peak, pair.at(k)(0, 0).real());
  CorruptionSignature sig;
  sig.h.resize(pair.size());
  sig.d.resize(pair.size());
  for (std::size_t k = 0; k < pair.size(); ++k) {
    const auto& m = pair.at(k);
    const double xx = m(0, 0).real();
    if (!(xx > floor * peak) || !(xx > 0.0)) {
      std::ostringstream msg;
      msg << "clean spectrum below floor at omega = " << pair.grid()[k];
      throw NumericalError(msg.str());
    }
    sig.h[k] = m(1, 0) / xx;
    sig.d[k] = std::max(0.0, m(1, 1).real() - std::norm(sig.h[k]) * xx);
  }
  return sig;
}

CorruptionSignature estimate_signature(std::span<const double> clean, std::span<const double> corrupted,
                                       const WelchParams& params, double floor) {
  if (clean.size() != corrupted.size()) throw DataError("clean and corrupted series differ in length");
  params.validate_for(clean.size());
  WelchAccumulator acc({"clean", "corrupted"}, params);
  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> rows;
  rows.reserve(2 * kBlock);
  for (std::size_t t0 = 0; t0 < clean.size(); t0 += kBlock) {
    const std::size_t count = std::min(kBlock, clean.size() - t0);
    rows.clear();
    for (std::size_t t = t0; t < t0 + count; ++t) {
      rows.push_back(clean[t]);
      rows.push_back(corrupted[t]);
    }
    acc.push(rows);
  }
  return signature_from_pair_spectrum(acc.finish(), floor);
}

std::vector<double> analytic_autocovariance(const GenerativeModel& model, NodeId node, std::size_t max_lag) {
  if (node >= model.node_count()) throw ConfigError("autocovariance node out of range");
  const std::size_t f = std::max<std::size_t>(1 << 14, next_power_of_two(4 * (max_lag + 1)));
  const std::size_t bins = f / 2 + 1;
  fftw_complex* spectrum = fftw_alloc_complex(bins);
  double* lags = fftw_alloc_real(f);
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(f), spectrum, lags, FFTW_ESTIMATE);
  }
  for (std::size_t m = 0; m < bins; ++m) {
    spectrum[m][0] = node_psd(model, node, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(f));
    spectrum[m][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) r[k] = lags[k] / static_cast<double>(f);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spectrum);
  fftw_free(lags);
  return r;
}

namespace {

// Spectrum of the held (sample-and-hold on random reception) process, via its autocovariance.
CorruptionSignature packet_drop_signature(const GenerativeModel& model, NodeId node, double p,
                                          const FrequencyGrid& grid) {
  const std::size_t size = grid.size();
  if (p >= 1.0) return CorruptionSignature::identity(size);
  const double q = 1.0 - p;
  constexpr std::size_t kMaxLag = 4096;
  const std::vector<double> r = analytic_autocovariance(model, node, 2 * kMaxLag);

  const auto geometric_lags = static_cast<std::size_t>(std::ceil(std::log(1e-16) / std::log(q)));
  std::size_t decay_lags = r.size() - 1;
  while (decay_lags > 1 && std::abs(r[decay_lags - 1]) <= 1e-15 * r[0]) --decay_lags;
  const std::size_t lags = std::clamp<std::size_t>(std::max(geometric_lags, decay_lags), 1, kMaxLag);
  const std::size_t terms = std::min(geometric_lags, kMaxLag);

  // c(n) = sum_k p q^k R(n + k): covariance between a fresh sample and a held one.
  std::vector<double> c(lags + 1, 0.0);
  for (std::size_t n = 1; n <= lags; ++n) {
    double w = p;
    double acc = 0.0;
    for (std::size_t k = 0; k <= terms && n + k < r.size(); ++k) {
      acc += w * r[n + k];
      w *= q;
    }
    c[n] = acc;
  }
  std::vector<double> ruu(lags + 1, 0.0);
  ruu[0] = r[0];
  double qm = 1.0;
  for (std::size_t m = 1; m <= lags; ++m) {
    qm *= q;
    double acc = qm * r[0];
    double w = p;
    for (std::size_t j = 0; j < m; ++j) {
      acc += w * c[m - j];
      w *= q;
      if (w < 1e-300) break;
    }
    ruu[m] = acc;
  }

  CorruptionSignature sig;
  sig.h.resize(size);
  sig.d.resize(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double w = grid[k];
    sig.h[k] = p / (1.0 - q * std::exp(Complex(0.0, -w)));
    double phi_uu = ruu[0];
    for (std::size_t m = 1; m <= lags; ++m) phi_uu += 2.0 * ruu[m] * std::cos(w * static_cast<double>(m));
    sig.d[k] = std::max(0.0, phi_uu - std::norm(sig.h[k]) * node_psd(model, node, w));
  }
  return sig;
}

}  // namespace

CorruptionSignature analytic_signature(const GenerativeModel& model, const CorruptionSpec& spec,
                                       const FrequencyGrid& grid) {
  spec.validate();
  if (spec.node >= model.node_count()) throw ConfigError("corruption refers to a node outside the model");
  const std::size_t size = grid.size();
  return std::visit(
      Overloaded{
          [&](std::monostate) { return CorruptionSignature::identity(size); },
          [&](const RandomDelay& d) {
            const auto gap = static_cast<std::size_t>(std::labs(d.first - d.second));
            const std::vector<double> r = analytic_autocovariance(model, spec.node, gap);
            const double white = 2.0 * d.p * (1.0 - d.p) * (r[0] - r[gap]);
            CorruptionSignature sig;
            for (std::size_t k = 0; k < size; ++k) {
              const double w = grid[k];
              sig.h.push_back(d.p * std::exp(Complex(0.0, w * static_cast<double>(d.first))) +
                              (1.0 - d.p) * std::exp(Complex(0.0, w * static_cast<double>(d.second))));
              sig.d.push_back(std::max(0.0, white));
            }
            return sig;
          },
          [&](const PacketDrop& d) { return packet_drop_signature(model, spec.node, d.p, grid); },
          [&](const NoisyFilter& f) {
            CorruptionSignature sig;
            for (std::size_t k = 0; k < size; ++k) {
              Complex h = 0.0;
              for (std::size_t i = 0; i < f.taps.size(); ++i) {
                h += f.taps[i] * std::exp(Complex(0.0, -grid[k] * static_cast<double>(i)));
              }
              sig.h.push_back(h);
              sig.d.push_back(f.noise_variance);
            }
            return sig;
          },
      },
      spec.model);
}

SignatureMap analytic_signatures(const GenerativeModel& model, std::span<const CorruptionSpec> specs,
                                 const FrequencyGrid& grid) {
  validate_specs(specs, model.node_count());
  SignatureMap out;
  for (const auto& s : specs) {
    if (s.kind() != CorruptionKind::None) out.emplace(s.node, analytic_signature(model, s, grid));
  }
  return out;
}

void write_signature_csv(std::ostream& os, const FrequencyGrid& grid, const CorruptionSignature& sig) {
  os << "omega,re_h,im_h,d\n";
  os.precision(17);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << grid[k] << ',' << sig.h[k].real() << ',' << sig.h[k].imag() << ',' << sig.d[k] << '\n';
  }
}

}  // namespace topolearn
