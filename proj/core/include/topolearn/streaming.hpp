#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "topolearn/corruption.hpp"
#include "topolearn/model.hpp"
#include "topolearn/spectrum.hpp"
#include "topolearn/welch.hpp"

namespace topolearn {

struct StreamingRun {
  std::size_t length = 0;
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t corruption_seed = 2;
  std::size_t block_rows = 1 << 14;
};

/// Simulates, corrupts and Welch-averages in fixed-size blocks without holding the trajectory.
/// The result equals running the three stages on the stored panels.
SpectralMatrix stream_corrupted_cpsd(const GenerativeModel& model, std::span<const CorruptionSpec> corruption,
                                     const WelchParams& welch, const StreamingRun& run);

}  // namespace topolearn
