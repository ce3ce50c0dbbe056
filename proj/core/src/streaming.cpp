#include "topolearn/streaming.hpp"

#include <algorithm>
#include <vector>

#include "topolearn/error.hpp"

namespace topolearn {

SpectralMatrix stream_corrupted_cpsd(const GenerativeModel& model, std::span<const CorruptionSpec> corruption,
                                     const WelchParams& welch, const StreamingRun& run) {
  if (run.block_rows == 0) throw ConfigError("block_rows must be positive");
  welch.validate_for(run.length);
  const std::size_t n = model.node_count();
  Simulator sim(model, run.seed, run.burn_in);
  StreamCorruptor corruptor(n, std::vector<CorruptionSpec>(corruption.begin(), corruption.end()),
                            run.corruption_seed);
  WelchAccumulator acc(model.labels(), welch);
  std::vector<double> block(run.block_rows * n);
  std::vector<double> corrupted;
  corrupted.reserve(block.size() + n * 64);
  for (std::size_t t0 = 0; t0 < run.length; t0 += run.block_rows) {
    const std::size_t count = std::min(run.block_rows, run.length - t0);
    std::span<double> rows(block.data(), count * n);
    sim.generate(rows);
    corruptor.push(rows, corrupted);
    acc.push(corrupted);
    corrupted.clear();
  }
  corruptor.finish(corrupted);
  acc.push(corrupted);
  return acc.finish();
}

}  // namespace topolearn
