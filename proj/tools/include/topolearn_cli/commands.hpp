#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <topolearn/detection.hpp>
#include <topolearn/reconstruction.hpp>
#include <topolearn/spectrum.hpp>

#include "topolearn_cli/config.hpp"

namespace topolearn::cli {

/// Stage commands. Each reads its upstream artifacts from the output directory,
/// writes its own artifacts plus a manifest_<stage>.json, and returns the paths written.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_corrupt(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_spectra(const ExperimentConfig& cfg);
DetectionReport cmd_detect(const ExperimentConfig& cfg);
TopologyEstimate cmd_learn(const ExperimentConfig& cfg);

struct PipelineResult {
  DetectionReport detection;
  TopologyEstimate topology;
  bool diagnostics_raised() const { return !detection.diagnostics.empty() || !topology.diagnostics.empty(); }
};

/// The five stages in order; in analytic mode the panel stages are skipped.
PipelineResult cmd_pipeline(const ExperimentConfig& cfg);

struct SweepRow {
  std::size_t instance = 0;
  std::size_t nodes = 0;
  std::size_t corrupt_count = 0;
  std::size_t length = 0;  // 0 for analytic spectra
  bool recovered = false;
  std::vector<std::string> diagnostics;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::pair<std::size_t, double>> recovery_rates;  // per length
};

/// Runs the sweep on `threads` workers; rows are ordered by (instance, length) regardless.
/// Writes sweep_summary.csv and sweep_rates.csv to the output directory.
SweepResult cmd_sweep(const SweepConfig& cfg, unsigned threads = 1);

/// Summary CSV: instance,nodes,corrupt_count,length,recovered,diagnostics.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace topolearn::cli
