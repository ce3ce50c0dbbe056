#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <topolearn/corruption.hpp>
#include <topolearn/detection.hpp>
#include <topolearn/instances.hpp>
#include <topolearn/model.hpp>
#include <topolearn/welch.hpp>

namespace topolearn::cli {

enum class DataFormat { Csv, Binary };

struct OutputOptions {
  std::filesystem::path directory = "out";
  DataFormat data_format = DataFormat::Binary;
  bool write_dot = true;  // reports are always written as JSON
};

/// Applies a --format value: csv/bin pick the data format, json suppresses DOT reports.
void apply_format(OutputOptions& out, std::string_view format);

struct ExperimentConfig {
  GenerativeModel model;
  std::vector<CorruptionSpec> corruption;
  std::size_t trajectory_length = 100'000;
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 1;
  bool analytic = false;
  std::size_t analytic_segment_length = 1024;
  WelchParams welch;
  EdgeDecisionParams decision;
  double ridge = 0.0;
  OutputOptions output;

  std::filesystem::path source;  // config file, empty for inline text
  std::string resolved_json;     // every effective setting, echoed into manifests

  /// Grid used for spectra: the Welch DFT grid, or the analytic grid.
  FrequencyGrid grid() const;
  std::uint64_t corruption_seed() const;
};

/// Parses a config; relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Settings for a randomized sweep.
struct SweepConfig {
  std::size_t instances = 20;
  std::uint64_t seed = 1;
  InstanceParams instance;
  std::vector<std::size_t> lengths;  // 0 means analytic spectra
  std::size_t burn_in = 10'000;
  std::size_t analytic_segment_length = 256;
  WelchParams welch;
  EdgeDecisionParams decision;          // for estimated spectra
  EdgeDecisionParams exact_decision;    // for analytic spectra
  OutputOptions output;
  std::string resolved_json;
};

SweepConfig parse_sweep(std::string_view text);
SweepConfig load_sweep(const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes.
std::uint64_t fnv1a_file(const std::filesystem::path& path);

}  // namespace topolearn::cli
