#include "topolearn_cli/config.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <topolearn/error.hpp>
#include <topolearn/io.hpp>

namespace topolearn::cli {

using nlohmann::json;

namespace {

constexpr std::string_view kExperimentDefaults = R"({
  "corruption": [],
  "trajectory_length": 100000,
  "burn_in": 10000,
  "seed": 1,
  "mode": "empirical",
  "analytic_segment_length": 1024,
  "welch": {"segment_length": 1024, "overlap": 0.5, "window": "hann"},
  "decision": {"phase_threshold": 0.1, "magnitude_floor_quantile": 0.25, "band_edge_bins": 2},
  "ridge": 0.0,
  "output": {"directory": "out", "format": "bin"}
})";

constexpr std::string_view kSweepDefaults = R"({
  "instances": 20,
  "seed": 1,
  "nodes": [7, 15],
  "corrupt": [1, 3],
  "violation": "none",
  "lengths": ["analytic"],
  "burn_in": 10000,
  "analytic_segment_length": 256,
  "welch": {"segment_length": 1024, "overlap": 0.5, "window": "hann"},
  "decision": {"magnitude_threshold": 0.05, "phase_threshold": 0.1, "magnitude_floor_quantile": 0.25, "band_edge_bins": 2},
  "exact_decision": {"magnitude_threshold": 1e-6, "phase_threshold": 0.1, "magnitude_floor_quantile": 0.25, "band_edge_bins": 2},
  "output": {"directory": "sweep_out", "format": "csv"}
})";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json merged(std::string_view defaults, std::string_view text) {
  json doc = json::parse(defaults);
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  doc.merge_patch(user);
  return doc;
}

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::Hann;
  if (name == "hamming") return Window::Hamming;
  if (name == "rectangular") return Window::Rectangular;
  throw ConfigError("unknown window '" + name + "'");
}

WelchParams parse_welch(const json& j) {
  WelchParams w;
  w.segment_length = j.at("segment_length").get<std::size_t>();
  w.overlap_fraction = j.at("overlap").get<double>();
  w.window = parse_window(j.at("window").get<std::string>());
  w.validate();
  return w;
}

EdgeDecisionParams parse_decision(const json& j) {
  EdgeDecisionParams d;
  d.magnitude_threshold = j.at("magnitude_threshold").get<double>();
  d.phase_threshold = j.at("phase_threshold").get<double>();
  d.magnitude_floor_quantile = j.at("magnitude_floor_quantile").get<double>();
  d.band_edge_bins = j.at("band_edge_bins").get<std::size_t>();
  d.validate();
  return d;
}

OutputOptions parse_output(const json& j) {
  OutputOptions o;
  o.directory = j.at("directory").get<std::string>();
  apply_format(o, j.at("format").get<std::string>());
  return o;
}

SpacingViolation parse_violation(const std::string& name) {
  if (name == "none") return SpacingViolation::None;
  if (name == "corrupt_near_leaf") return SpacingViolation::CorruptNearLeaf;
  if (name == "corrupt_pair_two_hops") return SpacingViolation::CorruptPairTwoHops;
  throw ConfigError("unknown violation '" + name + "'");
}

std::pair<std::size_t, std::size_t> parse_range(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be a [min, max] pair");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

}  // namespace

void apply_format(OutputOptions& out, std::string_view format) {
  if (format == "csv") {
    out.data_format = DataFormat::Csv;
  } else if (format == "bin") {
    out.data_format = DataFormat::Binary;
  } else if (format == "json") {
    out.write_dot = false;
  } else if (format == "dot") {
    out.write_dot = true;
  } else {
    throw ConfigError("unknown format '" + std::string(format) + "'");
  }
}

FrequencyGrid ExperimentConfig::grid() const {
  return FrequencyGrid::dft(analytic ? analytic_segment_length : welch.segment_length);
}

std::uint64_t ExperimentConfig::corruption_seed() const { return seed ^ 0x9E3779B97F4A7C15ull; }

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = merged(kExperimentDefaults, text);
  ExperimentConfig cfg;
  try {
    if (!doc.contains("model")) throw ConfigError("config needs a model (inline object or file path)");
    const json& model = doc.at("model");
    if (model.is_string()) {
      std::filesystem::path path = model.get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      if (!std::filesystem::exists(path)) throw ConfigError("model file not found: " + path.string());
      cfg.model = read_model(path);
    } else {
      cfg.model = parse_model(model.dump());
    }
    cfg.model.require_stable();
    cfg.corruption = parse_corruption(doc.at("corruption").dump(), cfg.model.labels());
    cfg.trajectory_length = doc.at("trajectory_length").get<std::size_t>();
    cfg.burn_in = doc.at("burn_in").get<std::size_t>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode != "empirical" && mode != "analytic") throw ConfigError("mode must be 'empirical' or 'analytic'");
    cfg.analytic = mode == "analytic";
    cfg.analytic_segment_length = doc.at("analytic_segment_length").get<std::size_t>();
    if (cfg.analytic_segment_length < 16 || cfg.analytic_segment_length % 2 != 0) {
      throw ConfigError("analytic_segment_length must be even and at least 16");
    }
    cfg.welch = parse_welch(doc.at("welch"));
    json& decision = doc.at("decision");
    if (!decision.contains("magnitude_threshold")) {
      decision["magnitude_threshold"] =
          cfg.analytic ? EdgeDecisionParams::exact().magnitude_threshold : EdgeDecisionParams{}.magnitude_threshold;
    }
    cfg.decision = parse_decision(decision);
    cfg.ridge = doc.at("ridge").get<double>();
    if (!(cfg.ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
    cfg.output = parse_output(doc.at("output"));
    if (!cfg.analytic) {
      if (cfg.trajectory_length == 0) throw ConfigError("trajectory_length must be positive");
      cfg.welch.validate_for(cfg.trajectory_length);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  doc["model"] = json::parse(model_to_json(cfg.model));
  doc["decision"]["magnitude_threshold"] = cfg.decision.magnitude_threshold;
  cfg.resolved_json = doc.dump(2);
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  ExperimentConfig cfg = parse_experiment(read_text(path), path.parent_path());
  cfg.source = path;
  return cfg;
}

SweepConfig parse_sweep(std::string_view text) {
  json doc = merged(kSweepDefaults, text);
  SweepConfig cfg;
  try {
    cfg.instances = doc.at("instances").get<std::size_t>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    std::tie(cfg.instance.min_nodes, cfg.instance.max_nodes) = parse_range(doc.at("nodes"), "nodes");
    std::tie(cfg.instance.min_corrupt, cfg.instance.max_corrupt) = parse_range(doc.at("corrupt"), "corrupt");
    cfg.instance.violation = parse_violation(doc.at("violation").get<std::string>());
    cfg.instance.validate();
    for (const json& l : doc.at("lengths")) {
      if (l.is_string()) {
        if (l.get<std::string>() != "analytic") throw ConfigError("lengths entries are integers or \"analytic\"");
        cfg.lengths.push_back(0);
      } else {
        cfg.lengths.push_back(l.get<std::size_t>());
      }
    }
    cfg.burn_in = doc.at("burn_in").get<std::size_t>();
    cfg.analytic_segment_length = doc.at("analytic_segment_length").get<std::size_t>();
    cfg.welch = parse_welch(doc.at("welch"));
    for (std::size_t t : cfg.lengths) {
      if (t != 0) cfg.welch.validate_for(t);
    }
    cfg.decision = parse_decision(doc.at("decision"));
    cfg.exact_decision = parse_decision(doc.at("exact_decision"));
    cfg.output = parse_output(doc.at("output"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid sweep config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("invalid sweep config: ") + e.what());
  }
  cfg.resolved_json = doc.dump(2);
  return cfg;
}

SweepConfig load_sweep(const std::filesystem::path& path) {
  return parse_sweep(read_text(path));
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace topolearn::cli
