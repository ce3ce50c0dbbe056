#include "topolearn_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <json.hpp>

#include <topolearn/error.hpp>
#include <topolearn/io.hpp>
#include <topolearn/spectral.hpp>
#include <topolearn/streaming.hpp>

namespace topolearn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBlockRows = 1 << 14;
constexpr std::size_t kCsvEntryLimit = 10'000'000;

struct StageLog {
  std::string command;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

json effective_config(const std::string& resolved, std::uint64_t seed, const fs::path& out_dir) {
  json doc = json::parse(resolved);
  doc["seed"] = seed;
  doc["output"]["directory"] = out_dir.string();
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_manifest(const fs::path& dir, const StageLog& log, const json& config, const fs::path& source) {
  json inputs = json::array();
  std::vector<fs::path> all = log.inputs;
  if (!source.empty()) all.insert(all.begin(), source);
  for (const auto& p : all) {
    inputs.push_back({{"path", p.string()}, {"fnv1a64", hex64(fnv1a_file(p))}});
  }
  json outputs = json::array();
  for (const auto& p : log.outputs) outputs.push_back(p.filename().string());
  json doc{{"tool", "topolearn"},
           {"version", "0.1.0"},
           {"command", log.command},
           {"created", timestamp()},
           {"config", config},
           {"inputs", inputs},
           {"outputs", outputs}};
  write_text(dir / ("manifest_" + log.command + ".json"), doc.dump(2) + "\n");
}

fs::path prepare_dir(const OutputOptions& out) {
  std::error_code ec;
  fs::create_directories(out.directory, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.directory.string() + ": " + ec.message());
  return out.directory;
}

const char* panel_ext(DataFormat f) { return f == DataFormat::Csv ? ".csv" : ".rtsp"; }
const char* spectrum_ext(DataFormat f) { return f == DataFormat::Csv ? ".csv" : ".rtsm"; }

fs::path find_artifact(const fs::path& dir, const std::string& stem, std::initializer_list<const char*> exts,
                       const char* producer) {
  for (const char* ext : exts) {
    fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  throw ConfigError("missing " + stem + " in " + dir.string() + "; run '" + producer + "' first");
}

// Streams a panel file block by block as time-major rows.
void for_each_block(const fs::path& path, const std::function<void(const std::vector<std::string>&)>& on_header,
                    const std::function<void(std::span<const double>)>& on_rows) {
  std::ifstream probe(path, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::string_view(magic, 4) == "RTSP") {
    PanelReader reader(path);
    on_header(reader.labels());
    std::vector<double> rows(kBlockRows * reader.channel_count());
    while (std::size_t got = reader.read_rows(rows)) on_rows(std::span<const double>(rows.data(), got * reader.channel_count()));
    return;
  }
  const TimeSeriesPanel panel = read_panel(path);
  on_header(panel.labels());
  const std::size_t n = panel.channel_count();
  std::vector<double> rows(kBlockRows * n);
  for (std::size_t t0 = 0; t0 < panel.length(); t0 += kBlockRows) {
    const std::size_t count = std::min(kBlockRows, panel.length() - t0);
    panel.copy_rows(t0, count, rows);
    on_rows(std::span<const double>(rows.data(), count * n));
  }
}

// Writes time-major rows either to the binary format or, buffered, to CSV.
class PanelSink {
 public:
  PanelSink(const fs::path& path, std::vector<std::string> labels, DataFormat format, std::size_t expected_rows)
      : path_(path), labels_(std::move(labels)), format_(format) {
    if (format_ == DataFormat::Binary) {
      writer_ = std::make_unique<PanelWriter>(path_, labels_);
    } else if (expected_rows * labels_.size() > kCsvEntryLimit) {
      throw ConfigError("CSV panels are limited to 1e7 entries; use --format bin");
    }
  }

  void write(std::span<const double> rows) {
    if (writer_) {
      writer_->write_rows(rows);
    } else {
      buffer_.insert(buffer_.end(), rows.begin(), rows.end());
    }
  }

  void close() {
    if (writer_) {
      writer_->close();
      return;
    }
    const std::size_t n = labels_.size();
    TimeSeriesPanel panel(labels_, buffer_.size() / n);
    for (std::size_t t = 0; t < panel.length(); ++t) {
      for (std::size_t i = 0; i < n; ++i) panel(i, t) = buffer_[t * n + i];
    }
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path_.string());
    write_panel_csv(out, panel);
  }

 private:
  fs::path path_;
  std::vector<std::string> labels_;
  DataFormat format_;
  std::unique_ptr<PanelWriter> writer_;
  std::vector<double> buffer_;
};

void write_spectrum_file(const fs::path& path, const SpectralMatrix& s, DataFormat format) {
  if (format == DataFormat::Binary) {
    write_spectrum_binary(path, s);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_spectrum_csv(out, s);
}

void require_empirical(const ExperimentConfig& cfg, const char* command) {
  if (cfg.analytic) throw ConfigError(std::string("'") + command + "' needs an empirical (simulated) config");
}

}  // namespace

std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg) {
  require_empirical(cfg, "simulate");
  const fs::path dir = prepare_dir(cfg.output);
  StageLog log{"simulate", {}, {}};
  const fs::path path = dir / (std::string("clean") + panel_ext(cfg.output.data_format));
  const std::size_t n = cfg.model.node_count();
  PanelSink sink(path, cfg.model.labels(), cfg.output.data_format, cfg.trajectory_length);
  Simulator sim(cfg.model, cfg.seed, cfg.burn_in);
  std::vector<double> rows(kBlockRows * n);
  for (std::size_t t0 = 0; t0 < cfg.trajectory_length; t0 += kBlockRows) {
    const std::size_t count = std::min(kBlockRows, cfg.trajectory_length - t0);
    std::span<double> block(rows.data(), count * n);
    sim.generate(block);
    sink.write(block);
  }
  sink.close();
  log.outputs.push_back(path);
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return log.outputs;
}

std::vector<fs::path> cmd_corrupt(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output);
  StageLog log{"corrupt", {}, {}};
  const auto& labels = cfg.model.labels();

  if (cfg.analytic) {
    const FrequencyGrid grid = cfg.grid();
    for (const auto& [node, sig] : analytic_signatures(cfg.model, cfg.corruption, grid)) {
      const fs::path p = dir / ("signature_" + labels[node] + ".csv");
      std::ofstream out(p);
      write_signature_csv(out, grid, sig);
      log.outputs.push_back(p);
    }
    write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
    return log.outputs;
  }

  const fs::path clean = find_artifact(dir, "clean", {".rtsp", ".csv"}, "simulate");
  log.inputs.push_back(clean);
  const fs::path path = dir / (std::string("corrupted") + panel_ext(cfg.output.data_format));
  const std::size_t n = cfg.model.node_count();

  std::unique_ptr<PanelSink> sink;
  std::unique_ptr<StreamCorruptor> corruptor;
  std::vector<NodeId> corrupted_nodes;
  std::vector<WelchAccumulator> pairs;
  for (const auto& s : cfg.corruption) {
    if (s.kind() == CorruptionKind::None) continue;
    corrupted_nodes.push_back(s.node);
    pairs.emplace_back(std::vector<std::string>{"clean", "corrupted"}, cfg.welch);
  }
  std::deque<double> pending;  // clean rows not yet matched by corrupted output
  std::vector<double> produced;
  std::vector<double> pair_rows;
  std::size_t total_rows = 0;

  auto consume = [&] {
    const std::size_t count = produced.size() / n;
    if (count == 0) return;
    sink->write(produced);
    for (std::size_t k = 0; k < corrupted_nodes.size(); ++k) {
      const NodeId v = corrupted_nodes[k];
      pair_rows.resize(2 * count);
      for (std::size_t r = 0; r < count; ++r) {
        pair_rows[2 * r] = pending[r * n + v];
        pair_rows[2 * r + 1] = produced[r * n + v];
      }
      pairs[k].push(pair_rows);
    }
    pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(count * n));
    produced.clear();
  };

  for_each_block(
      clean,
      [&](const std::vector<std::string>& panel_labels) {
        if (panel_labels != labels) throw DataError("clean panel labels do not match the model");
        sink = std::make_unique<PanelSink>(path, panel_labels, cfg.output.data_format, cfg.trajectory_length);
        corruptor = std::make_unique<StreamCorruptor>(n, cfg.corruption, cfg.corruption_seed());
      },
      [&](std::span<const double> rows) {
        total_rows += rows.size() / n;
        pending.insert(pending.end(), rows.begin(), rows.end());
        corruptor->push(rows, produced);
        consume();
      });
  corruptor->finish(produced);
  consume();
  sink->close();
  log.outputs.push_back(path);

  if (cfg.welch.segments_for(total_rows) >= 8) {
    for (std::size_t k = 0; k < corrupted_nodes.size(); ++k) {
      const fs::path p = dir / ("signature_" + labels[corrupted_nodes[k]] + ".csv");
      const SpectralMatrix spectrum = pairs[k].finish();
      std::ofstream out(p);
      write_signature_csv(out, spectrum.grid(), signature_from_pair_spectrum(spectrum));
      log.outputs.push_back(p);
    }
  }
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return log.outputs;
}

std::vector<fs::path> cmd_spectra(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output);
  StageLog log{"spectra", {}, {}};
  SpectralMatrix psd;
  if (cfg.analytic) {
    const FrequencyGrid grid = cfg.grid();
    psd = analytic_corrupted_psd(cfg.model, analytic_signatures(cfg.model, cfg.corruption, grid), grid);
  } else {
    const fs::path corrupted = find_artifact(dir, "corrupted", {".rtsp", ".csv"}, "corrupt");
    log.inputs.push_back(corrupted);
    std::unique_ptr<WelchAccumulator> acc;
    for_each_block(
        corrupted, [&](const std::vector<std::string>& labels) { acc = std::make_unique<WelchAccumulator>(labels, cfg.welch); },
        [&](std::span<const double> rows) { acc->push(rows); });
    psd = acc->finish();
  }
  const SpectralMatrix inverse = invert_spectrum(psd, cfg.ridge);
  const DataFormat f = cfg.output.data_format;
  const fs::path psd_path = dir / (std::string("spectrum") + spectrum_ext(f));
  const fs::path inv_path = dir / (std::string("inverse_spectrum") + spectrum_ext(f));
  const fs::path plot_path = dir / "inverse_spectrum_plot.csv";
  write_spectrum_file(psd_path, psd, f);
  write_spectrum_file(inv_path, inverse, f);
  {
    std::ofstream out(plot_path);
    write_spectrum_plot_csv(out, inverse);
  }
  log.outputs = {psd_path, inv_path, plot_path};
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return log.outputs;
}

DetectionReport cmd_detect(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output);
  StageLog log{"detect", {}, {}};
  const fs::path psd_path = find_artifact(dir, "spectrum", {".rtsm", ".csv"}, "spectra");
  log.inputs.push_back(psd_path);
  const SpectralMatrix inverse = invert_spectrum(read_spectrum(psd_path), cfg.ridge);
  DetectionReport report = detect(inverse, cfg.decision);
  const fs::path json_path = dir / "detection.json";
  write_text(json_path, detection_to_json(report) + "\n");
  log.outputs.push_back(json_path);
  if (cfg.output.write_dot) {
    const fs::path dot_path = dir / "detection.dot";
    std::ostringstream os;
    write_detection_dot(os, report);
    write_text(dot_path, os.str());
    log.outputs.push_back(dot_path);
  }
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return report;
}

TopologyEstimate cmd_learn(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output);
  StageLog log{"learn", {}, {}};
  const fs::path psd_path = find_artifact(dir, "spectrum", {".rtsm", ".csv"}, "spectra");
  const fs::path report_path = find_artifact(dir, "detection", {".json"}, "detect");
  log.inputs = {psd_path, report_path};
  const SpectralMatrix psd = read_spectrum(psd_path);
  const SpectralMatrix inverse = invert_spectrum(psd, cfg.ridge);
  std::ifstream in(report_path);
  std::ostringstream text;
  text << in.rdbuf();
  const DetectionReport report = parse_detection(text.str());
  if (report.labels != psd.labels()) throw DataError("detection report and spectrum disagree on node labels");
  TopologyEstimate est = hide_and_learn(psd, inverse, report, cfg.decision, cfg.ridge);
  const fs::path json_path = dir / "topology.json";
  write_text(json_path, topology_to_json(est) + "\n");
  log.outputs.push_back(json_path);
  if (cfg.output.write_dot) {
    const fs::path dot_path = dir / "topology.dot";
    std::ostringstream os;
    write_topology_dot(os, est);
    write_text(dot_path, os.str());
    log.outputs.push_back(dot_path);
  }
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return est;
}

PipelineResult cmd_pipeline(const ExperimentConfig& cfg) {
  if (!cfg.analytic) cmd_simulate(cfg);
  cmd_corrupt(cfg);
  cmd_spectra(cfg);
  PipelineResult result;
  result.detection = cmd_detect(cfg);
  result.topology = cmd_learn(cfg);
  const fs::path dir = cfg.output.directory;
  StageLog log{"pipeline", {}, {}};
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("manifest_", 0) != 0) log.outputs.push_back(entry.path());
  }
  std::sort(log.outputs.begin(), log.outputs.end());
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), cfg.source);
  return result;
}

namespace {

std::vector<SweepRow> sweep_instance(const SweepConfig& cfg, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5EEDu};
  std::mt19937_64 rng(seq);
  const FrequencyGrid analytic_grid = FrequencyGrid::dft(cfg.analytic_segment_length);
  const Instance inst = cfg.instance.violation == SpacingViolation::None
                            ? random_separated_instance(cfg.instance, cfg.exact_decision, analytic_grid, rng)
                            : random_instance(cfg.instance, rng);
  const std::uint64_t sim_seed = rng();
  const std::uint64_t corruption_seed = rng();

  std::vector<SweepRow> rows;
  for (const std::size_t length : cfg.lengths) {
    SweepRow row;
    row.instance = index;
    row.nodes = inst.model.node_count();
    row.corrupt_count = inst.corrupt.size();
    row.length = length;
    try {
      SpectralMatrix psd;
      SpectralMatrix inverse;
      const EdgeDecisionParams& decision = length == 0 ? cfg.exact_decision : cfg.decision;
      if (length == 0) {
        psd = analytic_corrupted_psd(inst.model, analytic_signatures(inst.model, inst.corruption, analytic_grid),
                                     analytic_grid);
        inverse = analytic_corrupted_inverse(inst, analytic_grid);
      } else {
        StreamingRun run{length, cfg.burn_in, sim_seed, corruption_seed};
        psd = stream_corrupted_cpsd(inst.model, inst.corruption, cfg.welch, run);
        inverse = invert_spectrum(psd);
      }
      const DetectionReport report = detect(inverse, decision);
      const TopologyEstimate est = hide_and_learn(psd, inverse, report, decision);
      row.recovered = est.graph == inst.model.topology();
      for (const auto& d : report.diagnostics) row.diagnostics.push_back(d.code);
      for (const auto& d : est.diagnostics) row.diagnostics.push_back(d.code);
    } catch (const Error& e) {
      row.diagnostics.push_back(std::string("error:") + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "instance,nodes,corrupt_count,length,recovered,diagnostics\n";
  for (const auto& r : rows) {
    std::string diag;
    for (const auto& d : r.diagnostics) {
      if (!diag.empty()) diag += ';';
      for (char c : d) diag += (c == ',' || c == '"' || c == '\n') ? ' ' : c;
    }
    os << r.instance << ',' << r.nodes << ',' << r.corrupt_count << ',' << r.length << ','
       << (r.recovered ? 1 : 0) << ',' << diag << '\n';
  }
}

SweepResult cmd_sweep(const SweepConfig& cfg, unsigned threads) {
  const fs::path dir = prepare_dir(cfg.output);
  threads = std::max(1u, threads);
  std::vector<std::vector<SweepRow>> per_instance(cfg.instances);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.instances; i = next++) {
      try {
        per_instance[i] = sweep_instance(cfg, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (auto& rows : per_instance) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  for (const std::size_t length : cfg.lengths) {
    std::size_t total = 0;
    std::size_t ok = 0;
    for (const auto& r : result.rows) {
      if (r.length != length) continue;
      ++total;
      ok += r.recovered ? 1 : 0;
    }
    result.recovery_rates.emplace_back(length, total == 0 ? 0.0 : static_cast<double>(ok) / total);
  }

  StageLog log{"sweep", {}, {dir / "sweep_summary.csv", dir / "sweep_rates.csv"}};
  {
    std::ofstream out(log.outputs[0]);
    write_sweep_csv(out, result.rows);
  }
  {
    std::ofstream out(log.outputs[1]);
    out << "length,instances,recovery_rate\n";
    for (const auto& [length, rate] : result.recovery_rates) {
      out << (length == 0 ? std::string("analytic") : std::to_string(length)) << ',' << cfg.instances << ','
          << rate << '\n';
    }
  }
  write_manifest(dir, log, effective_config(cfg.resolved_json, cfg.seed, dir), {});
  return result;
}

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitAssumption = 5;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Numerical: return kExitNumerical;
    case ErrorKind::Assumption: return kExitAssumption;
  }
  return kExitUnexpected;
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) std::cerr << "diagnostic " << d.code << ": " << d.message << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Tree topology learning from corrupted time series", "topolearn"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string format;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Override the seed");
    sub->add_option("--format", format, "csv | bin | json | dot")
        ->check(CLI::IsMember({"csv", "bin", "json", "dot"}));
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"simulate", "Simulate the clean network"},
                      {"corrupt", "Corrupt the clean panel"},
                      {"spectra", "Estimate spectra and their inverses"},
                      {"detect", "Detect corrupt nodes"},
                      {"learn", "Reconstruct the topology"},
                      {"pipeline", "Run every stage"},
                      {"sweep", "Randomized recovery sweep"}};
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    if (std::string_view(s.name) == "sweep") sub->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    const bool seed_given = chosen->count("--seed") > 0;
    if (name == "sweep") {
      SweepConfig cfg = load_sweep(config_path);
      if (seed_given) cfg.seed = seed;
      if (!out_dir.empty()) cfg.output.directory = out_dir;
      if (!format.empty()) apply_format(cfg.output, format);
      const SweepResult result = cmd_sweep(cfg, threads);
      for (const auto& [length, rate] : result.recovery_rates) {
        std::cout << "length " << (length == 0 ? std::string("analytic") : std::to_string(length))
                  << " recovery " << rate << '\n';
      }
      return kExitOk;
    }
    ExperimentConfig cfg = load_experiment(config_path);
    if (seed_given) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (!format.empty()) apply_format(cfg.output, format);

    if (name == "simulate") {
      cmd_simulate(cfg);
    } else if (name == "corrupt") {
      cmd_corrupt(cfg);
    } else if (name == "spectra") {
      cmd_spectra(cfg);
    } else if (name == "detect") {
      const DetectionReport report = cmd_detect(cfg);
      print_diagnostics(report.diagnostics);
      if (!report.diagnostics.empty()) return kExitAssumption;
    } else if (name == "learn") {
      const TopologyEstimate est = cmd_learn(cfg);
      print_diagnostics(est.diagnostics);
      if (!est.ok()) return kExitAssumption;
    } else if (name == "pipeline") {
      const PipelineResult result = cmd_pipeline(cfg);
      print_diagnostics(result.detection.diagnostics);
      print_diagnostics(result.topology.diagnostics);
      std::cout << graph_to_json(result.topology.graph, result.topology.labels) << '\n';
      if (result.diagnostics_raised()) return kExitAssumption;
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace topolearn::cli
