#include "topolearn/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "topolearn/error.hpp"

namespace topolearn {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

std::map<std::string, NodeId> label_index(const std::vector<std::string>& labels) {
  std::map<std::string, NodeId> index;
  for (NodeId i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], i).second) throw ConfigError("duplicate node label '" + labels[i] + "'");
  }
  return index;
}

NodeId lookup(const std::map<std::string, NodeId>& index, const json& label) {
  const std::string key = label.is_string() ? label.get<std::string>() : label.dump();
  auto it = index.find(key);
  if (it == index.end()) throw ConfigError("unknown node label '" + key + "'");
  return it->second;
}

// Little-endian primitives.
template <class T>
void put(std::ostream& os, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    os.write(bytes.data(), sizeof(T));
  } else {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <class T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes{};
  if (!is.read(bytes.data(), sizeof(T))) throw DataError("truncated binary file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto size = get<std::uint32_t>(is);
  if (size > (1u << 20)) throw DataError("implausible label length in binary file");
  std::string s(size, '\0');
  if (!is.read(s.data(), size)) throw DataError("truncated binary file");
  return s;
}

void expect_magic(std::istream& is, const char* magic) {
  char buf[4] = {};
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw DataError(std::string("not a ") + magic + " file");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != 1) throw DataError(std::string("unsupported ") + magic + " version " + std::to_string(version));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw DataError("malformed number '" + cell + "'");
  return v;
}

json graph_json(const UndirectedGraph& g, const std::vector<std::string>& labels) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({labels[e.a], labels[e.b]});
  return {{"nodes", labels}, {"edges", edges}};
}

json nodes_json(const NodeSet& set, const std::vector<std::string>& labels) {
  json out = json::array();
  for (NodeId v : set) out.push_back(labels[v]);
  return out;
}

json edges_json(std::span<const Edge> edges, const std::vector<std::string>& labels) {
  json out = json::array();
  for (const Edge& e : edges) out.push_back({labels[e.a], labels[e.b]});
  return out;
}

json diagnostics_json(const std::vector<Diagnostic>& diags, const std::vector<std::string>& labels) {
  json out = json::array();
  for (const Diagnostic& d : diags) {
    json nodes = json::array();
    for (NodeId v : d.nodes) nodes.push_back(labels[v]);
    out.push_back({{"code", d.code}, {"message", d.message}, {"nodes", nodes}});
  }
  return out;
}

void dot_escape(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

}  // namespace

GenerativeModel parse_model(std::string_view json_text) {
  const json doc = parse_json(json_text, "model");
  try {
    std::vector<std::string> labels;
    std::vector<NodeDynamics> dynamics;
    for (const json& node : doc.at("nodes")) {
      labels.push_back(node.at("label").is_string() ? node.at("label").get<std::string>() : node.at("label").dump());
      NodeDynamics d;
      if (node.contains("ar")) d.ar = node.at("ar").get<std::vector<double>>();
      if (node.contains("noise_variance")) d.noise_variance = node.at("noise_variance").get<double>();
      if (d.ar.empty()) throw ConfigError("node " + labels.back() + " needs at least one self-dynamics coefficient");
      dynamics.push_back(std::move(d));
    }
    const auto index = label_index(labels);
    UndirectedGraph topology(labels.size());
    GenerativeModel::Coupling coupling;
    for (const json& edge : doc.at("edges")) {
      const json& ends = edge.at("nodes");
      const json& b = edge.at("b");
      if (ends.size() != 2 || b.size() != 2) throw ConfigError("an edge needs two nodes and two couplings");
      const NodeId u = lookup(index, ends[0]);
      const NodeId v = lookup(index, ends[1]);
      if (u == v) throw ConfigError("self-loop on node " + labels[u]);
      if (topology.has_edge(u, v)) throw ConfigError("duplicate edge " + labels[u] + "-" + labels[v]);
      topology.add_edge(u, v);
      coupling[{u, v}] = b[0].get<double>();
      coupling[{v, u}] = b[1].get<double>();
    }
    return GenerativeModel(std::move(topology), std::move(labels), std::move(coupling), std::move(dynamics));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
}

GenerativeModel read_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string model_to_json(const GenerativeModel& model) {
  json nodes = json::array();
  for (NodeId i = 0; i < model.node_count(); ++i) {
    nodes.push_back({{"label", model.labels()[i]},
                     {"ar", model.dynamics(i).ar},
                     {"noise_variance", model.dynamics(i).noise_variance}});
  }
  json edges = json::array();
  for (const Edge& e : model.topology().edges()) {
    edges.push_back({{"nodes", {model.labels()[e.a], model.labels()[e.b]}},
                     {"b", {model.coupling(e.a, e.b), model.coupling(e.b, e.a)}}});
  }
  return json{{"nodes", nodes}, {"edges", edges}}.dump(2);
}

std::vector<CorruptionSpec> parse_corruption(std::string_view json_text, const std::vector<std::string>& labels) {
  const json doc = parse_json(json_text, "corruption");
  const auto index = label_index(labels);
  std::vector<CorruptionSpec> out;
  try {
    if (!doc.is_array()) throw ConfigError("corruption must be a list");
    for (const json& entry : doc) {
      CorruptionSpec spec;
      spec.node = lookup(index, entry.at("node"));
      switch (corruption_kind_from_string(entry.at("kind").get<std::string>())) {
        case CorruptionKind::None: break;
        case CorruptionKind::RandomDelay: {
          const auto shifts = entry.at("shifts").get<std::vector<long>>();
          if (shifts.size() != 2) throw ConfigError("random delay needs exactly two shifts");
          spec.model = RandomDelay{shifts[0], shifts[1], entry.at("p").get<double>()};
          break;
        }
        case CorruptionKind::PacketDrop: spec.model = PacketDrop{entry.at("p").get<double>()}; break;
        case CorruptionKind::NoisyFilter:
          spec.model = NoisyFilter{entry.at("taps").get<std::vector<double>>(), entry.value("noise_variance", 0.0)};
          break;
      }
      out.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid corruption entry: ") + e.what());
  }
  validate_specs(out, labels.size());
  return out;
}

std::string corruption_to_json(std::span<const CorruptionSpec> specs, const std::vector<std::string>& labels) {
  json out = json::array();
  for (const auto& s : specs) {
    json e{{"node", labels.at(s.node)}, {"kind", to_string(s.kind())}};
    if (const auto* d = std::get_if<RandomDelay>(&s.model)) {
      e["shifts"] = {d->first, d->second};
      e["p"] = d->p;
    } else if (const auto* d = std::get_if<PacketDrop>(&s.model)) {
      e["p"] = d->p;
    } else if (const auto* f = std::get_if<NoisyFilter>(&s.model)) {
      e["taps"] = f->taps;
      e["noise_variance"] = f->noise_variance;
    }
    out.push_back(std::move(e));
  }
  return out.dump(2);
}

std::string graph_to_json(const UndirectedGraph& g, const std::vector<std::string>& labels) {
  return graph_json(g, labels).dump(2);
}

UndirectedGraph parse_graph(std::string_view json_text, std::vector<std::string>& labels) {
  const json doc = parse_json(json_text, "graph");
  try {
    labels.clear();
    for (const json& l : doc.at("nodes")) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    const auto index = label_index(labels);
    UndirectedGraph g(labels.size());
    for (const json& e : doc.at("edges")) {
      if (e.size() != 2) throw ConfigError("graph edges must be pairs");
      g.add_edge(lookup(index, e[0]), lookup(index, e[1]));
    }
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid graph: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid graph: ") + e.what());
  }
}

void write_graph_dot(std::ostream& os, const UndirectedGraph& g, const std::vector<std::string>& labels,
                     std::string_view name) {
  os << "graph " << name << " {\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    os << "  ";
    dot_escape(os, labels[v]);
    os << ";\n";
  }
  for (const Edge& e : g.edges()) {
    os << "  ";
    dot_escape(os, labels[e.a]);
    os << " -- ";
    dot_escape(os, labels[e.b]);
    os << ";\n";
  }
  os << "}\n";
}

void write_panel_csv(std::ostream& os, const TimeSeriesPanel& panel) {
  const std::size_t n = panel.channel_count();
  for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << panel.labels()[i];
  os << '\n';
  char buf[32];
  for (std::size_t t = 0; t < panel.length(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, panel(i, t));
      if (i) os << ',';
      os.write(buf, ptr - buf);
    }
    os << '\n';
  }
}

TimeSeriesPanel read_panel_csv(std::istream& is, double dt) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty panel CSV");
  const std::vector<std::string> labels = split_csv_line(line);
  label_index(labels);
  const std::size_t n = labels.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != n) throw DataError("panel CSV row " + std::to_string(rows + 2) + " has the wrong width");
    for (const auto& c : cells) values.push_back(parse_double(c));
    ++rows;
  }
  TimeSeriesPanel panel(labels, rows, dt);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < n; ++i) panel(i, t) = values[t * n + i];
  }
  panel.validate();
  return panel;
}

PanelWriter::PanelWriter(const std::filesystem::path& path, std::vector<std::string> labels, double dt)
    : out_(path, std::ios::binary | std::ios::trunc), channels_(labels.size()) {
  if (!out_) throw DataError("cannot create " + path.string());
  out_.write("RTSP", 4);
  put<std::uint32_t>(out_, 1);
  put<std::uint64_t>(out_, channels_);
  length_field_ = out_.tellp();
  put<std::uint64_t>(out_, 0);
  put<double>(out_, dt);
  for (const auto& l : labels) put_string(out_, l);
}

PanelWriter::~PanelWriter() {
  try {
    close();
  } catch (...) {
    // Destructors must not throw; an explicit close() reports errors.
  }
}

void PanelWriter::write_rows(std::span<const double> rows) {
  if (closed_) throw DataError("panel writer already closed");
  if (rows.size() % channels_ != 0) throw DataError("panel rows are not a whole number of rows");
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
  } else {
    for (double v : rows) put<double>(out_, v);
  }
  rows_ += rows.size() / channels_;
  if (!out_) throw DataError("write failed");
}

void PanelWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.seekp(length_field_);
  put<std::uint64_t>(out_, rows_);
  out_.close();
  if (!out_) throw DataError("closing panel file failed");
}

PanelReader::PanelReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw ConfigError("cannot open " + path.string());
  expect_magic(in_, "RTSP");
  const auto n = get<std::uint64_t>(in_);
  length_ = get<std::uint64_t>(in_);
  dt_ = get<double>(in_);
  if (n == 0 || n > 100'000) throw DataError("implausible channel count in panel file");
  for (std::uint64_t i = 0; i < n; ++i) labels_.push_back(get_string(in_));
}

std::size_t PanelReader::read_rows(std::span<double> out) {
  const std::size_t n = labels_.size();
  const std::size_t rows = std::min(out.size() / n, remaining());
  if (rows == 0) return 0;
  if constexpr (std::endian::native == std::endian::little) {
    if (!in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(rows * n * sizeof(double)))) {
      throw DataError("truncated panel file");
    }
  } else {
    for (std::size_t k = 0; k < rows * n; ++k) out[k] = get<double>(in_);
  }
  for (std::size_t k = 0; k < rows * n; ++k) {
    if (!std::isfinite(out[k])) throw DataError("non-finite sample in panel file");
  }
  consumed_ += rows;
  return rows;
}

void write_panel_binary(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
  PanelWriter writer(path, panel.labels(), panel.dt());
  const std::size_t n = panel.channel_count();
  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> rows(kBlock * n);
  for (std::size_t t0 = 0; t0 < panel.length(); t0 += kBlock) {
    const std::size_t count = std::min(kBlock, panel.length() - t0);
    panel.copy_rows(t0, count, rows);
    writer.write_rows(std::span<const double>(rows.data(), count * n));
  }
  writer.close();
}

TimeSeriesPanel read_panel_binary(const std::filesystem::path& path) {
  PanelReader reader(path);
  const std::size_t n = reader.channel_count();
  TimeSeriesPanel panel(reader.labels(), reader.length(), reader.dt());
  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> rows(kBlock * n);
  std::size_t t = 0;
  while (std::size_t got = reader.read_rows(rows)) {
    for (std::size_t r = 0; r < got; ++r) {
      for (std::size_t i = 0; i < n; ++i) panel(i, t + r) = rows[r * n + i];
    }
    t += got;
  }
  return panel;
}

TimeSeriesPanel read_panel(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ConfigError("cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::memcmp(magic, "RTSP", 4) == 0) return read_panel_binary(path);
  probe.seekg(0);
  probe.clear();
  return read_panel_csv(probe);
}

void write_spectrum_csv(std::ostream& os, const SpectralMatrix& s) {
  os << "omega,row,col,re,im,excluded\n";
  os.precision(17);
  const auto n = static_cast<Eigen::Index>(s.node_count());
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const Complex v = s.at(k)(i, j);
        os << s.grid()[k] << ',' << s.labels()[static_cast<std::size_t>(i)] << ','
           << s.labels()[static_cast<std::size_t>(j)] << ',' << v.real() << ',' << v.imag() << ','
           << (s.excluded(k) ? 1 : 0) << '\n';
      }
    }
  }
}

SpectralMatrix read_spectrum_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty spectrum CSV");
  struct Row {
    double omega;
    std::string row, col;
    Complex value;
    bool excluded;
  };
  std::vector<Row> rows;
  std::vector<std::string> labels;
  std::map<std::string, NodeId> index;
  std::vector<double> omegas;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw DataError("spectrum CSV rows need six columns");
    Row r{parse_double(cells[0]), cells[1], cells[2], Complex(parse_double(cells[3]), parse_double(cells[4])),
          cells[5] == "1"};
    if (omegas.empty() || omegas.back() != r.omega) omegas.push_back(r.omega);
    if (omegas.size() == 1 && !index.contains(r.row)) {
      index.emplace(r.row, labels.size());
      labels.push_back(r.row);
    }
    rows.push_back(std::move(r));
  }
  SpectralMatrix s(FrequencyGrid(omegas), labels);
  const std::size_t n = labels.size();
  if (rows.size() != omegas.size() * n * n) throw DataError("spectrum CSV is not a complete grid of matrices");
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const std::size_t k = idx / (n * n);
    const Row& r = rows[idx];
    if (r.omega != omegas[k]) throw DataError("spectrum CSV rows are out of order");
    s.at(k)(static_cast<Eigen::Index>(index.at(r.row)), static_cast<Eigen::Index>(index.at(r.col))) = r.value;
    if (r.excluded && !s.excluded(k)) s.exclude(k);
  }
  return s;
}

void write_spectrum_binary(const std::filesystem::path& path, const SpectralMatrix& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out.write("RTSM", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint64_t>(out, s.node_count());
  put<std::uint64_t>(out, s.size());
  for (const auto& l : s.labels()) put_string(out, l);
  for (double w : s.grid().omegas()) put<double>(out, w);
  for (std::size_t k = 0; k < s.size(); ++k) put<std::uint8_t>(out, s.excluded(k) ? 1 : 0);
  const auto n = static_cast<Eigen::Index>(s.node_count());
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        put<double>(out, s.at(k)(i, j).real());
        put<double>(out, s.at(k)(i, j).imag());
      }
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

SpectralMatrix read_spectrum_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  expect_magic(in, "RTSM");
  const auto n = get<std::uint64_t>(in);
  const auto size = get<std::uint64_t>(in);
  if (n == 0 || n > 10'000 || size > (1ull << 24)) throw DataError("implausible spectrum dimensions");
  std::vector<std::string> labels;
  for (std::uint64_t i = 0; i < n; ++i) labels.push_back(get_string(in));
  std::vector<double> omegas(size);
  for (auto& w : omegas) w = get<double>(in);
  std::vector<bool> excluded(size);
  for (std::size_t k = 0; k < size; ++k) excluded[k] = get<std::uint8_t>(in) != 0;
  SpectralMatrix s(FrequencyGrid(omegas), labels);
  const auto nn = static_cast<Eigen::Index>(n);
  for (std::size_t k = 0; k < size; ++k) {
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        s.at(k)(i, j) = Complex(re, im);
      }
    }
    if (excluded[k]) s.exclude(k);
  }
  return s;
}

SpectralMatrix read_spectrum(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ConfigError("cannot open " + path.string());
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::memcmp(magic, "RTSM", 4) == 0) return read_spectrum_binary(path);
  probe.seekg(0);
  probe.clear();
  return read_spectrum_csv(probe);
}

void write_spectrum_plot_csv(std::ostream& os, const SpectralMatrix& s) {
  os << "omega,row,col,magnitude,phase\n";
  os.precision(12);
  const auto n = static_cast<Eigen::Index>(s.node_count());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.excluded(k)) continue;
        const Complex v = s.at(k)(i, j);
        os << s.grid()[k] << ',' << s.labels()[static_cast<std::size_t>(i)] << ','
           << s.labels()[static_cast<std::size_t>(j)] << ',' << std::abs(v) << ',' << std::arg(v) << '\n';
      }
    }
  }
}

std::string detection_to_json(const DetectionReport& r) {
  const auto& labels = r.labels;
  json evidence = json::object();
  for (const auto& [node, list] : r.evidence) {
    json items = json::array();
    for (const auto& e : list) {
      items.push_back({{"neighbor", labels[e.neighbor]}, {"phase_score", e.score}, {"nonconstant", e.nonconstant}});
    }
    evidence[labels[node]] = items;
  }
  json scores = json::array();
  for (const Edge& e : r.perturbed.edges()) {
    scores.push_back({{"edge", {labels[e.a], labels[e.b]}},
                      {"score", r.support_scores(static_cast<Eigen::Index>(e.a), static_cast<Eigen::Index>(e.b))}});
  }
  json matrix = json::array();
  for (Eigen::Index i = 0; i < r.support_scores.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.support_scores.cols()));
    for (Eigen::Index j = 0; j < r.support_scores.cols(); ++j) row[static_cast<std::size_t>(j)] = r.support_scores(i, j);
    matrix.push_back(row);
  }
  json doc{{"perturbed_graph", graph_json(r.perturbed, labels)},
           {"candidates", nodes_json(r.candidates, labels)},
           {"corrupt", nodes_json(r.corrupt, labels)},
           {"leaves", nodes_json(r.leaves, labels)},
           {"unclassified", nodes_json(r.unclassified, labels)},
           {"leaf_edges", edges_json(r.leaf_edges, labels)},
           {"evidence", evidence},
           {"edge_scores", scores},
           {"support_scores", matrix},
           {"diagnostics", diagnostics_json(r.diagnostics, labels)}};
  return doc.dump(2);
}

DetectionReport parse_detection(std::string_view json_text) {
  const json doc = parse_json(json_text, "detection report");
  try {
    DetectionReport r;
    std::vector<std::string> labels;
    r.perturbed = parse_graph(doc.at("perturbed_graph").dump(), labels);
    r.labels = labels;
    const auto index = label_index(labels);
    auto read_set = [&](const char* key) {
      NodeSet out;
      for (const json& l : doc.at(key)) out.insert(lookup(index, l));
      return out;
    };
    r.candidates = read_set("candidates");
    r.corrupt = read_set("corrupt");
    r.leaves = read_set("leaves");
    r.unclassified = read_set("unclassified");
    for (const json& e : doc.at("leaf_edges")) r.leaf_edges.emplace_back(lookup(index, e.at(0)), lookup(index, e.at(1)));
    for (const auto& [key, items] : doc.at("evidence").items()) {
      auto& list = r.evidence[lookup(index, json(key))];
      for (const json& it : items) {
        list.push_back({lookup(index, it.at("neighbor")), it.at("phase_score").get<double>(), it.at("nonconstant").get<bool>()});
      }
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    r.support_scores = Eigen::MatrixXd::Zero(n, n);
    const json& matrix = doc.at("support_scores");
    if (static_cast<Eigen::Index>(matrix.size()) != n) throw ConfigError("support score matrix has the wrong size");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) r.support_scores(i, j) = matrix.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
    }
    for (const json& d : doc.at("diagnostics")) {
      Diagnostic diag{d.at("code").get<std::string>(), d.at("message").get<std::string>(), {}};
      for (const json& l : d.at("nodes")) diag.nodes.push_back(lookup(index, l));
      r.diagnostics.push_back(std::move(diag));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid detection report: ") + e.what());
  }
}

void write_detection_dot(std::ostream& os, const DetectionReport& r) {
  os << "graph perturbed {\n";
  for (NodeId v = 0; v < r.labels.size(); ++v) {
    os << "  ";
    dot_escape(os, r.labels[v]);
    if (r.corrupt.contains(v)) {
      os << " [style=filled, fillcolor=tomato]";
    } else if (r.leaves.contains(v)) {
      os << " [style=filled, fillcolor=lightblue]";
    } else if (r.unclassified.contains(v)) {
      os << " [style=filled, fillcolor=gold]";
    }
    os << ";\n";
  }
  const std::set<Edge> leaf(r.leaf_edges.begin(), r.leaf_edges.end());
  for (const Edge& e : r.perturbed.edges()) {
    os << "  ";
    dot_escape(os, r.labels[e.a]);
    os << " -- ";
    dot_escape(os, r.labels[e.b]);
    if (leaf.contains(e)) os << " [penwidth=2, color=blue]";
    os << ";\n";
  }
  os << "}\n";
}

std::string topology_to_json(const TopologyEstimate& est) {
  const auto& labels = est.labels;
  json provenance = json::array();
  for (const auto& [edge, origin] : est.provenance) {
    provenance.push_back({{"edge", {labels[edge.a], labels[edge.b]}}, {"origin", to_string(origin)}});
  }
  json components = json::array();
  for (const NodeSet& c : est.components_before_placement) components.push_back(nodes_json(c, labels));
  json trials = json::array();
  for (const PlacementTrial& t : est.trials) {
    trials.push_back({{"components", {t.component_a, t.component_b}},
                      {"corrupt", labels[t.corrupt]},
                      {"alignment", {labels[t.p], labels[t.q], labels[t.corrupt], labels[t.r], labels[t.s]}},
                      {"phase_score", t.phase_score},
                      {"passed", t.passed}});
  }
  json doc{{"graph", graph_json(est.graph, labels)},
           {"is_tree", is_tree(est.graph)},
           {"provenance", provenance},
           {"observed_support", graph_json(est.observed_support, labels)},
           {"components_before_placement", components},
           {"placement_trials", trials},
           {"diagnostics", diagnostics_json(est.diagnostics, labels)}};
  return doc.dump(2);
}

void write_topology_dot(std::ostream& os, const TopologyEstimate& est) {
  os << "graph topology {\n";
  for (NodeId v = 0; v < est.labels.size(); ++v) {
    os << "  ";
    dot_escape(os, est.labels[v]);
    os << ";\n";
  }
  for (const Edge& e : est.graph.edges()) {
    os << "  ";
    dot_escape(os, est.labels[e.a]);
    os << " -- ";
    dot_escape(os, est.labels[e.b]);
    const auto it = est.provenance.find(e);
    if (it != est.provenance.end()) {
      switch (it->second) {
        case EdgeOrigin::Leaf: os << " [color=blue]"; break;
        case EdgeOrigin::Separation: os << " [color=black]"; break;
        case EdgeOrigin::Placement: os << " [color=red]"; break;
      }
    }
    os << ";\n";
  }
  os << "}\n";
}

}  // namespace topolearn
