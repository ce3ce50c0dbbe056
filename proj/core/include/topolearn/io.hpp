#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topolearn/corruption.hpp"
#include "topolearn/detection.hpp"
#include "topolearn/graph.hpp"
#include "topolearn/model.hpp"
#include "topolearn/reconstruction.hpp"
#include "topolearn/spectrum.hpp"

namespace topolearn {

// Models and corruption lists (JSON). Parse failures throw ConfigError.
GenerativeModel parse_model(std::string_view json_text);
GenerativeModel read_model(const std::filesystem::path& path);
std::string model_to_json(const GenerativeModel& model);

/// Corruption entries refer to nodes by label.
std::vector<CorruptionSpec> parse_corruption(std::string_view json_text, const std::vector<std::string>& labels);
std::string corruption_to_json(std::span<const CorruptionSpec> specs, const std::vector<std::string>& labels);

// Graphs.
std::string graph_to_json(const UndirectedGraph& g, const std::vector<std::string>& labels);
/// Returns the graph and fills `labels` with the declared node labels.
UndirectedGraph parse_graph(std::string_view json_text, std::vector<std::string>& labels);
void write_graph_dot(std::ostream& os, const UndirectedGraph& g, const std::vector<std::string>& labels,
                     std::string_view name = "G");

// Panels. CSV has a header row of labels and one column per node.
void write_panel_csv(std::ostream& os, const TimeSeriesPanel& panel);
TimeSeriesPanel read_panel_csv(std::istream& is, double dt = 1.0);

/// Binary panel: "RTSP", u32 version, u64 channels, u64 length, f64 dt, labels
/// (u32 size + bytes each), then length rows of channels little-endian f64.
class PanelWriter {
 public:
  PanelWriter(const std::filesystem::path& path, std::vector<std::string> labels, double dt = 1.0);
  ~PanelWriter();
  PanelWriter(const PanelWriter&) = delete;
  PanelWriter& operator=(const PanelWriter&) = delete;

  void write_rows(std::span<const double> rows);
  /// Patches the length field and closes the file.
  void close();
  std::size_t rows_written() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t channels_;
  std::size_t rows_ = 0;
  std::streampos length_field_;
  bool closed_ = false;
};

class PanelReader {
 public:
  explicit PanelReader(const std::filesystem::path& path);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t channel_count() const { return labels_.size(); }
  std::size_t length() const { return length_; }
  std::size_t remaining() const { return length_ - consumed_; }
  double dt() const { return dt_; }

  /// Reads up to out.size() / channels rows; returns the number of rows read.
  std::size_t read_rows(std::span<double> out);

 private:
  std::ifstream in_;
  std::vector<std::string> labels_;
  std::size_t length_ = 0;
  std::size_t consumed_ = 0;
  double dt_ = 1.0;
};

void write_panel_binary(const std::filesystem::path& path, const TimeSeriesPanel& panel);
TimeSeriesPanel read_panel_binary(const std::filesystem::path& path);

/// Reads either format, chosen by the file contents.
TimeSeriesPanel read_panel(const std::filesystem::path& path);

// Spectra.
/// Long format: omega,row,col,re,im,excluded.
void write_spectrum_csv(std::ostream& os, const SpectralMatrix& s);
SpectralMatrix read_spectrum_csv(std::istream& is);
/// Binary: "RTSM", u32 version, u64 nodes, u64 frequencies, labels, omegas, exclusion
/// flags (u8), then per frequency the row-major matrix as (re, im) f64 pairs.
void write_spectrum_binary(const std::filesystem::path& path, const SpectralMatrix& s);
SpectralMatrix read_spectrum_binary(const std::filesystem::path& path);
SpectralMatrix read_spectrum(const std::filesystem::path& path);
/// omega,row,col,magnitude,phase for every pair row <= col.
void write_spectrum_plot_csv(std::ostream& os, const SpectralMatrix& s);

// Reports.
std::string detection_to_json(const DetectionReport& report);
/// Inverse of detection_to_json (evidence and scores included).
DetectionReport parse_detection(std::string_view json_text);
void write_detection_dot(std::ostream& os, const DetectionReport& report);
std::string topology_to_json(const TopologyEstimate& estimate);
void write_topology_dot(std::ostream& os, const TopologyEstimate& estimate);

}  // namespace topolearn
