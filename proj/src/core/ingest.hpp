#pragma once

#include <Eigen/Dense>

#include <utility>

#include <cstddef>
#include <string>
#include <vector>

namespace diffgraph {

/// File layout and column choices for load_panel.
///
/// Long layout (site_column set): one row per (time, site); every feature is a column.
/// Wide layout: one row per time; the chosen columns are already ordered node-major
/// [feature1-site1..siteM, feature2-site1..siteM, ...] and block_size gives M.
/// Time comes from time_column, or from year/month/day[/hour] columns when those exist.
struct IngestOptions {
  std::vector<std::string> features;  // node order; long layout: required
  std::vector<std::string> sites;     // attribute order; long layout: empty means order of first appearance
  std::string site_column;
  std::string time_column;
  std::vector<std::string> columns;  // wide layout: explicit column order; empty means every value column
  long block_size = 0;               // wide layout only
  bool hourly = false;               // average rows sharing a calendar day
  std::vector<std::string> kelvin_columns;  // features (long) or columns (wide) converted with +273.15
  double zero_offset = 1e-4;
};

struct ImputedCell {
  std::size_t row = 0;
  std::size_t column = 0;
};

struct FeaturePanel {
  Eigen::MatrixXd values;  // rows = days (or raw times), columns node-major
  std::vector<std::string> feature_names;
  std::vector<std::string> site_names;
  std::vector<std::string> column_names;
  std::vector<std::string> timestamps;
  std::vector<ImputedCell> imputed;
  bool daily_averaged = false;
  long block_size() const { return static_cast<long>(site_names.size()); }
};

struct PreprocessReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::vector<std::size_t> zero_offsets;  // per column: cells raised by the offset
  std::vector<std::size_t> degenerate_columns;
  double zero_offset = 0.0;
};

struct Preprocessed {
  Eigen::MatrixXd data;  // (rows_in - 1) x columns
  PreprocessReport report;
};

FeaturePanel load_panel(const std::string& path, const IngestOptions& options);
FeaturePanel panel_from_csv_text(const std::string& text, const IngestOptions& options);

/// Per column: zero offset, log-ratio, least-squares line removal, scaling to unit mean square.
/// A column whose detrended series vanishes is returned as zeros and listed as degenerate.
Preprocessed preprocess(const FeaturePanel& panel, double zero_offset = 1e-4);

/// Least-squares straight-line removal against t = 0..n-1.
Eigen::VectorXd detrend(const Eigen::VectorXd& z);

/// Slope and intercept of the least-squares line through (t, z_t), t = 0..n-1.
std::pair<double, double> line_fit(const Eigen::VectorXd& z);

std::string report_json(const FeaturePanel& panel, const Preprocessed& result);

}  // namespace diffgraph
