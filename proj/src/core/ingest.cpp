#include "ingest.hpp"

#include "blockmat.hpp"
#include "error.hpp"
#include "matrix_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace diffgraph {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kKelvinOffset = 273.15;
constexpr double kDegenerateRatio = 1e-10;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    require(it != header.end(), ErrorCode::InvalidArgument, "unknown column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
};

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = io::split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    require(fields.size() == t.header.size(), ErrorCode::Parse,
            "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  require(!t.header.empty(), ErrorCode::Parse, "input has no header row");
  return t;
}

double cell_value(const std::string& field) {
  if (field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == "null") return kNaN;
  double v = 0.0;
  require(io::parse_double(field, v), ErrorCode::Parse, "non-numeric value '" + field + "'");
  return v;
}

std::string zero_pad(const std::string& field, int width) {
  double v = 0.0;
  require(io::parse_double(field, v), ErrorCode::Parse, "non-numeric date component '" + field + "'");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*ld", width, static_cast<long>(v));
  return buf;
}

/// Time key per row plus the calendar-day part used for daily averaging.
struct TimeKeys {
  std::vector<std::string> full;
  std::vector<std::string> day;
};

TimeKeys time_keys(const Table& t, const IngestOptions& opt) {
  TimeKeys keys;
  if (!opt.time_column.empty()) {
    const std::size_t c = t.column(opt.time_column);
    for (const auto& row : t.rows) {
      const std::string& v = row[c];
      keys.full.push_back(v);
      const auto cut = v.find_first_of(" T");
      keys.day.push_back(cut == std::string::npos ? v : v.substr(0, cut));
    }
    return keys;
  }
  if (t.has("year") && t.has("month") && t.has("day")) {
    const std::size_t y = t.column("year"), mo = t.column("month"), d = t.column("day");
    const bool has_hour = t.has("hour");
    const std::size_t h = has_hour ? t.column("hour") : 0;
    for (const auto& row : t.rows) {
      const std::string date = zero_pad(row[y], 4) + "-" + zero_pad(row[mo], 2) + "-" + zero_pad(row[d], 2);
      keys.day.push_back(date);
      keys.full.push_back(has_hour ? date + " " + zero_pad(row[h], 2) : date);
    }
    return keys;
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    keys.full.push_back(std::to_string(i));
    keys.day.push_back(std::to_string(i));
  }
  return keys;
}

bool time_less(const std::string& a, const std::string& b) {
  double x = 0.0, y = 0.0;
  if (io::parse_double(a, x) && io::parse_double(b, y)) return x < y;
  return a < b;
}

void check_monotone(const std::vector<std::string>& keys, bool strict, const std::string& what) {
  for (std::size_t i = 1; i < keys.size(); ++i) {
    const bool bad = strict ? !time_less(keys[i - 1], keys[i]) : time_less(keys[i], keys[i - 1]);
    require(!bad, ErrorCode::InvalidArgument,
            "non-monotone timestamps" + what + ": '" + keys[i - 1] + "' then '" + keys[i] + "'");
  }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

/// Per-time rows of a single site (long) or of the whole table (wide), in file order.
struct Series {
  std::vector<std::string> keys;
  std::vector<std::string> days;
  Eigen::MatrixXd values;  // rows x columns
};

Series average_days(const Series& in) {
  Series out;
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < in.days.size(); ++i)
    if (i == 0 || in.days[i] != in.days[i - 1]) starts.push_back(i);
  starts.push_back(in.days.size());
  out.values = Eigen::MatrixXd(static_cast<Index>(starts.size() - 1), in.values.cols());
  for (std::size_t g = 0; g + 1 < starts.size(); ++g) {
    out.keys.push_back(in.days[starts[g]]);
    out.days.push_back(in.days[starts[g]]);
    for (Index c = 0; c < in.values.cols(); ++c) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t r = starts[g]; r < starts[g + 1]; ++r) {
        const double v = in.values(static_cast<Index>(r), c);
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
      }
      out.values(static_cast<Index>(g), c) = count > 0 ? sum / count : kNaN;
    }
  }
  return out;
}

void fill_missing(FeaturePanel& panel) {
  Eigen::MatrixXd& v = panel.values;
  for (Index c = 0; c < v.cols(); ++c) {
    Index first = -1;
    for (Index r = 0; r < v.rows(); ++r) {
      if (std::isnan(v(r, c))) continue;
      first = r;
      break;
    }
    require(first >= 0, ErrorCode::InvalidArgument, "column '" + panel.column_names[c] + "' has no values");
    for (Index r = 0; r < first; ++r) {
      v(r, c) = v(first, c);
      panel.imputed.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }
    for (Index r = first + 1; r < v.rows(); ++r) {
      if (!std::isnan(v(r, c))) continue;
      v(r, c) = v(r - 1, c);
      panel.imputed.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }
  }
  std::sort(panel.imputed.begin(), panel.imputed.end(),
            [](const ImputedCell& a, const ImputedCell& b) { return a.row != b.row ? a.row < b.row : a.column < b.column; });
}

FeaturePanel load_long(const Table& t, const IngestOptions& opt) {
  require(!opt.features.empty(), ErrorCode::InvalidArgument, "long layout needs the feature list");
  const std::size_t site_col = t.column(opt.site_column);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : opt.features) feature_cols.push_back(t.column(f));
  for (const auto& k : opt.kelvin_columns)
    require(contains(opt.features, k), ErrorCode::InvalidArgument, "kelvin column '" + k + "' is not a selected feature");

  std::vector<std::string> sites = opt.sites;
  if (sites.empty()) {
    for (const auto& row : t.rows)
      if (!contains(sites, row[site_col])) sites.push_back(row[site_col]);
  }
  require(!sites.empty(), ErrorCode::InvalidArgument, "no sites found");
  std::unordered_map<std::string, std::size_t> site_index;
  for (std::size_t i = 0; i < sites.size(); ++i) site_index[sites[i]] = i;

  const TimeKeys keys = time_keys(t, opt);
  std::vector<std::vector<std::size_t>> rows_of(sites.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto it = site_index.find(t.rows[r][site_col]);
    if (it != site_index.end()) rows_of[it->second].push_back(r);
  }

  std::vector<Series> per_site;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    require(!rows_of[s].empty(), ErrorCode::InvalidArgument, "site '" + sites[s] + "' has no rows");
    Series ser;
    ser.values = Eigen::MatrixXd(static_cast<Index>(rows_of[s].size()), static_cast<Index>(feature_cols.size()));
    for (std::size_t i = 0; i < rows_of[s].size(); ++i) {
      const auto& row = t.rows[rows_of[s][i]];
      ser.keys.push_back(keys.full[rows_of[s][i]]);
      ser.days.push_back(keys.day[rows_of[s][i]]);
      for (std::size_t f = 0; f < feature_cols.size(); ++f) {
        double v = cell_value(row[feature_cols[f]]);
        if (!std::isnan(v) && contains(opt.kelvin_columns, opt.features[f])) v += kKelvinOffset;
        ser.values(static_cast<Index>(i), static_cast<Index>(f)) = v;
      }
    }
    check_monotone(ser.keys, true, " at site '" + sites[s] + "'");
    per_site.push_back(opt.hourly ? average_days(ser) : std::move(ser));
  }

  const auto& ref = per_site.front().keys;
  for (std::size_t s = 1; s < per_site.size(); ++s)
    require(per_site[s].keys == ref, ErrorCode::InvalidArgument,
            "site '" + sites[s] + "' does not share the time index of site '" + sites[0] + "'");

  FeaturePanel panel;
  panel.feature_names = opt.features;
  panel.site_names = sites;
  panel.timestamps = ref;
  panel.daily_averaged = opt.hourly;
  const Index p = static_cast<Index>(opt.features.size());
  const Index m = static_cast<Index>(sites.size());
  panel.values = Eigen::MatrixXd(static_cast<Index>(ref.size()), m * p);
  for (Index f = 0; f < p; ++f)
    for (Index s = 0; s < m; ++s) {
      panel.values.col(f * m + s) = per_site[static_cast<std::size_t>(s)].values.col(f);
      panel.column_names.push_back(opt.features[f] + "@" + sites[s]);
    }
  return panel;
}

FeaturePanel load_wide(const Table& t, const IngestOptions& opt) {
  require(opt.block_size >= 1, ErrorCode::InvalidArgument, "wide layout needs block_size (sites per feature)");
  std::vector<std::string> cols = opt.columns;
  if (cols.empty()) {
    static const std::vector<std::string> time_parts = {"year", "month", "day", "hour", "No"};
    for (const auto& h : t.header)
      if (h != opt.time_column && !contains(time_parts, h)) cols.push_back(h);
  }
  require(!cols.empty() && cols.size() % static_cast<std::size_t>(opt.block_size) == 0, ErrorCode::InvalidArgument,
          "wide layout: " + std::to_string(cols.size()) + " value columns is not a multiple of block_size " +
              std::to_string(opt.block_size));
  for (const auto& k : opt.kelvin_columns)
    require(contains(cols, k), ErrorCode::InvalidArgument, "kelvin column '" + k + "' is not a selected column");
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(t.column(c));

  const TimeKeys keys = time_keys(t, opt);
  Series ser;
  ser.keys = keys.full;
  ser.days = keys.day;
  ser.values = Eigen::MatrixXd(static_cast<Index>(t.rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double v = cell_value(t.rows[r][idx[c]]);
      if (!std::isnan(v) && contains(opt.kelvin_columns, cols[c])) v += kKelvinOffset;
      ser.values(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  check_monotone(ser.keys, true, "");
  if (opt.hourly) ser = average_days(ser);

  FeaturePanel panel;
  const std::size_t m = static_cast<std::size_t>(opt.block_size);
  for (std::size_t s = 0; s < m; ++s) panel.site_names.push_back("site" + std::to_string(s + 1));
  for (std::size_t f = 0; f < cols.size() / m; ++f) panel.feature_names.push_back(cols[f * m]);
  panel.column_names = cols;
  panel.timestamps = ser.keys;
  panel.values = std::move(ser.values);
  panel.daily_averaged = opt.hourly;
  return panel;
}

}  // namespace

FeaturePanel panel_from_csv_text(const std::string& text, const IngestOptions& options) {
  require(options.zero_offset > 0.0, ErrorCode::InvalidArgument, "zero_offset must be positive");
  const Table t = parse_table(text);
  require(!t.rows.empty(), ErrorCode::InvalidArgument, "input has no data rows");
  FeaturePanel panel = options.site_column.empty() ? load_wide(t, options) : load_long(t, options);
  fill_missing(panel);
  return panel;
}

FeaturePanel load_panel(const std::string& path, const IngestOptions& options) {
  return panel_from_csv_text(io::read_text_file(path), options);
}

std::pair<double, double> line_fit(const Eigen::VectorXd& z) {
  const Index n = z.size();
  require(n >= 2, ErrorCode::InvalidArgument, "line fit needs at least 2 points");
  const double tbar = 0.5 * static_cast<double>(n - 1);
  const double zbar = z.mean();
  double stt = 0.0, stz = 0.0;
  for (Index t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - tbar;
    stt += dt * dt;
    stz += dt * (z(t) - zbar);
  }
  const double slope = stz / stt;
  return {slope, zbar - slope * tbar};
}

Eigen::VectorXd detrend(const Eigen::VectorXd& z) {
  const auto [slope, intercept] = line_fit(z);
  Eigen::VectorXd out(z.size());
  for (Index t = 0; t < z.size(); ++t) out(t) = z(t) - (intercept + slope * static_cast<double>(t));
  return out;
}

Preprocessed preprocess(const FeaturePanel& panel, double zero_offset) {
  require(zero_offset > 0.0, ErrorCode::InvalidArgument, "zero_offset must be positive");
  const Index rows = panel.values.rows();
  const Index cols = panel.values.cols();
  require(rows >= 3, ErrorCode::InvalidArgument, "series are shorter than 3 rows");

  Preprocessed out;
  out.report.rows_in = static_cast<std::size_t>(rows);
  out.report.rows_out = static_cast<std::size_t>(rows - 1);
  out.report.zero_offset = zero_offset;
  out.report.zero_offsets.assign(static_cast<std::size_t>(cols), 0);
  out.data = Eigen::MatrixXd(rows - 1, cols);

  for (Index c = 0; c < cols; ++c) {
    Eigen::VectorXd z = panel.values.col(c);
    const std::string& name = c < static_cast<Index>(panel.column_names.size()) ? panel.column_names[c] : std::to_string(c);
    for (Index t = 0; t < rows; ++t) {
      require(std::isfinite(z(t)), ErrorCode::InvalidArgument, "column '" + name + "' has a missing value");
      if (z(t) == 0.0) {
        z(t) = zero_offset;
        ++out.report.zero_offsets[static_cast<std::size_t>(c)];
      }
      require(z(t) > 0.0, ErrorCode::InvalidArgument,
              "column '" + name + "' has a negative value at row " + std::to_string(t));
    }
    Eigen::VectorXd lr(rows - 1);
    for (Index t = 1; t < rows; ++t) lr(t - 1) = std::log(z(t) / z(t - 1));
    Eigen::VectorXd d = detrend(lr);
    const double rms = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
    const double lr_rms = std::sqrt(lr.squaredNorm() / static_cast<double>(lr.size()));
    if (rms == 0.0 || rms <= kDegenerateRatio * lr_rms) {
      out.data.col(c).setZero();
      out.report.degenerate_columns.push_back(static_cast<std::size_t>(c));
      continue;
    }
    out.data.col(c) = d / rms;
  }
  return out;
}

std::string report_json(const FeaturePanel& panel, const Preprocessed& result) {
  using nlohmann::json;
  const auto& r = result.report;
  json offsets = json::object();
  for (std::size_t c = 0; c < r.zero_offsets.size(); ++c)
    if (r.zero_offsets[c] > 0) offsets[panel.column_names.at(c)] = r.zero_offsets[c];
  json degenerate = json::array();
  for (auto c : r.degenerate_columns) degenerate.push_back(panel.column_names.at(c));
  json imputed = json::array();
  for (const auto& cell : panel.imputed)
    imputed.push_back({{"row", cell.row}, {"timestamp", panel.timestamps.at(cell.row)},
                       {"column", panel.column_names.at(cell.column)}});
  json j = {
      {"rows_in", r.rows_in},
      {"rows_out", r.rows_out},
      {"nodes", panel.feature_names},
      {"attributes", panel.site_names},
      {"columns", panel.column_names},
      {"daily_averaged", panel.daily_averaged},
      {"zero_offset", r.zero_offset},
      {"zero_offsets_applied", offsets},
      {"imputed_cells", imputed},
      {"imputed_count", panel.imputed.size()},
      {"degenerate_columns", degenerate},
  };
  return j.dump(2) + "\n";
}

}  // namespace diffgraph
