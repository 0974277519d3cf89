#include "matrix_io.hpp"

#include "error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace diffgraph::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "write to '" + path + "' failed");
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], values[i]);
    if (!numeric) {
      require(rows.empty() && line_no == 1, ErrorCode::Parse,
              path + ":" + std::to_string(line_no) + ": non-numeric field");
      if (header) *header = fields;
      width = fields.size();
      continue;
    }
    if (width == 0) width = values.size();
    require(values.size() == width, ErrorCode::Parse,
            path + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, got " +
                std::to_string(values.size()));
    rows.push_back(std::move(values));
  }
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return out;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& a, const std::vector<std::string>& header) {
  std::string text;
  text.reserve(static_cast<std::size_t>(a.size()) * 12);
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) text.push_back(',');
      text += header[i];
    }
    text.push_back('\n');
  }
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      if (c) text.push_back(',');
      text += format_double(a(r, c));
    }
    text.push_back('\n');
  }
  write_text_file(path, text);
}

BlockMatrix read_block_csv(const std::string& path, Index block_size) {
  return BlockMatrix(read_csv_matrix(path), block_size);
}

std::string block_to_json_text(const BlockMatrix& a) {
  nlohmann::json j;
  j["m"] = a.block_size();
  j["p"] = a.nodes();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(a.dense().size()));
  for (Index r = 0; r < a.side(); ++r)
    for (Index c = 0; c < a.side(); ++c) data.push_back(a.dense()(r, c));
  j["data"] = std::move(data);
  return j.dump();
}

BlockMatrix block_from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid matrix JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("m") && j.contains("p") && j.contains("data"), ErrorCode::Parse,
          "matrix JSON must contain m, p and data");
  try {
    const auto m = j["m"].get<Index>();
    const auto p = j["p"].get<Index>();
    require(m > 0 && p > 0, ErrorCode::Parse, "matrix JSON: m and p must be positive");
    const auto& data = j["data"];
    const Index side = m * p;
    require(data.is_array() && static_cast<Index>(data.size()) == side * side, ErrorCode::Parse,
            "matrix JSON: data length must equal (m*p)^2");
    Eigen::MatrixXd dense(side, side);
    for (Index r = 0; r < side; ++r)
      for (Index c = 0; c < side; ++c) dense(r, c) = data[static_cast<std::size_t>(r * side + c)].get<double>();
    return BlockMatrix(std::move(dense), m);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid matrix JSON: ") + e.what());
  }
}

void write_block_json(const std::string& path, const BlockMatrix& a) { write_text_file(path, block_to_json_text(a)); }

BlockMatrix read_block_json(const std::string& path) { return block_from_json_text(read_text_file(path)); }

}  // namespace diffgraph::io
