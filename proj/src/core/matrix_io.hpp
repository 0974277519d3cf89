#pragma once

#include "blockmat.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace diffgraph::io {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Reads a dense numeric CSV. A first row containing any non-numeric field is treated as a header.
Eigen::MatrixXd read_csv_matrix(const std::string& path, std::vector<std::string>* header = nullptr);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& a,
                      const std::vector<std::string>& header = {});

BlockMatrix read_block_csv(const std::string& path, Index block_size);

/// JSON envelope {"m": m, "p": p, "data": [row-major values]}.
std::string block_to_json_text(const BlockMatrix& a);
BlockMatrix block_from_json_text(std::string_view text);
void write_block_json(const std::string& path, const BlockMatrix& a);
BlockMatrix read_block_json(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);
bool parse_double(std::string_view field, double& out);

}  // namespace diffgraph::io
