#include "core/error.hpp"
#include "core/matrix_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace diffgraph;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "diffgraph_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no diffgraph::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  oracle::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.integer(-20, 20));
    double back = 0.0;
    ASSERT_TRUE(io::parse_double(io::format_double(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(ParseDouble, RejectsJunk) {
  double v = 0.0;
  EXPECT_FALSE(io::parse_double("", v));
  EXPECT_FALSE(io::parse_double("1.5x", v));
  EXPECT_FALSE(io::parse_double("abc", v));
  EXPECT_TRUE(io::parse_double(" +2.5 ", v));
  EXPECT_EQ(v, 2.5);
}

TEST(SplitCsv, HonoursQuotes) {
  const auto f = io::split_csv_line("a, \"b,c\" ,d\r");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "d");
}

TEST(CsvMatrix, RoundTripWithHeader) {
  oracle::Rng rng(2);
  const Eigen::MatrixXd a = oracle::random_matrix(rng, 7, 3);
  const auto path = temp_file("m.csv").string();
  io::write_csv_matrix(path, a, {"x", "y", "z"});
  std::vector<std::string> header;
  const Eigen::MatrixXd back = io::read_csv_matrix(path, &header);
  EXPECT_EQ(back, a);
  EXPECT_EQ(header, (std::vector<std::string>{"x", "y", "z"}));
}

TEST(CsvMatrix, ErrorsCarryCodes) {
  EXPECT_EQ(code_of([] { io::read_csv_matrix("/nonexistent/file.csv"); }), ErrorCode::Io);
  const auto ragged = temp_file("ragged.csv").string();
  io::write_text_file(ragged, "1,2\n3\n");
  EXPECT_EQ(code_of([&] { io::read_csv_matrix(ragged); }), ErrorCode::Parse);
  const auto late_text = temp_file("late.csv").string();
  io::write_text_file(late_text, "1,2\n3,x\n");
  EXPECT_EQ(code_of([&] { io::read_csv_matrix(late_text); }), ErrorCode::Parse);
}

TEST(BlockJson, RoundTripIsRowMajor) {
  Eigen::MatrixXd d(2, 2);
  d << 1, 2, 3, 4;
  const std::string text = io::block_to_json_text(BlockMatrix(d, 1));
  EXPECT_NE(text.find("[1.0,2.0,3.0,4.0]"), std::string::npos) << text;
  EXPECT_EQ(io::block_from_json_text(text).dense(), d);

  oracle::Rng rng(4);
  const BlockMatrix a(oracle::random_matrix(rng, 6, 6), 3);
  const auto path = temp_file("b.json").string();
  io::write_block_json(path, a);
  const BlockMatrix back = io::read_block_json(path);
  EXPECT_EQ(back.block_size(), 3);
  EXPECT_EQ(back.dense(), a.dense());
}

TEST(BlockJson, MalformedInputIsAParseError) {
  EXPECT_EQ(code_of([] { io::block_from_json_text("{"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::block_from_json_text(R"({"m":1,"p":2,"data":[1,2,3]})"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::block_from_json_text(R"({"m":"a","p":2,"data":[]})"); }), ErrorCode::Parse);
  EXPECT_EQ(code_of([] { io::block_from_json_text(R"({"m":1})"); }), ErrorCode::Parse);
}
