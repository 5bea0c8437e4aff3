#include "rmrc/io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

using namespace rmrc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rmrc_test_io";
  fs::create_directories(dir);
  return dir / name;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

TEST(Coefficients, RoundTripIsBitExact) {
  Vector u(6);
  u << 0.0, -0.0, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(), -1e308, 7.25;
  const Vector back = io::decode_coefficients(io::encode_coefficients(u));
  ASSERT_EQ(back.size(), u.size());
  for (Index i = 0; i < u.size(); ++i) EXPECT_TRUE(bit_equal(back(i), u(i)));
}

TEST(Coefficients, LayoutIsMagicCountPayload) {
  Vector u(2);
  u << 1.0, 2.0;
  const std::string bytes = io::encode_coefficients(u);
  EXPECT_EQ(bytes.size(), 5u + 4u + 16u);
  EXPECT_EQ(bytes.substr(0, 5), "RMRC1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 2u);
}

TEST(Coefficients, CorruptInputIsRejected) {
  std::string bytes = io::encode_coefficients(Vector::Ones(3));
  EXPECT_THROW(io::decode_coefficients(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
  bytes[0] = 'X';
  EXPECT_THROW(io::decode_coefficients(bytes), std::runtime_error);
}

TEST(Snapshots, FileAndMetadataRoundTrip) {
  Snapshot s;
  s.coefficients = Vector::LinSpaced(9, -1.0, 1.0);
  s.parameter = ParameterVector(2, {0.1, -0.25, 1.0, -1.0});
  s.seed = 77;
  s.index = 12;
  const fs::path path = scratch("snap.rmrc");
  io::write_snapshot(path, s, 2);
  const Snapshot back = io::read_snapshot(path);
  EXPECT_EQ(back.coefficients, s.coefficients);
  ASSERT_TRUE(back.parameter.has_value());
  EXPECT_EQ(*back.parameter, *s.parameter);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.index, 12);
}

TEST(Snapshots, MissingFileNamesThePath) {
  try {
    io::read_snapshot(scratch("does-not-exist.rmrc"));
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("does-not-exist"), std::string::npos);
  }
}

TEST(Doubles, ShortestFormParsesBack) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    EXPECT_TRUE(bit_equal(io::parse_double(io::format_double(v)), v));
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_THROW(io::parse_double("1.0x"), std::runtime_error);
}

TEST(Tables, CsvRoundTrip) {
  io::Table t{{"method", "m", "error_V"}, {{"wca", "10", io::format_double(0.1 + 0.2)}, {"one", "20", "1e-05"}}};
  const fs::path path = scratch("table.csv");
  io::write_table(path, t);
  const io::Table back = io::read_table(path);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_TRUE(bit_equal(io::parse_double(back.rows[0][2]), 0.1 + 0.2));
}

TEST(Tables, HeaderOnly) {
  const fs::path path = scratch("empty.csv");
  io::write_table(path, {{"a", "b"}, {}});
  const io::Table back = io::read_table(path);
  EXPECT_EQ(back.header.size(), 2u);
  EXPECT_TRUE(back.rows.empty());
}
