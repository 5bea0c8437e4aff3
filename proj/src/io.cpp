#include "rmrc/io.hpp"

#include "rmrc/errors.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rmrc::io {

namespace {

constexpr std::string_view kMagic = "RMRC1";

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::filesystem::path meta_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta");
}

}  // namespace

std::string encode_coefficients(const Vector& u) {
  std::string out(kMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(u.size()));
  for (Index i = 0; i < u.size(); ++i) put_le<double>(out, u(i));
  return out;
}

Vector decode_coefficients(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic)
    throw std::runtime_error("decode_coefficients: bad magic");
  const auto count = get_le<std::uint32_t>(bytes, kMagic.size());
  const std::size_t expected = kMagic.size() + 4 + 8 * static_cast<std::size_t>(count);
  if (bytes.size() != expected) throw std::runtime_error("decode_coefficients: truncated or oversized payload");
  Vector u(count);
  for (std::uint32_t i = 0; i < count; ++i) u(i) = get_le<double>(bytes, kMagic.size() + 4 + 8 * i);
  return u;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s, int level) {
  write_file(path, encode_coefficients(s.coefficients));
  std::ostringstream meta;
  meta << "level=" << level << '\n';
  if (s.parameter) {
    meta << "p=" << s.parameter->p() << '\n' << "parameter=";
    bool first = true;
    for (double v : s.parameter->values()) {
      meta << (first ? "" : ",") << format_double(v);
      first = false;
    }
    meta << '\n';
  }
  meta << "seed=" << s.seed << '\n' << "index=" << s.index << '\n';
  write_file(meta_path(path), meta.str());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  Snapshot s;
  s.coefficients = decode_coefficients(read_file(path));
  const auto mp = meta_path(path);
  if (!std::filesystem::exists(mp)) return s;
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(mp));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (kv.count("seed")) s.seed = std::stoull(kv["seed"]);
  if (kv.count("index")) s.index = std::stoll(kv["index"]);
  if (kv.count("p") && kv.count("parameter")) {
    std::vector<double> values;
    for (const auto& tok : split(kv["parameter"], ',')) values.push_back(parse_double(tok));
    s.parameter = ParameterVector(std::stoi(kv["p"]), std::move(values));
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_double: invalid number '" + std::string(s) + "'");
  return v;
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("write_table: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  write_file(path, out.str());
}

Table read_table(const std::filesystem::path& path) {
  Table t;
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line, ','));
  }
  return t;
}

}  // namespace rmrc::io
