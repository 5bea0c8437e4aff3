#include "rmrc/recovery.hpp"

#include "rmrc/errors.hpp"
#include "rmrc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

namespace rmrc {

Vector AffineRecoveryMap::complement(const Vector& w) const {
  if (w.size() != m) throw InvalidArgument("AffineRecoveryMap: measurement has length " + std::to_string(w.size()) +
                                           ", expected " + std::to_string(m));
  return c + B * w;
}

Vector AffineRecoveryMap::apply_coordinates(const Vector& w) const {
  Vector out(m + n_complement);
  out.head(m) = w;
  out.tail(n_complement) = complement(w);
  return out;
}

AffineRecoveryMap minimal_norm_map(Index m, Index n_complement) {
  AffineRecoveryMap map;
  map.method = "mvn";
  map.m = m;
  map.n_complement = n_complement;
  map.B = Matrix::Zero(n_complement, m);
  map.c = Vector::Zero(n_complement);
  return map;
}

AffineRecoveryMap one_space_map(const FavorablePair& pair, const AmbientBasis& ambient) {
  const Index m = ambient.m, nc = ambient.n_complement, n = pair.n();
  if (pair.m() != m) throw InvalidArgument("one_space_map: favorable W basis does not match the ambient measurement block");
  AffineRecoveryMap map = minimal_norm_map(m, nc);
  map.method = "one";
  map.basis_fingerprint = ambient.fingerprint();
  if (n == 0) return map;
  if (pair.s(n - 1) <= kSingularFloor)
    throw UnstableSpace("one_space_map: s_n = " + std::to_string(pair.s(n - 1)) + ", V_n meets the complement of W");
  const Matrix psi = ambient.coordinates(pair.w.vectors).topRows(m);  // m x m
  const Matrix phi = ambient.coordinates(pair.v.vectors);             // (m+N) x n
  const Vector inv_s = pair.s.cwiseInverse();
  map.B = phi.bottomRows(nc) * inv_s.asDiagonal() * psi.leftCols(n).transpose();
  return map;
}

AffineRecoveryMap affine_one_space_map(const FavorablePair& pair, const Vector& offset, const AmbientBasis& ambient) {
  AffineRecoveryMap map = one_space_map(pair, ambient);
  const Vector coords = ambient.coordinates(offset);
  map.c = coords.tail(ambient.n_complement) - map.B * coords.head(ambient.m);
  map.offset = offset;
  return map;
}

Matrix msa_coefficients(const Matrix& s11, const Matrix& s21, double rel_tol) {
  if (s11.rows() != s11.cols() || s21.cols() != s11.rows())
    throw InvalidArgument("msa_coefficients: inconsistent covariance blocks");
  return s21 * pinv_psd(s11, rel_tol);
}

AffineRecoveryMap msa_fit(const Matrix& w, const Matrix& perp, double rel_tol, double ridge) {
  const Index j = w.cols();
  if (j < 1 || perp.cols() != j) throw InvalidArgument("msa_fit: needs J >= 1 matching columns");
  const Vector mean_w = w.rowwise().mean();
  const Vector mean_p = perp.rowwise().mean();
  const Matrix wc = w.colwise() - mean_w;
  const Matrix pc = perp.colwise() - mean_p;
  Matrix s11 = (wc * wc.transpose()) / static_cast<double>(j);
  const Matrix s21 = (pc * wc.transpose()) / static_cast<double>(j);
  if (ridge > 0.0) s11.diagonal().array() += ridge;
  AffineRecoveryMap map;
  map.method = "msa";
  map.m = w.rows();
  map.n_complement = perp.rows();
  map.B = msa_coefficients(s11, s21, rel_tol);
  map.c = mean_p - map.B * mean_w;
  return map;
}

Vector apply_map(const AffineRecoveryMap& map, const Vector& w, const AmbientBasis& ambient) {
  if (map.m != ambient.m || map.n_complement != ambient.n_complement)
    throw InvalidArgument("apply_map: map and ambient basis dimensions differ");
  return ambient.basis.expand(map.apply_coordinates(w));
}

OneSpaceLift lifting_to_one_space(const Matrix& B, const Vector& c) {
  const Index nc = B.rows(), m = B.cols();
  if (c.size() != nc) throw InvalidArgument("lifting_to_one_space: offset length differs from B rows");
  OneSpaceLift lift;
  lift.ambient = AmbientBasis::canonical(m, nc);
  lift.offset = Vector::Zero(m + nc);
  lift.offset.tail(nc) = c;

  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index r = std::min(nc, m);
  lift.alpha = r > 0 ? Vector(svd.singularValues()) : Vector(0);
  const double floor = kSingularFloor * std::max(1.0, r > 0 ? lift.alpha(0) : 0.0);

  // Nonzero alpha give V_n; s = (1 + alpha^2)^{-1/2} is nonincreasing for ascending alpha.
  std::vector<Index> active;
  for (Index j = r - 1; j >= 0; --j) {
    if (lift.alpha(j) > floor) active.push_back(j);
  }
  const Index n = static_cast<Index>(active.size());
  std::vector<Index> order = active;
  for (Index j = 0; j < m; ++j) {
    if (std::find(active.begin(), active.end(), j) == active.end()) order.push_back(j);
  }

  Matrix psi = Matrix::Zero(m + nc, m);
  for (Index k = 0; k < m; ++k) psi.col(k).head(m) = svd.matrixV().col(order[static_cast<std::size_t>(k)]);
  Matrix phi = Matrix::Zero(m + nc, n);
  lift.pair.s.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index j = active[static_cast<std::size_t>(k)];
    const double a = lift.alpha(j);
    const double s = 1.0 / std::sqrt(1.0 + a * a);
    phi.col(k) = s * psi.col(k);
    phi.col(k).tail(nc) += s * a * svd.matrixU().col(j);
    lift.pair.s(k) = s;
  }
  lift.pair.w = {std::move(psi), Metric()};
  lift.pair.v = {std::move(phi), Metric()};
  return lift;
}

Index select_nstar(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("select_nstar: empty error table");
  Index best = 0;
  for (std::size_t n = 1; n < errors.size(); ++n) {
    if (errors[n] < errors[static_cast<std::size_t>(best)]) best = static_cast<Index>(n);
  }
  return best + 1;
}

void write_map(const std::filesystem::path& path, const AffineRecoveryMap& map) {
  std::ostringstream out;
  out << "RMRC-MAP 1\n"
      << "method=" << map.method << '\n'
      << "m=" << map.m << '\n'
      << "N=" << map.n_complement << '\n'
      << "fingerprint=" << map.basis_fingerprint << '\n'
      << "end\n";
  std::string bytes = out.str();
  auto put = [&bytes](double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    bytes.append(buf, 8);
  };
  for (Index i = 0; i < map.n_complement; ++i)
    for (Index k = 0; k < map.m; ++k) put(map.B(i, k));
  for (Index i = 0; i < map.n_complement; ++i) put(map.c(i));
  io::write_file(path, bytes);
}

AffineRecoveryMap read_map(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  const std::string terminator = "end\n";
  const auto stop = bytes.find(terminator);
  if (bytes.rfind("RMRC-MAP 1\n", 0) != 0 || stop == std::string::npos)
    throw std::runtime_error("read_map: " + path.string() + " is not a recovery map file");
  std::map<std::string, std::string> kv;
  std::istringstream header(bytes.substr(0, stop));
  for (std::string line; std::getline(header, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  AffineRecoveryMap map;
  map.method = kv["method"];
  map.m = std::stoll(kv.at("m"));
  map.n_complement = std::stoll(kv.at("N"));
  map.basis_fingerprint = std::stoull(kv.at("fingerprint"));
  std::size_t pos = stop + terminator.size();
  const std::size_t need = 8 * static_cast<std::size_t>(map.n_complement * (map.m + 1));
  if (bytes.size() - pos != need) throw std::runtime_error("read_map: payload size mismatch in " + path.string());
  auto get = [&]() {
    double v;
    std::memcpy(&v, bytes.data() + pos, 8);
    pos += 8;
    return v;
  };
  map.B.resize(map.n_complement, map.m);
  map.c.resize(map.n_complement);
  for (Index i = 0; i < map.n_complement; ++i)
    for (Index k = 0; k < map.m; ++k) map.B(i, k) = get();
  for (Index i = 0; i < map.n_complement; ++i) map.c(i) = get();
  return map;
}

}  // namespace rmrc
