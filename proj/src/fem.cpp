#include "rmrc/fem.hpp"

#include "rmrc/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace rmrc {

ParameterVector::ParameterVector(int p, std::vector<double> values) : p_(p), values_(std::move(values)) {
  if (p < 1) throw InvalidArgument("ParameterVector: p must be >= 1");
  if (values_.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(p))
    throw InvalidArgument("ParameterVector: expected p*p entries");
  for (double v : values_) {
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidArgument("ParameterVector: entries must lie in [-1, 1]");
  }
}

ParameterVector ParameterVector::constant(int p, double value) {
  return ParameterVector(p, std::vector<double>(static_cast<std::size_t>(p * p), value));
}

std::uint64_t ParameterVector::hash() const {
  Matrix m = Eigen::Map<const Matrix>(values_.data(), static_cast<Index>(values_.size()), 1);
  return fingerprint(m);
}

FemSpace FemSpace::build(int level) {
  if (level < kMinLevel || level > kMaxLevel)
    throw InvalidArgument("build_space: level must lie in [2, 12], got " + std::to_string(level));
  FemSpace s;
  s.level_ = level;
  s.n_ = 1 << level;
  const int n = s.n_;
  const double h = 1.0 / n;

  s.nodes_.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  s.interior_index_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const Index id = static_cast<Index>(s.nodes_.size());
      s.nodes_.push_back({i * h, j * h});
      if (i > 0 && i < n && j > 0 && j < n) {
        s.interior_index_[static_cast<std::size_t>(id)] = static_cast<Index>(s.interior_nodes_.size());
        s.interior_nodes_.push_back(id);
      }
    }
  }
  auto node = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
  s.triangles_.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      s.triangles_.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
      s.triangles_.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
    }
  }

  const Index ni = s.num_interior();
  std::vector<Eigen::Triplet<double>> k_trip, m_trip;
  k_trip.reserve(s.triangles_.size() * 9);
  m_trip.reserve(s.triangles_.size() * 9);
  s.element_stiffness_.resize(s.triangles_.size());
  const double area = s.element_area();
  for (std::size_t e = 0; e < s.triangles_.size(); ++e) {
    const auto& t = s.triangles_[e];
    std::array<double, 3> b{}, c{};
    for (int a = 0; a < 3; ++a) {
      const Point& p1 = s.nodes_[static_cast<std::size_t>(t[(a + 1) % 3])];
      const Point& p2 = s.nodes_[static_cast<std::size_t>(t[(a + 2) % 3])];
      b[a] = p1.y - p2.y;
      c[a] = p2.x - p1.x;
    }
    for (int a = 0; a < 3; ++a) {
      for (int bb = 0; bb < 3; ++bb) {
        const double kab = (b[a] * b[bb] + c[a] * c[bb]) / (4.0 * area);
        s.element_stiffness_[e][a * 3 + bb] = kab;
        const Index ia = s.interior_index(t[a]);
        const Index ib = s.interior_index(t[bb]);
        if (ia < 0 || ib < 0) continue;
        k_trip.emplace_back(ia, ib, kab);
        m_trip.emplace_back(ia, ib, area / 12.0 * (a == bb ? 2.0 : 1.0));
      }
    }
  }
  auto k = std::make_shared<SparseMatrix>(ni, ni);
  k->setFromTriplets(k_trip.begin(), k_trip.end());
  k->makeCompressed();
  auto m = std::make_shared<SparseMatrix>(ni, ni);
  m->setFromTriplets(m_trip.begin(), m_trip.end());
  m->makeCompressed();

  s.slots_.resize(s.triangles_.size());
  for (std::size_t e = 0; e < s.triangles_.size(); ++e) {
    const auto& t = s.triangles_[e];
    for (int a = 0; a < 3; ++a) {
      for (int bb = 0; bb < 3; ++bb) {
        const Index row = s.interior_index(t[a]);
        const Index col = s.interior_index(t[bb]);
        Index slot = -1;
        if (row >= 0 && col >= 0) {
          const auto* begin = k->innerIndexPtr() + k->outerIndexPtr()[col];
          const auto* end = k->innerIndexPtr() + k->outerIndexPtr()[col + 1];
          const auto* it = std::lower_bound(begin, end, static_cast<int>(row));
          slot = static_cast<Index>(it - k->innerIndexPtr());
        }
        s.slots_[e][a * 3 + bb] = slot;
      }
    }
  }
  s.stiffness_ = k;
  s.mass_ = m;
  s.v_metric_ = Metric(k);
  s.l2_metric_ = Metric(m);
  return s;
}

Point FemSpace::centroid(Index element) const {
  const auto& t = triangles_[static_cast<std::size_t>(element)];
  Point c;
  for (Index v : t) {
    c.x += nodes_[static_cast<std::size_t>(v)].x / 3.0;
    c.y += nodes_[static_cast<std::size_t>(v)].y / 3.0;
  }
  return c;
}

SparseMatrix FemSpace::weighted_stiffness(std::span<const double> element_weights) const {
  if (static_cast<Index>(element_weights.size()) != num_elements())
    throw InvalidArgument("weighted_stiffness: one weight per element expected");
  SparseMatrix a = *stiffness_;
  std::fill(a.valuePtr(), a.valuePtr() + a.nonZeros(), 0.0);
  double* values = a.valuePtr();
  for (std::size_t e = 0; e < slots_.size(); ++e) {
    const double w = element_weights[e];
    for (int q = 0; q < 9; ++q) {
      const Index slot = slots_[e][q];
      if (slot >= 0) values[slot] += w * element_stiffness_[e][q];
    }
  }
  return a;
}

Vector FemSpace::load(const Source& source) const {
  if (const auto* nodal = std::get_if<NodalLoad>(&source)) {
    if (nodal->load.size() != num_interior()) throw InvalidArgument("load: nodal load has wrong length");
    return nodal->load;
  }
  // Each interior node touches six elements, each contributing area/3.
  const double f = std::get<ConstantSource>(source).value;
  return Vector::Constant(num_interior(), f * 2.0 * element_area());
}

double FemSpace::evaluate(const Vector& u, Point p) const {
  if (u.size() != num_interior()) throw InvalidArgument("evaluate: coefficient length mismatch");
  const double x = std::clamp(p.x, 0.0, 1.0) * n_;
  const double y = std::clamp(p.y, 0.0, 1.0) * n_;
  const int i = std::min(static_cast<int>(std::floor(x)), n_ - 1);
  const int j = std::min(static_cast<int>(std::floor(y)), n_ - 1);
  const double s = x - i, r = y - j;
  auto value = [&](int a, int b) {
    const Index k = interior_index(static_cast<Index>(b * (n_ + 1) + a));
    return k < 0 ? 0.0 : u(k);
  };
  if (s >= r) return (1.0 - s) * value(i, j) + (s - r) * value(i + 1, j) + r * value(i + 1, j + 1);
  return (1.0 - r) * value(i, j) + s * value(i + 1, j + 1) + (r - s) * value(i, j + 1);
}

Vector FemSpace::prolongate(const Vector& u, const FemSpace& fine) const {
  if (fine.level() < level_) throw InvalidArgument("prolongate: target space is coarser");
  Vector out(fine.num_interior());
  for (Index k = 0; k < fine.num_interior(); ++k) {
    out(k) = evaluate(u, fine.nodes()[static_cast<std::size_t>(fine.node_of_interior(k))]);
  }
  return out;
}

std::vector<double> coefficient_field(const FemSpace& space, const ParameterVector& y) {
  const int p = y.p();
  std::vector<double> a(static_cast<std::size_t>(space.num_elements()));
  for (Index e = 0; e < space.num_elements(); ++e) {
    const Point c = space.centroid(e);
    const int i = std::min(static_cast<int>(std::floor(c.x * p)), p - 1);
    const int j = std::min(static_cast<int>(std::floor(c.y * p)), p - 1);
    a[static_cast<std::size_t>(e)] = 1.0 + 0.5 * y.at(i, j);
  }
  return a;
}

Vector solve_spd(const SparseMatrix& a, const Vector& rhs, int level, const SolverOptions& options) {
  if (a.rows() != rhs.size()) throw InvalidArgument("solve_spd: dimension mismatch");
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Vector::Zero(rhs.size());

  auto relative_residual = [&](const Vector& u) { return (a * u - rhs).norm() / rhs_norm; };
  auto direct = [&]() -> Vector {
    Eigen::SimplicialLLT<SparseMatrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericFailure("solve_spd: Cholesky factorization failed", -1.0);
    return llt.solve(rhs);
  };

  Vector u;
  if (level <= options.direct_max_level) {
    u = direct();
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(options.rel_tol);
    cg.setMaxIterations(options.max_iterations);
    cg.compute(a);
    u = cg.solve(rhs);
    if (cg.info() != Eigen::Success || relative_residual(u) > 10.0 * options.rel_tol) {
      if (!options.direct_fallback) {
        const double r = relative_residual(u);
        throw NumericFailure("solve_spd: CG did not converge in " + std::to_string(cg.iterations()) +
                                 " iterations, relative residual " + std::to_string(r),
                             r);
      }
      u = direct();
    }
  }
  const double r = relative_residual(u);
  if (!std::isfinite(r) || r > 10.0 * options.rel_tol)
    throw NumericFailure("solve_spd: relative residual " + std::to_string(r) + " above tolerance", r);
  return u;
}

Snapshot solve_forward(const FemSpace& space, const ParameterVector& y, const Source& source,
                       const SolverOptions& options) {
  const auto a = coefficient_field(space, y);
  const SparseMatrix op = space.weighted_stiffness(a);
  Snapshot s;
  s.coefficients = solve_spd(op, space.load(source), space.level(), options);
  s.parameter = y;
  return s;
}

double v_inner(const FemSpace& space, const Vector& u, const Vector& v) {
  if (u.size() != space.num_interior() || v.size() != space.num_interior())
    throw InvalidArgument("v_inner: dimension mismatch");
  return space.v_metric().inner(u, v);
}

double v_norm(const FemSpace& space, const Vector& u) { return std::sqrt(std::max(0.0, v_inner(space, u, u))); }

double l2_norm(const FemSpace& space, const Vector& u) {
  if (u.size() != space.num_interior()) throw InvalidArgument("l2_norm: dimension mismatch");
  return space.l2_metric().norm(u);
}

Matrix snapshot_matrix(std::span<const Snapshot> snapshots) {
  if (snapshots.empty()) return Matrix();
  const Index n = snapshots.front().coefficients.size();
  Matrix out(n, static_cast<Index>(snapshots.size()));
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    if (snapshots[j].coefficients.size() != n) throw InvalidArgument("snapshot_matrix: inconsistent lengths");
    out.col(static_cast<Index>(j)) = snapshots[j].coefficients;
  }
  return out;
}

}  // namespace rmrc
