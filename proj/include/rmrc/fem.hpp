#pragma once

#include "rmrc/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace rmrc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Checkerboard parameters y_{i,j} in [-1, 1]; i indexes the x direction.
class ParameterVector {
 public:
  ParameterVector(int p, std::vector<double> values);
  static ParameterVector constant(int p, double value);

  int p() const { return p_; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i * p_ + j)]; }
  std::span<const double> values() const { return values_; }
  /// FNV-1a of the entries; used to check that snapshot sets are disjoint.
  std::uint64_t hash() const;

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  int p_;
  std::vector<double> values_;
};

struct Snapshot {
  Vector coefficients;
  std::optional<ParameterVector> parameter;
  std::uint64_t seed = 0;
  std::int64_t index = -1;
};

/// Uniform source f = value.
struct ConstantSource {
  double value = 1.0;
};

/// Assembled right-hand side over interior nodes.
struct NodalLoad {
  Vector load;
};

using Source = std::variant<ConstantSource, NodalLoad>;

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iterations = 20000;
  /// Levels up to this one are solved by sparse Cholesky, finer ones by CG.
  int direct_max_level = 5;
  bool direct_fallback = true;
};

/// P1 elements on the uniform triangulation of the unit square with h = 2^-level.
/// Each cell [i,i+1]x[j,j+1] is split along the diagonal (i,j)-(i+1,j+1).
/// Matrices are restricted to interior nodes (homogeneous Dirichlet).
class FemSpace {
 public:
  static constexpr int kMinLevel = 2;
  static constexpr int kMaxLevel = 12;

  /// Throws InvalidArgument when level is outside [2, 12].
  static FemSpace build(int level);

  int level() const { return level_; }
  int cells_per_side() const { return n_; }
  double h() const { return 1.0 / n_; }
  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_interior() const { return static_cast<Index>(interior_nodes_.size()); }
  Index num_elements() const { return static_cast<Index>(triangles_.size()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
  /// Interior number of a node, or -1 on the boundary.
  Index interior_index(Index node) const { return interior_index_[static_cast<std::size_t>(node)]; }
  Index node_of_interior(Index k) const { return interior_nodes_[static_cast<std::size_t>(k)]; }
  Point centroid(Index element) const;
  double element_area() const { return 0.5 * h() * h(); }

  const SparseMatrix& stiffness() const { return *stiffness_; }
  const SparseMatrix& mass() const { return *mass_; }
  /// <u,v>_V = u^T K v.
  const Metric& v_metric() const { return v_metric_; }
  const Metric& l2_metric() const { return l2_metric_; }

  /// Stiffness with one nonnegative weight per element.
  SparseMatrix weighted_stiffness(std::span<const double> element_weights) const;
  /// Right-hand side for `source`.
  Vector load(const Source& source) const;
  /// Point value of the P1 function with interior coefficients u.
  double evaluate(const Vector& u, Point p) const;
  /// Interpolates u onto a finer nested space (exact for nested P1 spaces).
  Vector prolongate(const Vector& u, const FemSpace& fine) const;

 private:
  FemSpace() = default;

  int level_ = 0;
  int n_ = 0;
  std::vector<Point> nodes_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Index> interior_index_;
  std::vector<Index> interior_nodes_;
  std::vector<std::array<double, 9>> element_stiffness_;
  std::vector<std::array<Index, 9>> slots_;  // positions in the stiffness value array
  std::shared_ptr<const SparseMatrix> stiffness_;
  std::shared_ptr<const SparseMatrix> mass_;
  Metric v_metric_;
  Metric l2_metric_;
};

/// a(y) = 1 + y_{i,j}/2 on each element, by centroid membership in S_{i,j}.
std::vector<double> coefficient_field(const FemSpace& space, const ParameterVector& y);

/// Solves -div(a(y) grad u) = f with u = 0 on the boundary.
Snapshot solve_forward(const FemSpace& space, const ParameterVector& y,
                       const Source& source = ConstantSource{}, const SolverOptions& options = {});

/// Solves A u = F for a symmetric positive-definite A. Throws NumericFailure.
Vector solve_spd(const SparseMatrix& a, const Vector& rhs, int level, const SolverOptions& options = {});

double v_inner(const FemSpace& space, const Vector& u, const Vector& v);
double v_norm(const FemSpace& space, const Vector& u);
double l2_norm(const FemSpace& space, const Vector& u);

inline double v_inner(const FemSpace& space, const Snapshot& u, const Snapshot& v) {
  return v_inner(space, u.coefficients, v.coefficients);
}

/// Stacks snapshot coefficients as columns.
Matrix snapshot_matrix(std::span<const Snapshot> snapshots);

}  // namespace rmrc
