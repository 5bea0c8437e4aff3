#pragma once

#include "rmrc/linalg.hpp"

#include <limits>
#include <span>
#include <vector>

namespace rmrc {

/// Output of the strong greedy algorithm.
struct ReducedBasis {
  std::vector<Index> selected;
  OrthonormalBasis basis;
  /// errors[k] = max over the training set of ||u - P_{V_{k+1}} u||.
  std::vector<double> errors;
  bool rank_exhausted = false;

  Index size() const { return basis.size(); }
};

/// Strong greedy selection over the columns of `training`. Ties go to the
/// smallest column index; the loop stops early once the error drops below 1e-13.
ReducedBasis greedy_reduced_basis(const Matrix& training, const Metric& metric, Index n_max);

/// Orthonormal basis of W + V_N: the first m vectors are the W basis, the
/// rest span the orthogonal complement of W inside W + V_N.
struct AmbientBasis {
  OrthonormalBasis basis;
  Index m = 0;
  Index n_complement = 0;
  /// Reduced-basis vectors dropped because they lie in the span of the others.
  std::vector<Index> dropped;

  Index size() const { return basis.size(); }
  Vector coordinates(const Vector& u) const { return basis.coordinates(u); }
  Matrix coordinates(const Matrix& u) const { return basis.coordinates(u); }
  std::uint64_t fingerprint() const { return rmrc::fingerprint(basis.vectors); }

  /// Identity basis of R^{m+N} under the Euclidean metric.
  static AmbientBasis canonical(Index m, Index n_complement);
};

AmbientBasis ambient_basis(const OrthonormalBasis& w_basis, const OrthonormalBasis& reduced, double rel_tol = 1e-12);

/// max over the columns of each set of ||u - P u||, P the projection onto span(basis).
double truncation_error(std::span<const Matrix> sets, const OrthonormalBasis& basis);

/// Favorable bases: <w_i, v_j> = s_i delta_ij with s nonincreasing.
struct FavorablePair {
  OrthonormalBasis w;  // m vectors
  OrthonormalBasis v;  // n vectors
  Vector s;            // n singular values

  Index n() const { return v.size(); }
  Index m() const { return w.size(); }
};

/// SVD of the cross-Gramian of two orthonormal bases (n <= m) sharing one metric.
FavorablePair favorable_bases(const OrthonormalBasis& vn, const OrthonormalBasis& wb);

/// Singular values below this are treated as zero.
inline constexpr double kSingularFloor = 1e-14;

/// mu = 1 / s_n; +infinity when s_n <= 1e-14; 1 when n = 0.
double stability_mu(const FavorablePair& pair);

}  // namespace rmrc
