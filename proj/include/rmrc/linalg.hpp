#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace rmrc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Inner product <u, v> = u^T M v for a sparse symmetric positive-definite M.
/// A default-constructed metric is Euclidean.
class Metric {
 public:
  Metric() = default;
  explicit Metric(std::shared_ptr<const SparseMatrix> op) : op_(std::move(op)) {}

  bool is_euclidean() const { return op_ == nullptr; }
  const SparseMatrix* op() const { return op_.get(); }

  Vector apply(const Vector& u) const;
  Matrix apply(const Matrix& u) const;
  double inner(const Vector& u, const Vector& v) const;
  double norm(const Vector& u) const;
  /// a^T M b.
  Matrix gram(const Matrix& a, const Matrix& b) const;

 private:
  std::shared_ptr<const SparseMatrix> op_;
};

/// Columns orthonormal under `metric`.
struct OrthonormalBasis {
  Matrix vectors;
  Metric metric;

  Index size() const { return vectors.cols(); }
  Index dim() const { return vectors.rows(); }

  /// Coefficients of the orthogonal projection: vectors^T M u.
  Vector coordinates(const Vector& u) const;
  Matrix coordinates(const Matrix& u) const;
  Vector project(const Vector& u) const { return vectors * coordinates(u); }
  Vector expand(const Vector& coeffs) const { return vectors * coeffs; }
  OrthonormalBasis leading(Index k) const;
  /// Largest entry of |G - I| with G the Gram matrix.
  double orthonormality_defect() const;
};

/// Incremental modified Gram-Schmidt with one re-orthogonalization pass.
class OrthonormalBuilder {
 public:
  OrthonormalBuilder(Metric metric, Index dim) : metric_(std::move(metric)), dim_(dim) {}

  /// Orthonormalizes `v` against the current family. The vector is rejected
  /// (and false returned) when its residual norm is below rel_tol * ||v||.
  bool append(const Vector& v, double rel_tol);
  Index size() const { return static_cast<Index>(q_.size()); }
  OrthonormalBasis basis() const;

 private:
  Metric metric_;
  Index dim_;
  std::vector<Vector> q_;
  std::vector<Vector> mq_;
};

/// Pseudoinverse of a symmetric positive semi-definite matrix; eigenvalues
/// below rel_tol * max eigenvalue are treated as zero.
Matrix pinv_psd(const Matrix& s, double rel_tol);

/// FNV-1a over the raw bytes of the entries.
std::uint64_t fingerprint(const Matrix& a);

}  // namespace rmrc
