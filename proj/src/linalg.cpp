#include "rmrc/linalg.hpp"

#include "rmrc/errors.hpp"

#include <cmath>
#include <cstring>

namespace rmrc {

Vector Metric::apply(const Vector& u) const {
  if (!op_) return u;
  return *op_ * u;
}

Matrix Metric::apply(const Matrix& u) const {
  if (!op_) return u;
  return *op_ * u;
}

double Metric::inner(const Vector& u, const Vector& v) const {
  if (u.size() != v.size()) throw InvalidArgument("Metric::inner: dimension mismatch");
  if (!op_) return u.dot(v);
  if (op_->rows() != u.size()) throw InvalidArgument("Metric::inner: vector does not match the operator");
  return u.dot(*op_ * v);
}

double Metric::norm(const Vector& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

Matrix Metric::gram(const Matrix& a, const Matrix& b) const {
  if (a.rows() != b.rows()) throw InvalidArgument("Metric::gram: dimension mismatch");
  return a.transpose() * apply(b);
}

Vector OrthonormalBasis::coordinates(const Vector& u) const {
  if (u.size() != dim()) throw InvalidArgument("OrthonormalBasis::coordinates: dimension mismatch");
  return vectors.transpose() * metric.apply(u);
}

Matrix OrthonormalBasis::coordinates(const Matrix& u) const {
  if (u.rows() != dim()) throw InvalidArgument("OrthonormalBasis::coordinates: dimension mismatch");
  return vectors.transpose() * metric.apply(u);
}

OrthonormalBasis OrthonormalBasis::leading(Index k) const {
  if (k < 0 || k > size()) throw InvalidArgument("OrthonormalBasis::leading: k out of range");
  return {vectors.leftCols(k), metric};
}

double OrthonormalBasis::orthonormality_defect() const {
  if (size() == 0) return 0.0;
  Matrix g = metric.gram(vectors, vectors);
  g -= Matrix::Identity(size(), size());
  return g.cwiseAbs().maxCoeff();
}

bool OrthonormalBuilder::append(const Vector& v, double rel_tol) {
  if (v.size() != dim_) throw InvalidArgument("OrthonormalBuilder::append: dimension mismatch");
  const double original = metric_.norm(v);
  if (original == 0.0) return false;
  Vector r = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < q_.size(); ++k) r -= mq_[k].dot(r) * q_[k];
  }
  Vector mr = metric_.apply(r);
  const double nr = std::sqrt(std::max(0.0, r.dot(mr)));
  if (nr < rel_tol * original) return false;
  q_.push_back(r / nr);
  mq_.push_back(mr / nr);
  return true;
}

OrthonormalBasis OrthonormalBuilder::basis() const {
  Matrix out(dim_, size());
  for (Index k = 0; k < size(); ++k) out.col(k) = q_[static_cast<std::size_t>(k)];
  return {std::move(out), metric_};
}

Matrix pinv_psd(const Matrix& s, double rel_tol) {
  if (s.rows() != s.cols()) throw InvalidArgument("pinv_psd: matrix must be square");
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(0.0, lambda.maxCoeff());
  Vector inv = Vector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff && lambda(i) > 0.0) inv(i) = 1.0 / lambda(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

std::uint64_t fingerprint(const Matrix& a) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const Index rows = a.rows(), cols = a.cols();
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
  return h;
}

}  // namespace rmrc
