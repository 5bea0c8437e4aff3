#include "rmrc/reduced.hpp"

#include "rmrc/errors.hpp"

#include <cmath>

namespace rmrc {

ReducedBasis greedy_reduced_basis(const Matrix& training, const Metric& metric, Index n_max) {
  if (n_max < 0) throw InvalidArgument("greedy_reduced_basis: N must be nonnegative");
  const Index dim = training.rows();
  const Index count = training.cols();
  ReducedBasis rb;
  rb.basis.metric = metric;
  rb.basis.vectors.resize(dim, 0);
  if (count == 0 || n_max == 0) {
    rb.rank_exhausted = n_max > 0;
    return rb;
  }

  // Explicit residuals keep the recorded errors accurate down to roundoff.
  Matrix residual = training;
  Matrix m_residual = metric.apply(training);
  auto residual_norms = [&]() {
    return residual.cwiseProduct(m_residual).colwise().sum().cwiseMax(0.0).cwiseSqrt().transpose().eval();
  };
  Vector norms = residual_norms();

  std::vector<Vector> q, mq;
  for (Index n = 0; n < n_max; ++n) {
    Index best = 0;
    for (Index j = 1; j < count; ++j) {
      if (norms(j) > norms(best)) best = j;
    }
    if (norms(best) < 1e-13) {
      rb.rank_exhausted = true;
      break;
    }
    Vector v = residual.col(best);
    for (std::size_t k = 0; k < q.size(); ++k) v -= mq[k].dot(v) * q[k];
    Vector mv = metric.apply(v);
    const double nv = std::sqrt(std::max(0.0, v.dot(mv)));
    if (nv < 1e-13) {
      rb.rank_exhausted = true;
      break;
    }
    v /= nv;
    mv /= nv;
    const Eigen::RowVectorXd c = mv.transpose() * residual;
    residual.noalias() -= v * c;
    m_residual.noalias() -= mv * c;
    q.push_back(std::move(v));
    mq.push_back(std::move(mv));
    rb.selected.push_back(best);
    norms = residual_norms();
    rb.errors.push_back(norms.maxCoeff());
  }
  rb.basis.vectors.resize(dim, static_cast<Index>(q.size()));
  for (std::size_t k = 0; k < q.size(); ++k) rb.basis.vectors.col(static_cast<Index>(k)) = q[k];
  return rb;
}

AmbientBasis AmbientBasis::canonical(Index m, Index n_complement) {
  AmbientBasis a;
  a.basis.vectors = Matrix::Identity(m + n_complement, m + n_complement);
  a.m = m;
  a.n_complement = n_complement;
  return a;
}

AmbientBasis ambient_basis(const OrthonormalBasis& w_basis, const OrthonormalBasis& reduced, double rel_tol) {
  if (w_basis.dim() != reduced.dim() && reduced.size() > 0)
    throw InvalidArgument("ambient_basis: W and V_N live in different spaces");
  OrthonormalBuilder builder(w_basis.metric, w_basis.dim());
  for (Index i = 0; i < w_basis.size(); ++i) {
    if (!builder.append(w_basis.vectors.col(i), rel_tol))
      throw InvalidArgument("ambient_basis: measurement basis is not linearly independent");
  }
  AmbientBasis a;
  a.m = w_basis.size();
  for (Index k = 0; k < reduced.size(); ++k) {
    if (!builder.append(reduced.vectors.col(k), rel_tol)) a.dropped.push_back(k);
  }
  a.basis = builder.basis();
  // Keep the W block bit-identical to the measurement basis.
  a.basis.vectors.leftCols(a.m) = w_basis.vectors;
  a.n_complement = a.basis.size() - a.m;
  return a;
}

double truncation_error(std::span<const Matrix> sets, const OrthonormalBasis& basis) {
  double worst = 0.0;
  for (const Matrix& set : sets) {
    if (set.cols() == 0) continue;
    if (set.rows() != basis.dim()) throw InvalidArgument("truncation_error: dimension mismatch");
    const Matrix r = set - basis.vectors * basis.coordinates(set);
    const Matrix mr = basis.metric.apply(r);
    const double e = std::sqrt(std::max(0.0, r.cwiseProduct(mr).colwise().sum().maxCoeff()));
    worst = std::max(worst, e);
  }
  return worst;
}

FavorablePair favorable_bases(const OrthonormalBasis& vn, const OrthonormalBasis& wb) {
  const Index n = vn.size(), m = wb.size();
  if (n > m) throw InvalidArgument("favorable_bases: requires dim V_n <= dim W");
  if (n > 0 && vn.dim() != wb.dim()) throw InvalidArgument("favorable_bases: bases live in different spaces");
  FavorablePair pair;
  if (n == 0) {
    pair.w = wb;
    pair.v = vn;
    pair.s = Vector(0);
    return pair;
  }
  const Matrix g = wb.metric.gram(wb.vectors, vn.vectors);  // m x n
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  pair.w = {wb.vectors * svd.matrixU(), wb.metric};
  pair.v = {vn.vectors * svd.matrixV(), vn.metric};
  pair.s = svd.singularValues().cwiseMin(1.0);
  return pair;
}

double stability_mu(const FavorablePair& pair) {
  if (pair.n() == 0) return 1.0;
  const double sn = pair.s(pair.n() - 1);
  if (sn <= kSingularFloor) return std::numeric_limits<double>::infinity();
  return 1.0 / sn;
}

}  // namespace rmrc
