#include "rmrc/errors.hpp"
#include "rmrc/reduced.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rmrc;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a;
}

OrthonormalBasis euclidean_basis(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return {qr.householderQ() * Matrix::Identity(a.rows(), a.cols()), Metric{}};
}

Metric spd_metric(Index n, std::uint64_t seed) {
  const Matrix a = gaussian(n, n, seed);
  const Matrix spd = a * a.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
  return Metric(std::make_shared<const SparseMatrix>(spd.sparseView()));
}

}  // namespace

TEST(Greedy, ExhaustsIndependentTrainingSet) {
  const Metric metric = spd_metric(15, 1);
  const Matrix training = gaussian(15, 6, 2);
  const ReducedBasis rb = greedy_reduced_basis(training, metric, 6);
  EXPECT_EQ(rb.size(), 6);
  EXPECT_LE(rb.errors.back(), 1e-12);
  EXPECT_LT(rb.basis.orthonormality_defect(), 1e-12);
  EXPECT_FALSE(rb.rank_exhausted);
}

TEST(Greedy, FirstPickHasLargestNorm) {
  const Metric metric = spd_metric(10, 3);
  Matrix training = gaussian(10, 8, 4);
  training.col(5) *= 10.0;
  EXPECT_EQ(greedy_reduced_basis(training, metric, 3).selected.front(), 5);
}

TEST(Greedy, TiesGoToSmallestIndex) {
  Matrix training = Matrix::Zero(4, 4);
  training(0, 2) = 1.0;
  training(1, 1) = 1.0;
  training(2, 3) = 1.0;
  training(3, 0) = 0.5;
  const ReducedBasis rb = greedy_reduced_basis(training, Metric{}, 3);
  EXPECT_EQ(rb.selected, (std::vector<Index>{1, 2, 3}));
}

TEST(Greedy, ErrorHistoryIsNonincreasingAndExact) {
  const Metric metric = spd_metric(20, 5);
  const Matrix training = gaussian(20, 40, 6);
  const ReducedBasis rb = greedy_reduced_basis(training, metric, 12);
  for (std::size_t k = 1; k < rb.errors.size(); ++k) EXPECT_LE(rb.errors[k], rb.errors[k - 1] * (1 + 1e-14));
  // Recorded error equals the max projection error.
  const OrthonormalBasis b5 = rb.basis.leading(5);
  double worst = 0.0;
  for (Index j = 0; j < training.cols(); ++j)
    worst = std::max(worst, metric.norm(Vector(training.col(j) - b5.project(training.col(j)))));
  EXPECT_NEAR(rb.errors[4], worst, 1e-12 * worst);
}

TEST(Greedy, RankExhaustionTruncates) {
  const Matrix low = gaussian(12, 3, 7) * gaussian(3, 10, 8);
  const ReducedBasis rb = greedy_reduced_basis(low, Metric{}, 8);
  EXPECT_TRUE(rb.rank_exhausted);
  EXPECT_EQ(rb.size(), 3);
}

TEST(Ambient, LeadingBlockIsWAndParsevalHolds) {
  const Metric metric = spd_metric(30, 9);
  OrthonormalBuilder wb(metric, 30), vb(metric, 30);
  const Matrix w = gaussian(30, 6, 10), v = gaussian(30, 8, 11);
  for (Index k = 0; k < 6; ++k) wb.append(w.col(k), 1e-12);
  for (Index k = 0; k < 8; ++k) vb.append(v.col(k), 1e-12);
  const OrthonormalBasis W = wb.basis();
  const AmbientBasis amb = ambient_basis(W, vb.basis());
  EXPECT_EQ(amb.m, 6);
  EXPECT_EQ(amb.n_complement, 8);
  EXPECT_TRUE(amb.dropped.empty());
  EXPECT_LT(amb.basis.orthonormality_defect(), 1e-10);
  EXPECT_EQ(amb.basis.vectors.leftCols(6), W.vectors);
  const Vector u = gaussian(30, 1, 12).col(0);
  EXPECT_NEAR(amb.coordinates(u).norm(), metric.norm(amb.basis.project(u)), 1e-10);
}

TEST(Ambient, OrthogonalReducedSpaceIsKept) {
  const OrthonormalBasis full = euclidean_basis(gaussian(12, 7, 13));
  const OrthonormalBasis W{full.vectors.leftCols(3), Metric{}};
  const OrthonormalBasis V{full.vectors.rightCols(4), Metric{}};
  const AmbientBasis amb = ambient_basis(W, V);
  EXPECT_LT((amb.basis.vectors.rightCols(4).cwiseAbs() - V.vectors.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ambient, VectorInsideWIsDropped) {
  const OrthonormalBasis W = euclidean_basis(gaussian(10, 3, 14));
  Matrix v(10, 2);
  v.col(0) = W.vectors.col(1);
  v.col(1) = gaussian(10, 1, 15).col(0);
  const AmbientBasis amb = ambient_basis(W, euclidean_basis(v));
  EXPECT_EQ(amb.size(), 4);
  EXPECT_EQ(amb.n_complement, 1);
  EXPECT_EQ(amb.dropped.size(), 1u);
}

TEST(Truncation, ZeroInSpanAndMonotone) {
  const Metric metric = spd_metric(16, 16);
  const Matrix training = gaussian(16, 30, 17);
  const ReducedBasis rb = greedy_reduced_basis(training, metric, 10);
  const Matrix inside = rb.basis.vectors * gaussian(10, 5, 18);
  const std::array<Matrix, 1> in_span{inside};
  EXPECT_LT(truncation_error(in_span, rb.basis), 1e-12);
  const std::array<Matrix, 2> sets{training, gaussian(16, 10, 19)};
  double previous = std::numeric_limits<double>::infinity();
  for (Index n = 1; n <= 10; ++n) {
    const double e = truncation_error(sets, rb.basis.leading(n));
    EXPECT_LE(e, previous);
    previous = e;
  }
}

TEST(Favorable, ContainedAndOrthogonalLimits) {
  const OrthonormalBasis full = euclidean_basis(gaussian(20, 9, 20));
  const OrthonormalBasis W{full.vectors.leftCols(5), Metric{}};
  const OrthonormalBasis inside = euclidean_basis(W.vectors * gaussian(5, 3, 21));
  const OrthonormalBasis outside{full.vectors.rightCols(3), Metric{}};
  const FavorablePair a = favorable_bases(inside, W);
  EXPECT_LT((a.s - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(stability_mu(a), 1.0, 1e-12);
  const FavorablePair b = favorable_bases(outside, W);
  EXPECT_LT(b.s.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(std::isinf(stability_mu(b)));
}

TEST(Favorable, InvariantsAndInfSupOracle) {
  const OrthonormalBasis W = euclidean_basis(gaussian(30, 8, 22));
  const OrthonormalBasis V = euclidean_basis(gaussian(30, 5, 23));
  const FavorablePair pair = favorable_bases(V, W);
  EXPECT_LT(pair.w.orthonormality_defect(), 1e-12);
  EXPECT_LT(pair.v.orthonormality_defect(), 1e-12);
  const Matrix cross = pair.w.vectors.transpose() * pair.v.vectors;
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 5; ++j) EXPECT_NEAR(cross(i, j), i == j ? pair.s(j) : 0.0, 1e-9);
  for (Index j = 1; j < 5; ++j) EXPECT_LE(pair.s(j), pair.s(j - 1));
  EXPECT_LE(pair.s.maxCoeff(), 1.0 + 1e-12);
  EXPECT_NEAR(stability_mu(pair), oracle::inverse_inf_sup(V.vectors, W.vectors), 1e-8);
}

TEST(Favorable, RequiresSmallerReducedSpace) {
  const OrthonormalBasis W = euclidean_basis(gaussian(10, 2, 24));
  const OrthonormalBasis V = euclidean_basis(gaussian(10, 3, 25));
  EXPECT_THROW(favorable_bases(V, W), InvalidArgument);
}

TEST(StabilityMu, ReciprocalOfSmallestSingularValue) {
  FavorablePair pair;
  pair.v.vectors = Matrix::Zero(3, 2);
  pair.w.vectors = Matrix::Zero(3, 2);
  pair.s = Vector(2);
  pair.s << 1.0, 0.5;
  EXPECT_DOUBLE_EQ(stability_mu(pair), 2.0);
}
