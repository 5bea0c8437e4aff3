#pragma once

#include "rmrc/recovery.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rmrc {

/// min over (R, b) of max_j ||u^j - R w^j - b||^2.
/// The primal vector x stacks R row-major followed by b (length N(m+1)).
struct MinMaxProblem {
  Matrix w;  // m x J
  Matrix u;  // N x J

  MinMaxProblem(Matrix w_, Matrix u_);
  Index count() const { return w.cols(); }
  Index m() const { return w.rows(); }
  Index n() const { return u.rows(); }
  Index primal_size() const { return n() * (m() + 1); }
};

/// max_j ||u^j - R w^j - b||^2.
double objective(const MinMaxProblem& problem, const Vector& x);
/// ||u^j - R w^j - b||^2 for every j.
Vector residuals_squared(const MinMaxProblem& problem, const Vector& x);

Vector pack_primal(const Matrix& R, const Vector& b);
void unpack_primal(const Vector& x, Index n, Index m, Matrix& R, Vector& b);

/// Q_j x = R w^j + b.
Vector apply_Q(const Vector& wj, const Vector& x, Index n);
/// Q_j^T v: the flattening of (v (w^j)^T, v).
Vector apply_Q_adjoint(const Vector& wj, const Vector& v);

/// Dual variables (v_j, xi_j), stored column-wise.
struct DualPoint {
  Matrix v;   // N x J
  Vector xi;  // J
};

struct PrimalPoint {
  Vector x;
  double t = 0.0;
};

/// L(x, t) = ((Q_1 x, t), ..., (Q_J x, t)).
DualPoint apply_L(const MinMaxProblem& problem, const Vector& x, double t);
/// L*(d) = (sum_j Q_j^T v_j, sum_j xi_j).
PrimalPoint apply_L_adjoint(const MinMaxProblem& problem, const DualPoint& d);

/// Power iteration on L*L from a seeded start; returns the estimate of ||L||.
double estimate_opnorm(const MinMaxProblem& problem, int iterations = 1000, std::uint64_t seed = 0);
/// sqrt(J + sum_j (1 + ||w^j||^2)), the upper bound on ||L||.
double opnorm_bound(const MinMaxProblem& problem);

struct EpigraphPoint {
  Vector y;
  double t = 0.0;
};

/// Euclidean projection of (v, xi) onto {(y, t) : ||center - y||^2 <= t}.
EpigraphPoint project_epigraph(const Vector& center, const Vector& v, double xi);

/// prox of gamma_F times the conjugate of the epigraph indicators (Moreau identity).
DualPoint prox_dual_F(const MinMaxProblem& problem, const DualPoint& d, double gamma_F);
/// prox of gamma_G * t: (x, t - gamma_G).
PrimalPoint prox_G(const PrimalPoint& p, double gamma_G);

struct ConvergenceRecord {
  long iteration = 0;
  double objective = 0.0;  // squared
  double seconds = 0.0;
};

struct PdConfig {
  long max_iterations = 100000;
  std::optional<double> gamma_G;
  std::optional<double> gamma_F;
  double theta = 1.0;
  /// Start from this map instead of the minimal-norm map.
  std::optional<AffineRecoveryMap> warm_start;
  long log_stride = 100;
  /// Stop when the objective moves less than 1e-12 (relative) over 1000 iterations.
  bool early_stop = false;
  /// Run the iteration on whitened measurements and rescaled complements
  /// (an exact affine change of variables); false runs it on raw coordinates.
  bool precondition = true;
  int power_iterations = 1000;
  std::uint64_t seed = 0;
};

struct FitResult {
  AffineRecoveryMap map;
  std::vector<ConvergenceRecord> log;
  double final_objective = 0.0;
  double opnorm = 0.0;  // of the operator actually iterated
  long iterations = 0;
  PrimalPoint primal;
};

/// Primal-dual splitting for the epigraph form of the min-max problem.
FitResult pd_fit(const MinMaxProblem& problem, const PdConfig& config = {});

struct SubgradientConfig {
  long max_iterations = 100000;
  /// Step gamma_0 / sqrt(k); defaults to 1 / (2 max_j (1 + ||w^j||^2)).
  std::optional<double> step0;
  std::optional<AffineRecoveryMap> warm_start;
  long log_stride = 100;
};

/// Subgradient descent on the active term; returns the best iterate seen.
FitResult subgradient_fit(const MinMaxProblem& problem, const SubgradientConfig& config = {});

/// Converts the primal vector into an affine map.
AffineRecoveryMap map_from_primal(const MinMaxProblem& problem, const Vector& x, std::string method);

}  // namespace rmrc
