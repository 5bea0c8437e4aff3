#include "rmrc/optim.hpp"

#include "rmrc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace rmrc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Multiplier lambda of the epigraph projection for ||z||^2 = zz and level xi:
/// zero when the point is feasible, otherwise the root of
/// (xi + lambda)(1 + 2 lambda)^2 = zz on lambda > max(0, -xi).
double epigraph_multiplier(double zz, double xi) {
  if (zz <= xi) return 0.0;
  double lo = std::max(0.0, -xi);
  double hi = lo + zz;  // g(hi) >= 0 because xi + hi >= zz
  // g is convex and increasing on the bracket, so Newton from the right
  // decreases monotonically; bisection guards against roundoff.
  double lambda = hi;
  for (int it = 0; it < 200; ++it) {
    const double a = xi + lambda;
    const double q = 1.0 + 2.0 * lambda;
    const double g = a * q * q - zz;
    if (g == 0.0) return lambda;
    if (g > 0.0) {
      hi = lambda;
    } else {
      lo = lambda;
    }
    const double dg = q * q + 4.0 * a * q;
    double next = lambda - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - lambda);
    lambda = next;
    if (step <= 1e-15 * lambda || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return lambda;
  }
  throw NumericFailure("project_epigraph: root finder did not converge", lambda);
}

double max_column_sq_norm(const Matrix& r) {
  if (r.cols() == 0) return 0.0;
  return r.colwise().squaredNorm().maxCoeff();
}

}  // namespace

MinMaxProblem::MinMaxProblem(Matrix w_, Matrix u_) : w(std::move(w_)), u(std::move(u_)) {
  if (w.cols() < 1) throw InvalidArgument("MinMaxProblem: needs J >= 1 snapshots");
  if (u.cols() != w.cols()) throw InvalidArgument("MinMaxProblem: w and u must have the same number of columns");
}

Vector pack_primal(const Matrix& R, const Vector& b) {
  const Index n = R.rows(), m = R.cols();
  if (b.size() != n) throw InvalidArgument("pack_primal: b length differs from R rows");
  Vector x(n * (m + 1));
  Eigen::Map<RowMajorMatrix>(x.data(), n, m) = R;
  x.tail(n) = b;
  return x;
}

void unpack_primal(const Vector& x, Index n, Index m, Matrix& R, Vector& b) {
  if (x.size() != n * (m + 1)) throw InvalidArgument("unpack_primal: x has length " + std::to_string(x.size()) +
                                                     ", expected N(m+1) = " + std::to_string(n * (m + 1)));
  R = Eigen::Map<const RowMajorMatrix>(x.data(), n, m);
  b = x.tail(n);
}

Vector residuals_squared(const MinMaxProblem& problem, const Vector& x) {
  Matrix R;
  Vector b;
  unpack_primal(x, problem.n(), problem.m(), R, b);
  Matrix r = problem.u - R * problem.w;
  r.colwise() -= b;
  return r.colwise().squaredNorm().transpose();
}

double objective(const MinMaxProblem& problem, const Vector& x) { return residuals_squared(problem, x).maxCoeff(); }

Vector apply_Q(const Vector& wj, const Vector& x, Index n) {
  const Index m = wj.size();
  if (x.size() != n * (m + 1)) throw InvalidArgument("apply_Q: dimension mismatch");
  return Eigen::Map<const RowMajorMatrix>(x.data(), n, m) * wj + x.tail(n);
}

Vector apply_Q_adjoint(const Vector& wj, const Vector& v) {
  const Index m = wj.size(), n = v.size();
  Vector out(n * (m + 1));
  Eigen::Map<RowMajorMatrix>(out.data(), n, m) = v * wj.transpose();
  out.tail(n) = v;
  return out;
}

DualPoint apply_L(const MinMaxProblem& problem, const Vector& x, double t) {
  Matrix R;
  Vector b;
  unpack_primal(x, problem.n(), problem.m(), R, b);
  DualPoint d;
  d.v = R * problem.w;
  d.v.colwise() += b;
  d.xi = Vector::Constant(problem.count(), t);
  return d;
}

PrimalPoint apply_L_adjoint(const MinMaxProblem& problem, const DualPoint& d) {
  if (d.v.rows() != problem.n() || d.v.cols() != problem.count() || d.xi.size() != problem.count())
    throw InvalidArgument("apply_L_adjoint: dual has the wrong shape");
  const Matrix gR = d.v * problem.w.transpose();
  return {pack_primal(gR, d.v.rowwise().sum()), d.xi.sum()};
}

double opnorm_bound(const MinMaxProblem& problem) {
  const double j = static_cast<double>(problem.count());
  return std::sqrt(j + j + problem.w.colwise().squaredNorm().sum());
}

double estimate_opnorm(const MinMaxProblem& problem, int iterations, std::uint64_t seed) {
  if (iterations < 1) throw InvalidArgument("estimate_opnorm: iterations must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(problem.primal_size());
  for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  double t = normal(rng);
  double norm = std::sqrt(x.squaredNorm() + t * t);
  x /= norm;
  t /= norm;
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const PrimalPoint y = apply_L_adjoint(problem, apply_L(problem, x, t));
    const double rayleigh = x.dot(y.x) + t * y.t;
    norm = std::sqrt(y.x.squaredNorm() + y.t * y.t);
    if (norm == 0.0) return 0.0;
    x = y.x / norm;
    t = y.t / norm;
    const bool converged = it > 0 && std::abs(rayleigh - estimate) <= 1e-10 * std::abs(rayleigh);
    estimate = rayleigh;
    if (converged) break;
  }
  return std::sqrt(std::max(0.0, estimate));
}

EpigraphPoint project_epigraph(const Vector& center, const Vector& v, double xi) {
  if (center.size() != v.size()) throw InvalidArgument("project_epigraph: dimension mismatch");
  const Vector z = v - center;
  const double lambda = epigraph_multiplier(z.squaredNorm(), xi);
  if (lambda == 0.0) return {v, xi};
  return {center + z / (1.0 + 2.0 * lambda), xi + lambda};
}

DualPoint prox_dual_F(const MinMaxProblem& problem, const DualPoint& d, double gamma_F) {
  if (!(gamma_F > 0.0)) throw InvalidArgument("prox_dual_F: gamma_F must be positive");
  if (d.v.rows() != problem.n() || d.v.cols() != problem.count() || d.xi.size() != problem.count())
    throw InvalidArgument("prox_dual_F: dual has the wrong shape");
  DualPoint out{Matrix(d.v.rows(), d.v.cols()), Vector(d.xi.size())};
  for (Index j = 0; j < problem.count(); ++j) {
    const EpigraphPoint p = project_epigraph(problem.u.col(j), d.v.col(j) / gamma_F, d.xi(j) / gamma_F);
    out.v.col(j) = d.v.col(j) - gamma_F * p.y;
    out.xi(j) = d.xi(j) - gamma_F * p.t;
  }
  return out;
}

PrimalPoint prox_G(const PrimalPoint& p, double gamma_G) {
  if (!(gamma_G > 0.0)) throw InvalidArgument("prox_G: gamma_G must be positive");
  return {p.x, p.t - gamma_G};
}

AffineRecoveryMap map_from_primal(const MinMaxProblem& problem, const Vector& x, std::string method) {
  AffineRecoveryMap map;
  map.method = std::move(method);
  map.m = problem.m();
  map.n_complement = problem.n();
  unpack_primal(x, problem.n(), problem.m(), map.B, map.c);
  return map;
}

namespace {

// Affine change of variables u' = (u - ubar) / sigma, w' = P (w - wbar) with
// P = S^{-1/2} the whitening of the centered measurement covariance. Maps
// u ~ R w + b to u' ~ R' w' + b' and back without changing the minimizer.
struct Whitening {
  Matrix P, P_inv;
  Vector wbar, ubar;
  double sigma = 1.0;

  static Whitening identity(const MinMaxProblem& problem) {
    Whitening z;
    z.P = z.P_inv = Matrix::Identity(problem.m(), problem.m());
    z.wbar = Vector::Zero(problem.m());
    z.ubar = Vector::Zero(problem.n());
    return z;
  }

  static Whitening of(const MinMaxProblem& problem) {
    Whitening z;
    const double count = static_cast<double>(problem.count());
    z.wbar = problem.w.rowwise().mean();
    z.ubar = problem.u.rowwise().mean();
    const Matrix wc = problem.w.colwise() - z.wbar;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(wc * wc.transpose() / count);
    const Vector& lam = eig.eigenvalues();
    const double floor = 1e-12 * std::max(lam.size() ? lam.maxCoeff() : 0.0, 0.0);
    Vector inv_sqrt = Vector::Zero(lam.size()), root = Vector::Zero(lam.size());
    for (Index i = 0; i < lam.size(); ++i) {
      if (lam(i) > floor && lam(i) > 0.0) {
        root(i) = std::sqrt(lam(i));
        inv_sqrt(i) = 1.0 / root(i);
      }
    }
    z.P = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    z.P_inv = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    const double spread = (problem.u.colwise() - z.ubar).colwise().norm().maxCoeff();
    if (spread > 0.0) z.sigma = spread;
    return z;
  }

  MinMaxProblem transform(const MinMaxProblem& problem) const {
    Matrix u = (problem.u.colwise() - ubar) / sigma;
    return MinMaxProblem(P * (problem.w.colwise() - wbar), std::move(u));
  }
  void to_scaled(const Matrix& R, const Vector& b, Matrix& Rs, Vector& bs) const {
    Rs = R * P_inv / sigma;
    bs = (b - ubar + R * wbar) / sigma;
  }
  void from_scaled(const Matrix& Rs, const Vector& bs, Matrix& R, Vector& b) const {
    R = sigma * Rs * P;
    b = sigma * bs + ubar - R * wbar;
  }
};

}  // namespace

FitResult pd_fit(const MinMaxProblem& original, const PdConfig& config) {
  const auto start = Clock::now();
  const Whitening scaling = config.precondition ? Whitening::of(original) : Whitening::identity(original);
  const MinMaxProblem problem = config.precondition ? scaling.transform(original) : original;
  const double obj_scale = scaling.sigma * scaling.sigma;
  const Index n = problem.n(), m = problem.m(), count = problem.count();
  FitResult result;
  result.opnorm = estimate_opnorm(problem, config.power_iterations, config.seed);
  const double safe_norm = 1.01 * result.opnorm;
  const double gamma_G = config.gamma_G.value_or(0.99 / safe_norm);
  const double gamma_F = config.gamma_F.value_or(0.99 / safe_norm);
  if (!(gamma_G > 0.0 && gamma_F > 0.0) || gamma_G * gamma_F * result.opnorm * result.opnorm >= 1.0)
    throw InvalidArgument("pd_fit: step sizes violate gamma_G * gamma_F < 1/||L||^2");

  Matrix R;
  Vector b;
  double t = 1.0;
  if (config.warm_start) {
    if (config.warm_start->m != m || config.warm_start->n_complement != n)
      throw InvalidArgument("pd_fit: warm start has the wrong dimensions");
    scaling.to_scaled(config.warm_start->B, config.warm_start->c, R, b);
    t = objective(problem, pack_primal(R, b));
  } else {
    scaling.to_scaled(Matrix::Zero(n, m), Vector::Zero(n), R, b);
  }

  // Dual starts at L(x, t).
  Matrix V = R * problem.w;
  V.colwise() += b;
  Vector xi = Vector::Constant(count, t);

  const Matrix wt = problem.w.transpose();
  Matrix R_new(n, m), R_bar(n, m), Z(n, count);
  Vector b_new(n), b_bar(n);

  auto record = [&](long k) {
    Matrix r = problem.u - R * problem.w;
    r.colwise() -= b;
    const double obj = obj_scale * max_column_sq_norm(r);
    if (!std::isfinite(obj) || !R.allFinite() || !b.allFinite() || !std::isfinite(t)) {
      const double last = result.log.empty() ? std::numeric_limits<double>::quiet_NaN() : result.log.back().objective;
      throw NumericFailure("pd_fit: non-finite iterate at iteration " + std::to_string(k) +
                               "; last finite objective " + std::to_string(last),
                           last);
    }
    result.log.push_back({k, obj, seconds_since(start)});
    return obj;
  };

  const long stride = std::max<long>(1, config.log_stride);
  double checkpoint = record(0);
  long k = 0;
  while (k < config.max_iterations) {
    // Primal step: prox_G(x - gamma_G L* d).
    R_new.noalias() = R - gamma_G * (V * wt);
    b_new = b - gamma_G * V.rowwise().sum();
    const double t_new = t - gamma_G * xi.sum() - gamma_G;
    // Extrapolation.
    R_bar = R_new + config.theta * (R_new - R);
    b_bar = b_new + config.theta * (b_new - b);
    const double t_bar = t_new + config.theta * (t_new - t);
    // Dual step: prox of gamma_F F^* at d + gamma_F L(x_bar, t_bar), via Moreau:
    // with z = a/gamma_F - u_j the dual becomes (gamma_F z 2l/(1+2l), -gamma_F l).
    Z.noalias() = R_bar * problem.w;
    Z.colwise() += b_bar;
    Z = V / gamma_F + Z - problem.u;
    for (Index j = 0; j < count; ++j) {
      const double level = xi(j) / gamma_F + t_bar;
      const double lambda = epigraph_multiplier(Z.col(j).squaredNorm(), level);
      V.col(j) = (gamma_F * 2.0 * lambda / (1.0 + 2.0 * lambda)) * Z.col(j);
      xi(j) = -gamma_F * lambda;
    }
    R.swap(R_new);
    b.swap(b_new);
    t = t_new;
    ++k;
    if (!std::isfinite(t)) record(k);
    if (k % stride == 0 || k == config.max_iterations) record(k);
    if (config.early_stop && k % 1000 == 0) {
      Matrix r = problem.u - R * problem.w;
      r.colwise() -= b;
      const double obj = max_column_sq_norm(r);
      if (std::abs(obj - checkpoint) <= 1e-12 * std::max(std::abs(checkpoint), 1e-300)) break;
      checkpoint = obj;
    }
  }
  if (result.log.back().iteration != k) record(k);

  Matrix R_out;
  Vector b_out;
  scaling.from_scaled(R, b, R_out, b_out);
  result.iterations = k;
  result.primal = {pack_primal(R_out, b_out), obj_scale * t};
  result.map = map_from_primal(original, result.primal.x, "wca");
  result.final_objective = objective(original, result.primal.x);
  return result;
}

FitResult subgradient_fit(const MinMaxProblem& problem, const SubgradientConfig& config) {
  const auto start = Clock::now();
  const Index n = problem.n(), m = problem.m();
  Matrix R = Matrix::Zero(n, m);
  Vector b = Vector::Zero(n);
  if (config.warm_start) {
    if (config.warm_start->m != m || config.warm_start->n_complement != n)
      throw InvalidArgument("subgradient_fit: warm start has the wrong dimensions");
    R = config.warm_start->B;
    b = config.warm_start->c;
  }
  const double step0 = config.step0.value_or(0.5 / (1.0 + problem.w.colwise().squaredNorm().maxCoeff()));
  const long stride = std::max<long>(1, config.log_stride);

  FitResult result;
  Matrix best_R = R;
  Vector best_b = b;
  double best = std::numeric_limits<double>::infinity();
  Matrix r(n, problem.count());
  for (long k = 0;; ++k) {
    r.noalias() = problem.u - R * problem.w;
    r.colwise() -= b;
    Index active = 0;
    double worst = -1.0;
    for (Index j = 0; j < problem.count(); ++j) {
      const double v = r.col(j).squaredNorm();
      if (v > worst) {
        worst = v;
        active = j;
      }
    }
    if (worst < best) {
      best = worst;
      best_R = R;
      best_b = b;
    }
    if (k % stride == 0 || k == config.max_iterations) result.log.push_back({k, best, seconds_since(start)});
    if (k == config.max_iterations) break;
    // Gradient of the active term: -2 r (w, 1).
    const double step = step0 / std::sqrt(static_cast<double>(k + 1));
    R.noalias() += (2.0 * step) * r.col(active) * problem.w.col(active).transpose();
    b += (2.0 * step) * r.col(active);
  }
  result.iterations = config.max_iterations;
  result.primal = {pack_primal(best_R, best_b), best};
  result.map = map_from_primal(problem, result.primal.x, "subgrad");
  result.final_objective = best;
  return result;
}

}  // namespace rmrc
