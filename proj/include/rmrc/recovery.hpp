#pragma once

#include "rmrc/reduced.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>

namespace rmrc {

/// A(w) = w + B w + c in ambient coordinates: the first m coordinates are the
/// measurement w, the last N are the complement coordinates c + B w.
struct AffineRecoveryMap {
  std::string method;
  Index m = 0;
  Index n_complement = 0;
  Matrix B;  // N x m
  Vector c;  // N
  std::uint64_t basis_fingerprint = 0;
  /// Offset state of an affine one-space map, kept for reporting.
  std::optional<Vector> offset;

  Vector complement(const Vector& w) const;
  /// (w, c + B w).
  Vector apply_coordinates(const Vector& w) const;
};

AffineRecoveryMap minimal_norm_map(Index m, Index n_complement);

/// Linear one-space (PBDW) map for V_n given in favorable form with W_m.
/// Throws UnstableSpace when s_n <= 1e-14.
AffineRecoveryMap one_space_map(const FavorablePair& pair, const AmbientBasis& ambient);

/// ubar + A_n(w - P_W ubar), with `pair` built for the linear part of V_n.
AffineRecoveryMap affine_one_space_map(const FavorablePair& pair, const Vector& offset, const AmbientBasis& ambient);

/// Mean-square-optimal affine map fitted from columns (w^j, u_perp^j).
/// S11 is inverted by a pseudoinverse with relative cutoff `rel_tol`; a
/// positive `ridge` is added to its diagonal first.
AffineRecoveryMap msa_fit(const Matrix& w, const Matrix& perp, double rel_tol = 1e-12, double ridge = 0.0);

/// B = S21 pinv(S11).
Matrix msa_coefficients(const Matrix& s11, const Matrix& s21, double rel_tol = 1e-12);

/// Nodal reconstruction sum w_i psi_i + sum (c + B w)_k psi_{m+k}.
Vector apply_map(const AffineRecoveryMap& map, const Vector& w, const AmbientBasis& ambient);

/// One-space description of an affine lifting w -> w + B w + c, expressed in
/// the canonical coordinates of R^{m+N}.
struct OneSpaceLift {
  FavorablePair pair;
  Vector offset;  // ubar
  Vector alpha;   // singular values of B, nonincreasing
  AmbientBasis ambient;
};

OneSpaceLift lifting_to_one_space(const Matrix& B, const Vector& c);
inline OneSpaceLift lifting_to_one_space(const Matrix& B) { return lifting_to_one_space(B, Vector::Zero(B.rows())); }

/// 1-based argmin of errors[n-1] over n, smallest n on ties.
Index select_nstar(std::span<const double> errors);

/// Text header (method, m, N, basis fingerprint) followed by B row-major and c
/// as little-endian doubles.
void write_map(const std::filesystem::path& path, const AffineRecoveryMap& map);
AffineRecoveryMap read_map(const std::filesystem::path& path);

}  // namespace rmrc
