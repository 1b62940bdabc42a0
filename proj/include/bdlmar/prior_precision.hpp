#pragma once

// Fused-ridge prior precision for (mu, beta_0..beta_L).
//
// The lag block is
//   Omega[0,0]   = lambda_0 + fusion_0
//   Omega[l,l]   = lambda_l + fusion_{l-1} + fusion_l        (1 <= l <= L)
//   Omega[l,l+1] = -fusion_l
// and the intercept is prepended with precision c0, so the full matrix is
// symmetric tridiagonal and is never stored densely.

#include <cmath>
#include <limits>

#include "bdlmar/core_types.hpp"

namespace bdlmar {

inline constexpr double kDefaultInterceptPrecision = 1e-4;

/// Growth rates of the ridge (gamma_1) and fusion (gamma_2) penalties.
struct GammaPair {
  double ridge_rate = 0.5;
  double smooth_rate = 0.5;

  bool in_open_quadrant() const { return ridge_rate > 0.0 && smooth_rate > 0.0; }
  friend bool operator==(const GammaPair&, const GammaPair&) = default;
};

/// Which lag prior the sampler uses. Ridge holds lambda constant over lags and
/// drops the fusion term; only gamma_1 is active.
enum class PenaltyKind { FusedRidge, Ridge };

/// Symmetric tridiagonal matrix: `diag` has k entries, `off` has k-1 signed
/// super-diagonal entries.
struct SymTridiagonal {
  Vector diag;
  Vector off;

  Eigen::Index size() const { return diag.size(); }

  Matrix dense() const {
    const Eigen::Index k = diag.size();
    Matrix m = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) m(i, i) = diag(i);
    for (Eigen::Index i = 0; i + 1 < k; ++i) m(i, i + 1) = m(i + 1, i) = off(i);
    return m;
  }

  void add_to(Matrix& m) const {
    const Eigen::Index k = diag.size();
    for (Eigen::Index i = 0; i < k; ++i) m(i, i) += diag(i);
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      m(i, i + 1) += off(i);
      m(i + 1, i) += off(i);
    }
  }
};

struct LagPenalties {
  Vector ridge;   // lambda_l
  Vector fusion;  // lambda*_l
};

/// lambda_l = exp(gamma_1 (l+1)) - 1 and lambda*_l = exp(gamma_2 (l+1)) - 1.
inline LagPenalties lambdas_from_gamma(const GammaPair& gamma, int L) {
  if (!gamma.in_open_quadrant()) throw DomainError("gamma components must be strictly positive");
  if (L < 0) throw DomainError("lag must be non-negative");
  LagPenalties out{Vector(L + 1), Vector(L + 1)};
  for (int l = 0; l <= L; ++l) {
    out.ridge(l) = std::expm1(gamma.ridge_rate * (l + 1));
    out.fusion(l) = std::expm1(gamma.smooth_rate * (l + 1));
  }
  return out;
}

/// Prior precision Omega~ = diag(c0, Omega) with its LDL^T pivots.
struct LagPrecision {
  double c0 = kDefaultInterceptPrecision;
  SymTridiagonal matrix;  // (L+2) x (L+2), intercept first
  Vector pivots;

  int lag() const { return static_cast<int>(matrix.size()) - 2; }
};

struct PivotResult {
  bool positive_definite = false;
  Vector pivots;  // truncated at the first non-positive pivot
};

/// LDL^T pivots c_0 = d_0, c_l = d_l - e_{l-1}^2 / c_{l-1}; the matrix is
/// positive definite iff every pivot is positive. O(k), stops early.
inline PivotResult pd_check_tridiag(const SymTridiagonal& m) {
  const Eigen::Index k = m.size();
  PivotResult r;
  r.pivots.resize(k);
  if (k == 0) {
    r.positive_definite = true;
    return r;
  }
  r.pivots(0) = m.diag(0);
  if (!(r.pivots(0) > 0.0)) {
    r.pivots.conservativeResize(1);
    return r;
  }
  for (Eigen::Index l = 1; l < k; ++l) {
    const double e = m.off(l - 1);
    r.pivots(l) = m.diag(l) - e * e / r.pivots(l - 1);
    if (!(r.pivots(l) > 0.0)) {
      r.pivots.conservativeResize(l + 1);
      return r;
    }
  }
  r.positive_definite = true;
  return r;
}

inline PivotResult pd_check_tridiag(const LagPrecision& p) { return pd_check_tridiag(p.matrix); }

/// Builds Omega~ from c0 and the penalty vectors. Fusion entries may be zero
/// (pure ridge); ridge entries must be non-negative.
inline LagPrecision build_omega_tilde(double c0, const Vector& ridge, const Vector& fusion) {
  if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
  if (ridge.size() != fusion.size() || ridge.size() == 0)
    throw DimensionError("ridge and fusion penalty vectors must have equal length L+1 >= 1");
  if ((ridge.array() < 0.0).any() || (fusion.array() < 0.0).any())
    throw DomainError("penalties must be non-negative");
  const Eigen::Index L = ridge.size() - 1;
  LagPrecision p;
  p.c0 = c0;
  p.matrix.diag.resize(L + 2);
  p.matrix.off = Vector::Zero(L + 1);
  p.matrix.diag(0) = c0;
  for (Eigen::Index l = 0; l <= L; ++l) {
    double d = ridge(l) + fusion(l);
    if (l > 0) d += fusion(l - 1);
    p.matrix.diag(l + 1) = d;
    if (l < L) p.matrix.off(l + 1) = -fusion(l);
  }
  p.pivots = pd_check_tridiag(p.matrix).pivots;
  return p;
}

/// Omega~(gamma) for either prior family.
inline LagPrecision omega_tilde(const GammaPair& gamma, int L, double c0 = kDefaultInterceptPrecision,
                                PenaltyKind kind = PenaltyKind::FusedRidge) {
  if (kind == PenaltyKind::FusedRidge) {
    const auto lam = lambdas_from_gamma(gamma, L);
    return build_omega_tilde(c0, lam.ridge, lam.fusion);
  }
  if (!(gamma.ridge_rate > 0.0)) throw DomainError("gamma_1 must be strictly positive");
  return build_omega_tilde(c0, Vector::Constant(L + 1, std::expm1(gamma.ridge_rate)), Vector::Zero(L + 1));
}

/// Sum of log pivots.
inline double log_det_tridiag(const SymTridiagonal& m) {
  const auto r = pd_check_tridiag(m);
  if (!r.positive_definite) throw DomainError("log-determinant requires a positive definite matrix");
  return r.pivots.array().log().sum();
}

inline double log_det_tridiag(const LagPrecision& p) { return log_det_tridiag(p.matrix); }

/// v' M v in O(k).
inline double quadratic_form(const SymTridiagonal& m, const Vector& v) {
  if (v.size() != m.size()) throw DimensionError("vector length does not match matrix dimension");
  double q = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) q += m.diag(i) * v(i) * v(i);
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) q += 2.0 * m.off(i) * v(i) * v(i + 1);
  return q;
}

inline double quadratic_form(const LagPrecision& p, const Vector& v) { return quadratic_form(p.matrix, v); }

/// Truncated standard exponential hyperprior, log density up to a constant.
inline double log_hyperprior(const GammaPair& gamma, int L, double c0 = kDefaultInterceptPrecision,
                             PenaltyKind kind = PenaltyKind::FusedRidge) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (kind == PenaltyKind::Ridge) {
    if (!(gamma.ridge_rate > 0.0)) return kNegInf;
    return -gamma.ridge_rate;
  }
  if (!gamma.in_open_quadrant()) return kNegInf;
  if (!pd_check_tridiag(omega_tilde(gamma, L, c0, kind).matrix).positive_definite) return kNegInf;
  return -gamma.ridge_rate - gamma.smooth_rate;
}

}  // namespace bdlmar
