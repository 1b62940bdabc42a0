#pragma once

// Autoregressive error machinery: stationarity, backshift filtering,
// structural residuals, error-lag matrices and AR noise simulation.

#include <cmath>
#include <vector>

#include "bdlmar/core_types.hpp"
#include "bdlmar/rng.hpp"

namespace bdlmar {

/// phi_1..phi_p of Phi(B) = 1 - sum phi_l B^l.
using ArCoefficients = Vector;

inline constexpr int kDefaultArWarmup = 500;

/// True iff every root of 1 - sum phi_l z^l lies strictly outside the unit
/// circle. Schur-Cohn step-down: the reflection coefficient at order m is
/// phi_m, and the order-(m-1) polynomial is
///   phi_i <- (phi_i + phi_m phi_{m-i}) / (1 - phi_m^2).
/// Stationary iff every |reflection| < 1; roots on the circle fail. A
/// reflection within kUnitRootTolerance of 1 counts as on the circle, since
/// the recursion cannot resolve a unit root exactly (0.5, 0, 0, 0.3, 0, 0.2
/// ends at 1 - 2e-16).
inline constexpr double kUnitRootTolerance = 1e-12;

inline bool is_stationary(const ArCoefficients& phi) {
  std::vector<double> a(phi.data(), phi.data() + phi.size());
  for (std::size_t m = a.size(); m > 0; --m) {
    const double k = a[m - 1];
    if (!std::isfinite(k) || std::abs(k) >= 1.0 - kUnitRootTolerance) return false;
    const double denom = 1.0 - k * k;
    std::vector<double> next(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = (a[i] + k * a[m - 2 - i]) / denom;
    a = std::move(next);
  }
  return true;
}

/// Entries t = p+1..n of Phi(B) applied to the series.
inline Vector backshift_filter(const ArCoefficients& phi, const Vector& series) {
  const Eigen::Index p = phi.size(), n = series.size();
  if (n <= p) throw DimensionError("series must be longer than the AR order");
  Vector out = series.tail(n - p);
  for (Eigen::Index l = 1; l <= p; ++l) out.noalias() -= phi(l - 1) * series.segment(p - l, n - p);
  return out;
}

/// Columnwise backshift filter: rows t = p+1..n of Phi(B) applied to each
/// column of a full-length (n-row) matrix.
inline Matrix backshift_filter(const ArCoefficients& phi, const Matrix& columns) {
  const Eigen::Index p = phi.size(), n = columns.rows();
  if (n <= p) throw DimensionError("series must be longer than the AR order");
  Matrix out = columns.bottomRows(n - p);
  for (Eigen::Index l = 1; l <= p; ++l) out.noalias() -= phi(l - 1) * columns.middleRows(p - l, n - p);
  return out;
}

/// eps*_t = Y_t - mu - sum_l beta_l X_{t-l} for t = 1..n, X_s = 0 for s <= 0.
inline Vector structural_residuals(const TrialData& data, double mu, const Vector& beta) {
  data.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  if (beta.size() < 1) throw DimensionError("beta must have at least one coefficient");
  Vector eps(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double fit = mu;
    for (Eigen::Index l = 0; l < beta.size() && l <= t; ++l) fit += beta(l) * data.treatment[static_cast<std::size_t>(t - l)];
    eps(t) = data.outcome[static_cast<std::size_t>(t)] - fit;
  }
  return eps;
}

/// (n-p) x p matrix whose (k, j) entry (1-based) is eps*_{p+k-j}.
inline Matrix error_lag_matrix(const Vector& eps, int p) {
  if (p < 0) throw DomainError("AR order must be non-negative");
  const Eigen::Index n = eps.size();
  if (n <= p) throw DimensionError("residual series must be longer than the AR order");
  Matrix E(n - p, p);
  for (int j = 1; j <= p; ++j) E.col(j - 1) = eps.segment(p - j, n - p);
  return E;
}

/// AR recursion without the stationarity guard, for truths that sit on the
/// unit circle. No stationary law exists then, so warm-up is meaningless.
inline Vector simulate_ar_noise_unchecked(const ArCoefficients& phi, double sigma, int n, int warmup,
                                          RngStream& rng) {
  if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
  if (n < 0 || warmup < 0) throw DomainError("lengths must be non-negative");
  const Eigen::Index p = phi.size();
  const Eigen::Index total = static_cast<Eigen::Index>(n) + warmup;
  Vector eps = Vector::Zero(total);
  for (Eigen::Index t = 0; t < total; ++t) {
    double v = sigma * rng.normal();
    for (Eigen::Index l = 1; l <= p && l <= t; ++l) v += phi(l - 1) * eps(t - l);
    eps(t) = v;
  }
  return eps.tail(n);
}

/// AR(p) noise from a zero initial state with `warmup` discarded steps.
inline Vector simulate_ar_noise(const ArCoefficients& phi, double sigma, int n, int warmup, RngStream& rng) {
  if (!is_stationary(phi)) throw DomainError("AR coefficients are not stationary");
  return simulate_ar_noise_unchecked(phi, sigma, n, warmup, rng);
}

}  // namespace bdlmar
