#pragma once

// Residual whiteness and MCMC convergence checks.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "bdlmar/posterior.hpp"

namespace bdlmar {

inline constexpr int kDefaultLjungBoxLags = 10;
inline constexpr double kPsrfThreshold = 1.2;

/// Q = m(m+2) sum_{k<=h} r_k^2 / (m-k), chi-square(h) upper tail.
inline LjungBoxResult ljung_box(std::span<const double> residuals, int h = kDefaultLjungBoxLags) {
  const auto m = static_cast<long>(residuals.size());
  if (h < 1) throw DomainError("Ljung-Box needs at least one lag");
  if (m <= h) throw DomainError("Ljung-Box needs more residuals than lags (m=" + std::to_string(m) +
                                ", h=" + std::to_string(h) + ")");
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(m);
  double c0 = 0.0;
  for (double r : residuals) c0 += (r - mean) * (r - mean);

  LjungBoxResult out;
  out.h = h;
  out.df = h;
  if (c0 > 0.0) {
    double q = 0.0;
    for (long k = 1; k <= h; ++k) {
      double ck = 0.0;
      for (long t = k; t < m; ++t) ck += (residuals[t] - mean) * (residuals[t - k] - mean);
      const double rk = ck / c0;
      q += rk * rk / static_cast<double>(m - k);
    }
    out.q = static_cast<double>(m) * static_cast<double>(m + 2) * q;
  }
  out.p_value = out.q > 0.0 ? boost::math::gamma_q(0.5 * out.df, 0.5 * out.q) : 1.0;
  return out;
}

inline LjungBoxResult ljung_box(const Vector& residuals, int h = kDefaultLjungBoxLags) {
  return ljung_box(std::span<const double>(residuals.data(), static_cast<std::size_t>(residuals.size())), h);
}

struct PsrfResult {
  double psrf = std::numeric_limits<double>::quiet_NaN();
  double within = 0.0;          // W
  double between_over_n = 0.0;  // B/n: variance of chain means
};

/// Potential scale reduction factor sqrt(V/W), V = (n-1)/n W + B/n, for equal
/// length chains. With `split`, each chain is halved first.
inline PsrfResult gelman_rubin(const std::vector<std::span<const double>>& chains, bool split = false) {
  if (chains.size() < 2) throw DomainError("PSRF needs at least two chains");
  for (auto c : chains) {
    if (c.size() != chains.front().size()) throw DimensionError("PSRF chains must have equal length");
    if (c.size() < 10) throw DomainError("PSRF chains must have at least 10 draws");
  }
  std::vector<std::span<const double>> parts;
  if (split) {
    for (auto c : chains) {
      const std::size_t half = c.size() / 2;
      parts.push_back(c.subspan(0, half));
      parts.push_back(c.subspan(c.size() - half, half));
    }
  } else {
    parts = chains;
  }
  const std::size_t n = parts.front().size();

  const double m = static_cast<double>(parts.size());
  const double nn = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (auto c : parts) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= nn;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    w += ss / (nn - 1.0);
    means.push_back(mean);
  }
  w /= m;
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= m;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= (m - 1.0);

  PsrfResult r;
  r.within = w;
  r.between_over_n = b_over_n;
  if (w > 0.0) {
    const double v = (nn - 1.0) / nn * w + b_over_n;
    r.psrf = std::sqrt(v / w);
  } else if (b_over_n > 0.0) {
    r.psrf = std::numeric_limits<double>::infinity();
  }
  return r;
}

/// Accepted / proposed gamma moves after burn-in.
inline double acceptance_rate(const PosteriorDraws& draws) {
  if (draws.gamma_proposals <= 0) throw DomainError("no post-burn-in gamma proposals recorded");
  return static_cast<double>(draws.gamma_accepted) / static_cast<double>(draws.gamma_proposals);
}

}  // namespace bdlmar
