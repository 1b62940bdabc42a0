#pragma once

// Comparison estimators: flat-prior DLM (NB-DLM), ridge-prior DLM (BR-DLM)
// and the geometric-lag Koyck DLM with known AR errors.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bdlmar/mcmc.hpp"

namespace bdlmar {

namespace detail {

inline void require_independent_errors(const LagSpec& spec, const char* method) {
  if (spec.ar != 0) throw DomainError(std::string(method) + " assumes independent errors; use p = 0");
}

inline Eigen::LLT<Matrix> factor_gram(const Matrix& x) {
  const Matrix gram = x.transpose() * x;
  Eigen::LLT<Matrix> llt(gram);
  const double scale = std::max(gram.diagonal().maxCoeff(), 1.0);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Matrix L = llt.matrixL();
    ok = (L.diagonal().array().square() > 1e-10 * scale).all();
  }
  if (!ok)
    throw NumericError("lagged design matrix is rank deficient; use a shorter lag L or a design with more "
                       "treatment switches");
  return llt;
}

}  // namespace detail

/// Flat priors on (mu, beta) and sigma^2 with independent errors. Each stored
/// draw is exact: sigma^2 ~ IG((n-L-2)/2, RSS/2), then
/// beta~ | sigma^2 ~ N(beta_OLS, sigma^2 (X'X)^{-1}).
inline FitResult fit_nb_dlm(const TrialData& data, const LagSpec& spec, const McmcConfig& cfg, int jobs = 1) {
  detail::require_independent_errors(spec, "NB-DLM");
  data.validate();
  if (data.has_missing()) throw DataError("outcomes must be imputed before fitting");
  spec.validate(data.size());
  cfg.validate();

  const Matrix x = build_lag_matrix(data, spec);
  const Vector y = data.outcome_vector();
  const auto llt = detail::factor_gram(x);
  const Vector ols = llt.solve(x.transpose() * y);
  const double rss = (y - x * ols).squaredNorm();
  const double shape = 0.5 * static_cast<double>(x.rows() - x.cols());
  if (!(shape > 0.0)) throw DimensionError("NB-DLM needs more observations than coefficients");
  const double rate = std::max(0.5 * rss, kSigma2RateFloor);
  const Matrix upper = llt.matrixU();

  FitResult out;
  out.chains.resize(static_cast<std::size_t>(cfg.chains));
  parallel_for(out.chains.size(), jobs, [&](std::size_t c) {
    RngStream rng(cfg.seed, cfg.stream_base + c);
    PosteriorDraws d;
    d.lag = spec.lag;
    d.ar = 0;
    d.has_gamma = false;
    d.resize(cfg.stored_draws());
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      ChainState s;
      s.sigma2 = sample_inverse_gamma(shape, rate, rng);
      const Vector z = standard_normal_vector(x.cols(), rng);
      const Vector bt = ols + std::sqrt(s.sigma2) * upper.triangularView<Eigen::Upper>().solve(z);
      s.mu = bt(0);
      s.beta = bt.tail(spec.lag + 1);
      d.store(r, s);
    }
    out.chains[c] = std::move(d);
  });
  out.summary = summarize(std::span<const PosteriorDraws>(out.chains), cfg.ci_level, "nb-dlm");
  attach_residual_diagnostics(out.summary, data, kDefaultLjungBoxLags);
  return out;
}

/// Ridge prior: the BDLM-AR sampler with p = 0, no fusion term and a constant
/// lambda = exp(gamma_1) - 1 across lags under the same exponential hyperprior.
inline FitResult fit_br_dlm(const TrialData& data, const LagSpec& spec, const McmcConfig& cfg,
                            PriorConfig prior = {}, int jobs = 1) {
  detail::require_independent_errors(spec, "BR-DLM");
  prior.penalty = PenaltyKind::Ridge;
  return fit_bdlm_ar(data, spec, cfg, prior, jobs, kDefaultLjungBoxLags, "br-dlm");
}

/// Geometric lag curve beta_l = beta_0 rho^l, l = 0..L.
struct KoyckFit {
  double mu = 0.0;
  double beta0 = 0.0;
  double rho = 0.0;
  double rss = 0.0;
  int lag = 0;

  Vector lag_curve() const {
    Vector b(lag + 1);
    double w = 1.0;
    for (int l = 0; l <= lag; ++l, w *= rho) b(l) = beta0 * w;
    return b;
  }
};

inline constexpr int kKoyckGridSteps = 990;  // rho = 0.001 .. 0.990
inline constexpr double kKoyckGridStep = 0.001;

struct KoyckProfilePoint {
  double rho;
  double rss;
  double mu;
  double beta0;
};

/// Residual sum of squares over the rho grid after GLS filtering with the
/// known AR coefficients. Deterministic.
inline std::vector<KoyckProfilePoint> koyck_profile(const TrialData& data, int L, const ArCoefficients& phi_known) {
  if (!is_stationary(phi_known)) throw DomainError("Koyck benchmark needs stationary AR coefficients");
  data.validate();
  if (data.has_missing()) throw DataError("outcomes must be imputed before fitting");
  const LagSpec spec{L, static_cast<int>(phi_known.size())};
  spec.validate(data.size());

  const Matrix x_full = build_lag_matrix(data, LagSpec{L, 0});
  const Matrix xf = backshift_filter(phi_known, x_full);  // column 0: filtered constant
  const Vector yf = backshift_filter(phi_known, data.outcome_vector());
  const Vector c = xf.col(0);
  const Matrix lags = xf.rightCols(L + 1);

  std::vector<KoyckProfilePoint> out;
  out.reserve(kKoyckGridSteps);
  Vector w(L + 1);
  for (int k = 1; k <= kKoyckGridSteps; ++k) {
    const double rho = k * kKoyckGridStep;
    double pw = 1.0;
    for (int l = 0; l <= L; ++l, pw *= rho) w(l) = pw;
    const Vector z = lags * w;
    const double scc = c.squaredNorm(), szz = z.squaredNorm(), scz = c.dot(z);
    const double scy = c.dot(yf), szy = z.dot(yf);
    const double det = scc * szz - scz * scz;
    if (!(det > 1e-12 * std::max(scc * szz, 1.0))) {
      out.push_back({rho, std::numeric_limits<double>::infinity(), 0.0, 0.0});
      continue;
    }
    const double mu = (szz * scy - scz * szy) / det;
    const double b0 = (scc * szy - scz * scy) / det;
    out.push_back({rho, (yf - mu * c - b0 * z).squaredNorm(), mu, b0});
  }
  return out;
}

/// Profile maximum likelihood: the grid rho with the smallest RSS (first on ties).
inline KoyckFit fit_koyck(const TrialData& data, int L, const ArCoefficients& phi_known) {
  const auto profile = koyck_profile(data, L, phi_known);
  const KoyckProfilePoint* best = nullptr;
  for (const auto& pt : profile)
    if (std::isfinite(pt.rss) && (best == nullptr || pt.rss < best->rss)) best = &pt;
  if (best == nullptr) throw NumericError("Koyck regression is degenerate for every rho on the grid");
  return KoyckFit{best->mu, best->beta0, best->rho, best->rss, L};
}

}  // namespace bdlmar
