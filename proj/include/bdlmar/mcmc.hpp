#pragma once

// Hybrid Metropolis-Hastings / Gibbs sampler for the distributed lag model
// with autoregressive errors.
//
// One iteration:
//   1. filter (Y, [1 X]) by the current Phi(B) to get (Y*, X~*)
//   2. beta~ | .  ~ N(A^{-1} X~*'Y*, sigma^2 A^{-1}),  A = X~*'X~* + Omega~(gamma)
//   3. sigma^2 | . ~ IG((n-p+L+1)/2, (|Y* - X~* beta~|^2 + beta~' Omega~ beta~) / 2)
//   4. phi | .    ~ N(P^{-1} E*'eps*/sigma^2, P^{-1}), P = E*'E*/sigma^2 + I/200,
//                   truncated to the stationary region by rejection
//   5. gamma      random-walk MH with U(-a, a) steps

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bdlmar/ar_dynamics.hpp"
#include "bdlmar/diagnostics.hpp"
#include "bdlmar/parallel.hpp"
#include "bdlmar/posterior.hpp"
#include "bdlmar/prior_precision.hpp"
#include "bdlmar/rng.hpp"

namespace bdlmar {

inline constexpr double kSigma2RateFloor = 1e-30;

inline Eigen::LLT<Matrix> factor_precision(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericError("posterior precision is not positive definite");
  // Each squared pivot is compared with its own diagonal entry: the lag
  // penalties can differ from the data block by many orders of magnitude.
  const Matrix L = llt.matrixL();
  if (!L.diagonal().allFinite() ||
      (L.diagonal().array().square() <= kCholeskyPivotTolerance * a.diagonal().array().abs()).any())
    throw NumericError("posterior precision is numerically singular");
  return llt;
}

/// Draw beta~ = (mu, beta_0..beta_L) from its normal full conditional.
inline Vector cond_sample_beta(const Vector& ystar, const Matrix& xstar, double sigma2, const SymTridiagonal& omega,
                               RngStream& rng) {
  if (xstar.rows() != ystar.size() || xstar.cols() != omega.size())
    throw DimensionError("design, response and precision dimensions disagree");
  Matrix a = Matrix::Zero(xstar.cols(), xstar.cols());
  a.selfadjointView<Eigen::Lower>().rankUpdate(xstar.transpose());
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  omega.add_to(a);
  const auto llt = factor_precision(a);
  return sample_mvn_canonical(llt, xstar.transpose() * ystar, std::sqrt(sigma2), rng);
}

/// Inverse-gamma shape (n - p + L + 1) / 2 for a design with `rows` = n - p
/// rows and L + 2 columns.
inline double sigma2_shape(Eigen::Index rows, Eigen::Index columns) {
  return 0.5 * static_cast<double>(rows + columns - 1);
}

inline double sigma2_rate(const Vector& ystar, const Matrix& xstar, const Vector& beta_tilde,
                          const SymTridiagonal& omega) {
  const double rss = (ystar - xstar * beta_tilde).squaredNorm();
  return std::max(0.5 * (rss + quadratic_form(omega, beta_tilde)), kSigma2RateFloor);
}

inline double cond_sample_sigma2(const Vector& ystar, const Matrix& xstar, const Vector& beta_tilde,
                                 const SymTridiagonal& omega, RngStream& rng) {
  if (xstar.rows() != ystar.size() || xstar.cols() != beta_tilde.size() || omega.size() != beta_tilde.size())
    throw DimensionError("sigma^2 update dimensions disagree");
  return sample_inverse_gamma(sigma2_shape(xstar.rows(), xstar.cols()), sigma2_rate(ystar, xstar, beta_tilde, omega),
                              rng);
}

struct PhiUpdate {
  ArCoefficients phi;
  int rejections = 0;
  bool retained = false;
};

/// Stationarity-truncated normal draw of phi. `eps` is the full structural
/// residual series eps*_1..eps*_n. After more than `max_rejections`
/// non-stationary proposals the previous value is kept.
inline PhiUpdate cond_sample_phi(const Vector& eps, const ArCoefficients& previous, double sigma2, RngStream& rng,
                                 int max_rejections, double prior_variance = 200.0) {
  const int p = static_cast<int>(previous.size());
  if (p < 1) throw DomainError("phi update needs p >= 1");
  const Matrix E = error_lag_matrix(eps, p);
  const Vector target = eps.tail(eps.size() - p);
  Matrix precision = E.transpose() * E / sigma2;
  precision.diagonal().array() += 1.0 / prior_variance;
  const auto llt = factor_precision(precision);
  const Vector shift = E.transpose() * target / sigma2;

  PhiUpdate out;
  for (int attempt = 0; attempt <= max_rejections; ++attempt) {
    Vector draw = sample_mvn_canonical(llt, shift, 1.0, rng);
    if (is_stationary(draw)) {
      out.phi = std::move(draw);
      return out;
    }
    ++out.rejections;
  }
  out.phi = previous;
  out.retained = true;
  return out;
}

/// Log of the gamma full conditional up to a constant:
/// 1/2 log|Omega~(gamma)| - beta~'Omega~ beta~ / (2 sigma^2) + log prior.
/// The sigma^{-2} factor inside the determinant is constant in gamma.
inline double log_gamma_target(const GammaPair& gamma, const Vector& beta_tilde, double sigma2, int L,
                               const PriorConfig& prior) {
  const double lp = log_hyperprior(gamma, L, prior.c0, prior.penalty);
  if (!std::isfinite(lp)) return lp;
  const auto omega = omega_tilde(gamma, L, prior.c0, prior.penalty);
  const auto piv = pd_check_tridiag(omega.matrix);
  if (!piv.positive_definite) return -std::numeric_limits<double>::infinity();
  return 0.5 * piv.pivots.array().log().sum() - quadratic_form(omega.matrix, beta_tilde) / (2.0 * sigma2) + lp;
}

struct GammaUpdate {
  GammaPair gamma;
  bool accepted = false;
};

/// Accept `proposal` iff log u < log R (always when R >= 1).
inline GammaUpdate mh_decide_gamma(const GammaPair& current, const GammaPair& proposal, const Vector& beta_tilde,
                                   double sigma2, const PriorConfig& prior, double log_u) {
  const int L = static_cast<int>(beta_tilde.size()) - 2;
  const double proposed = log_gamma_target(proposal, beta_tilde, sigma2, L, prior);
  if (!std::isfinite(proposed)) return {current, false};
  const double log_r = proposed - log_gamma_target(current, beta_tilde, sigma2, L, prior);
  if (log_r >= 0.0 || log_u < log_r) return {proposal, true};
  return {current, false};
}

/// Joint random-walk proposal gamma_i' = gamma_i + U(-a, a); proposals outside
/// the support are rejected outright. Ridge priors move gamma_1 only.
inline GammaUpdate mh_step_gamma(const GammaPair& current, const Vector& beta_tilde, double sigma2, double step_a,
                                 const PriorConfig& prior, RngStream& rng) {
  GammaPair proposal = current;
  proposal.ridge_rate += sample_uniform_sym(step_a, rng);
  if (prior.penalty == PenaltyKind::FusedRidge) proposal.smooth_rate += sample_uniform_sym(step_a, rng);
  const double log_u = std::log(rng.uniform01());
  return mh_decide_gamma(current, proposal, beta_tilde, sigma2, prior, log_u);
}

/// Runs one chain. `data` must have no missing outcomes.
inline PosteriorDraws run_chain(const TrialData& data, const LagSpec& spec, const McmcConfig& cfg,
                                const PriorConfig& prior, RngStream& rng) {
  data.validate();
  if (data.has_missing()) throw DataError("outcomes must be imputed before fitting");
  spec.validate(data.size());
  cfg.validate();

  const int L = spec.lag, p = spec.ar;
  const Vector y = data.outcome_vector();
  const Matrix x_full = build_lag_matrix(std::span<const int>(data.treatment), LagSpec{L, 0});
  const Eigen::Index k = L + 2;

  ChainState s;
  s.mu = y.mean();
  s.beta = Vector::Zero(L + 1);
  s.sigma2 = std::max((y.array() - s.mu).square().sum() / static_cast<double>(y.size() - 1), 1e-8);
  s.phi = Vector::Zero(p);
  const bool update_gamma = !prior.fixed_gamma.has_value();
  s.gamma = prior.fixed_gamma.value_or(GammaPair{0.5, 0.5});
  if (prior.penalty == PenaltyKind::Ridge) s.gamma.smooth_rate = 0.0;

  PosteriorDraws draws;
  draws.lag = L;
  draws.ar = p;
  draws.penalty = prior.penalty;
  draws.has_gamma = update_gamma;
  draws.resize(cfg.stored_draws());

  Vector ystar;
  Matrix xstar;
  Matrix xtx(k, k);
  Vector xty(k);
  auto refilter = [&] {
    ystar = backshift_filter(s.phi, y);
    xstar = backshift_filter(s.phi, x_full);
    xtx.setZero();
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(xstar.transpose());
    xtx.triangularView<Eigen::StrictlyUpper>() = xtx.transpose();
    xty.noalias() = xstar.transpose() * ystar;
  };
  refilter();

  double step_a = cfg.step_a;
  Vector beta_tilde(k);
  Eigen::Index row = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    try {
      if (p > 0 && it > 0) refilter();
      const auto omega = omega_tilde(s.gamma, L, prior.c0, prior.penalty);

      Matrix a = xtx;
      omega.matrix.add_to(a);
      const auto llt = factor_precision(a);
      beta_tilde = sample_mvn_canonical(llt, xty, std::sqrt(s.sigma2), rng);
      s.mu = beta_tilde(0);
      s.beta = beta_tilde.tail(L + 1);

      s.sigma2 = sample_inverse_gamma(sigma2_shape(xstar.rows(), k), sigma2_rate(ystar, xstar, beta_tilde, omega.matrix),
                                      rng);

      if (p > 0) {
        const Vector eps = y - x_full * beta_tilde;
        auto upd = cond_sample_phi(eps, s.phi, s.sigma2, rng, cfg.max_phi_rejections, prior.phi_prior_variance);
        s.phi = std::move(upd.phi);
        if (it >= cfg.burn_in) {
          draws.phi_rejections += upd.rejections;
          draws.phi_retentions += upd.retained ? 1 : 0;
        }
      }

      if (update_gamma) {
        const auto g = mh_step_gamma(s.gamma, beta_tilde, s.sigma2, step_a, prior, rng);
        s.gamma = g.gamma;
        if (it >= cfg.burn_in) {
          ++draws.gamma_proposals;
          draws.gamma_accepted += g.accepted ? 1 : 0;
        } else if (cfg.tune_step) {
          step_a *= std::exp(((g.accepted ? 1.0 : 0.0) - 0.5) / std::pow(it + 1.0, 0.6));
        }
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (iteration " + std::to_string(it + 1) + ")");
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) draws.store(row++, s);
  }
  return draws;
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Pools per-chain columns, fills mean / equal-tailed interval / PSRF.
inline ParameterSummary summarize_scalar(const std::string& name, const std::vector<Vector>& per_chain,
                                         double ci_level) {
  ParameterSummary s;
  s.name = name;
  std::vector<double> pooled;
  for (const auto& c : per_chain) pooled.insert(pooled.end(), c.data(), c.data() + c.size());
  double sum = 0.0;
  for (double v : pooled) sum += v;
  s.mean = sum / static_cast<double>(pooled.size());
  std::sort(pooled.begin(), pooled.end());
  const double tail = 0.5 * (1.0 - ci_level);
  s.lower = quantile_sorted(pooled, tail);
  s.upper = quantile_sorted(pooled, 1.0 - tail);
  if (per_chain.size() >= 2 && per_chain.front().size() >= 10) {
    std::vector<std::span<const double>> spans;
    for (const auto& c : per_chain) spans.emplace_back(c.data(), static_cast<std::size_t>(c.size()));
    const auto r = gelman_rubin(spans);
    if (!std::isnan(r.psrf)) s.psrf = r.psrf;
  }
  return s;
}

}  // namespace detail

/// Posterior means, equal-tailed intervals and (for >= 2 chains) PSRF of every
/// scalar parameter and the derived effects, pooled over chains.
inline FitSummary summarize(std::span<const PosteriorDraws> chains, double ci_level,
                            const std::string& method = "bdlm-ar") {
  if (chains.empty() || chains.front().rows() == 0) throw DomainError("no posterior draws to summarize");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level must lie in (0, 1)");
  const auto& first = chains.front();
  for (const auto& c : chains)
    if (c.rows() != first.rows() || c.lag != first.lag || c.ar != first.ar)
      throw DimensionError("chains have inconsistent shapes");

  FitSummary out;
  out.method = method;
  out.lag = first.lag;
  out.ar = first.ar;
  out.ci_level = ci_level;
  out.chains = static_cast<int>(chains.size());
  out.draws = static_cast<long>(first.rows()) * static_cast<long>(chains.size());
  if (first.rows() < 100)
    out.diagnostics.warnings.push_back("fewer than 100 stored draws per chain; summaries are unreliable");

  auto column = [&](auto&& getter) {
    std::vector<Vector> cols;
    for (const auto& c : chains) cols.push_back(getter(c));
    return cols;
  };
  auto add = [&](const std::string& name, auto&& getter) {
    out.parameters.push_back(detail::summarize_scalar(name, column(getter), ci_level));
  };

  add("mu", [](const PosteriorDraws& d) -> Vector { return d.mu; });
  for (int l = 0; l <= first.lag; ++l)
    add("beta[" + std::to_string(l) + "]", [l](const PosteriorDraws& d) -> Vector { return d.beta.col(l); });
  add("sigma2", [](const PosteriorDraws& d) -> Vector { return d.sigma2; });
  for (int j = 1; j <= first.ar; ++j)
    add("phi[" + std::to_string(j) + "]", [j](const PosteriorDraws& d) -> Vector { return d.phi.col(j - 1); });
  if (first.has_gamma) {
    add("gamma1", [](const PosteriorDraws& d) -> Vector { return d.gamma.col(0); });
    if (first.penalty == PenaltyKind::FusedRidge)
      add("gamma2", [](const PosteriorDraws& d) -> Vector { return d.gamma.col(1); });
  }

  out.immediate = detail::summarize_scalar(
      "immediate", column([](const PosteriorDraws& d) -> Vector { return d.beta.col(0); }), ci_level);
  out.carryover = detail::summarize_scalar("carryover", column([](const PosteriorDraws& d) -> Vector {
                                             return d.beta.rightCols(d.beta.cols() - 1).rowwise().sum();
                                           }),
                                           ci_level);
  out.total = detail::summarize_scalar(
      "total", column([](const PosteriorDraws& d) -> Vector { return d.beta.rowwise().sum(); }), ci_level);

  long proposals = 0, accepted = 0;
  for (const auto& c : chains) {
    proposals += c.gamma_proposals;
    accepted += c.gamma_accepted;
    out.diagnostics.phi_rejections += c.phi_rejections;
    out.diagnostics.phi_retentions += c.phi_retentions;
  }
  if (proposals > 0) out.diagnostics.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposals);
  if (out.diagnostics.phi_retentions > 0)
    out.diagnostics.warnings.push_back(std::to_string(out.diagnostics.phi_retentions) +
                                       " phi updates exhausted the rejection cap and kept the previous value");

  if (chains.size() < 2) {
    out.diagnostics.warnings.push_back("PSRF unavailable: needs at least two chains");
  } else {
    for (const auto& p : out.parameters)
      if (p.psrf && !(*p.psrf < kPsrfThreshold)) {
        out.diagnostics.converged = false;
        out.diagnostics.warnings.push_back("PSRF for " + p.name + " is not below 1.2");
      }
  }
  return out;
}

inline FitSummary summarize(const PosteriorDraws& draws, double ci_level, const std::string& method = "bdlm-ar") {
  return summarize(std::span<const PosteriorDraws>(&draws, 1), ci_level, method);
}

/// One-step AR innovations at the posterior means: the structural residuals
/// filtered by the posterior-mean Phi(B).
inline Vector posterior_mean_innovations(const TrialData& data, const FitSummary& summary) {
  const double mu = summary.find("mu")->mean;
  const Vector eps = structural_residuals(data, mu, summary.beta_mean());
  return backshift_filter(summary.phi_mean(), eps);
}

/// Adds the Ljung-Box test on posterior-mean innovations to `summary`.
inline void attach_residual_diagnostics(FitSummary& summary, const TrialData& data, int lb_lags) {
  const Vector w = posterior_mean_innovations(data, summary);
  if (w.size() <= lb_lags) {
    summary.diagnostics.warnings.push_back("too few residuals for the Ljung-Box test");
    return;
  }
  summary.diagnostics.ljung_box = ljung_box(w, lb_lags);
}

struct FitResult {
  std::vector<PosteriorDraws> chains;
  FitSummary summary;
};

/// Runs `cfg.chains` chains (streams stream_base + c under cfg.seed) on up to
/// `jobs` threads, then summarizes and runs residual diagnostics.
inline FitResult fit_bdlm_ar(const TrialData& data, const LagSpec& spec, const McmcConfig& cfg,
                             const PriorConfig& prior = {}, int jobs = 1, int lb_lags = kDefaultLjungBoxLags,
                             const std::string& method = "bdlm-ar") {
  cfg.validate();
  FitResult out;
  out.chains.resize(static_cast<std::size_t>(cfg.chains));
  parallel_for(out.chains.size(), jobs, [&](std::size_t c) {
    RngStream rng(cfg.seed, cfg.stream_base + c);
    out.chains[c] = run_chain(data, spec, cfg, prior, rng);
  });
  out.summary = summarize(std::span<const PosteriorDraws>(out.chains), cfg.ci_level, method);
  attach_residual_diagnostics(out.summary, data, lb_lags);
  return out;
}

}  // namespace bdlmar
