#pragma once

// Sampler configuration, chain state and stored draws.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdlmar/ar_dynamics.hpp"
#include "bdlmar/prior_precision.hpp"

namespace bdlmar {

struct McmcConfig {
  int iterations = 50000;
  int burn_in = 25000;
  int chains = 4;
  double step_a = 0.2;
  std::uint64_t seed = 1;
  /// Chain c samples from stream stream_base + c under `seed`.
  std::uint64_t stream_base = 0;
  int thin = 1;
  int max_phi_rejections = 100;
  double ci_level = 0.90;
  /// Robbins-Monro adaptation of step_a during burn-in, targeting 50%
  /// acceptance. Off by default.
  bool tune_step = false;

  void validate() const {
    if (iterations <= 0) throw DomainError("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw DomainError("burn-in must satisfy 0 <= burn_in < iterations");
    if (chains < 1) throw DomainError("at least one chain is required");
    if (!(step_a > 0.0)) throw DomainError("step_a must be positive");
    if (thin < 1) throw DomainError("thin must be >= 1");
    if (max_phi_rejections < 0) throw DomainError("max_phi_rejections must be >= 0");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level must lie in (0, 1)");
  }

  int stored_draws() const { return (iterations - burn_in + thin - 1) / thin; }
};

/// Prior settings shared by BDLM-AR and its ridge specialization.
struct PriorConfig {
  double c0 = kDefaultInterceptPrecision;
  double phi_prior_variance = 200.0;
  PenaltyKind penalty = PenaltyKind::FusedRidge;
  /// Hold gamma at this value instead of updating it.
  std::optional<GammaPair> fixed_gamma;
};

struct ChainState {
  double mu = 0.0;
  Vector beta;
  double sigma2 = 1.0;
  ArCoefficients phi;
  GammaPair gamma;
};

/// Post-burn-in, thinned draws of one chain. Row i of every block is the same
/// stored iteration.
struct PosteriorDraws {
  int lag = 0;
  int ar = 0;
  PenaltyKind penalty = PenaltyKind::FusedRidge;
  bool has_gamma = true;

  Vector mu;
  Matrix beta;    // rows x (L+1)
  Vector sigma2;
  Matrix phi;     // rows x p
  Matrix gamma;   // rows x 2

  long gamma_proposals = 0;  // post-burn-in
  long gamma_accepted = 0;   // post-burn-in
  long phi_rejections = 0;   // non-stationary proposals discarded
  long phi_retentions = 0;   // updates that exhausted the cap and kept phi

  Eigen::Index rows() const { return mu.size(); }

  void resize(Eigen::Index rows) {
    mu.resize(rows);
    beta.resize(rows, lag + 1);
    sigma2.resize(rows);
    phi.resize(rows, ar);
    gamma.resize(rows, 2);
  }

  void store(Eigen::Index row, const ChainState& s) {
    mu(row) = s.mu;
    beta.row(row) = s.beta.transpose();
    sigma2(row) = s.sigma2;
    if (ar > 0) phi.row(row) = s.phi.transpose();
    gamma(row, 0) = s.gamma.ridge_rate;
    gamma(row, 1) = s.gamma.smooth_rate;
  }
};

/// Mean and equal-tailed interval of one scalar.
struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> psrf;
};

struct LjungBoxResult {
  double q = 0.0;
  int h = 0;
  int df = 0;
  double p_value = 1.0;
};

struct FitDiagnostics {
  std::optional<LjungBoxResult> ljung_box;
  std::optional<double> acceptance_rate;
  long phi_retentions = 0;
  long phi_rejections = 0;
  bool converged = true;  // every available PSRF < 1.2
  std::vector<std::string> warnings;
};

struct FitSummary {
  std::string method;
  int lag = 0;
  int ar = 0;
  double ci_level = 0.90;
  long draws = 0;
  int chains = 0;
  std::vector<ParameterSummary> parameters;  // mu, beta[l], sigma2, phi[j], gamma
  ParameterSummary immediate, carryover, total;
  FitDiagnostics diagnostics;

  const ParameterSummary* find(const std::string& name) const {
    for (const auto& p : parameters)
      if (p.name == name) return &p;
    if (name == "immediate") return &immediate;
    if (name == "carryover") return &carryover;
    if (name == "total") return &total;
    return nullptr;
  }

  Vector beta_mean() const {
    Vector b(lag + 1);
    for (int l = 0; l <= lag; ++l) b(l) = find("beta[" + std::to_string(l) + "]")->mean;
    return b;
  }

  Vector phi_mean() const {
    Vector f(ar);
    for (int j = 1; j <= ar; ++j) f(j - 1) = find("phi[" + std::to_string(j) + "]")->mean;
    return f;
  }
};

}  // namespace bdlmar
