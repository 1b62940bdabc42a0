#pragma once

// Simulation study: scenario presets, trial generation, estimator runs and
// bias / RMSE / Euclidean-distance aggregation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bdlmar/baselines.hpp"
#include "bdlmar/mcmc.hpp"
#include "bdlmar/parallel.hpp"

namespace bdlmar {

enum class LagCurve { LC1, LC2, LC3, LC4, LC5 };

inline std::string to_string(LagCurve id) {
  static const char* names[] = {"LC1", "LC2", "LC3", "LC4", "LC5"};
  return names[static_cast<int>(id)];
}

inline LagCurve parse_lag_curve(const std::string& s) {
  for (int i = 0; i < 5; ++i)
    if (s == to_string(static_cast<LagCurve>(i))) return static_cast<LagCurve>(i);
  throw DomainError("unknown lag curve '" + s + "' (expected LC1..LC5)");
}

/// The five true lag curves, beta_0..beta_7.
inline Vector lag_curve(LagCurve id) {
  Vector b(8);
  switch (id) {
    case LagCurve::LC1: b << 5, 2.5, 1.25, 0.625, 0.3125, 0, 0, 0; break;
    case LagCurve::LC2: b << 5, 2.5, -1.25, -0.625, 0.3125, 0, 0, 0; break;
    case LagCurve::LC3: b << 1.51, 2.75, 3.36, 2.03, 0.34, 0, 0, 0; break;
    case LagCurve::LC4: b << 1.51, 2.75, -3.36, -2.03, 0.34, 0, 0, 0; break;
    case LagCurve::LC5: b << 10, 0, 0, 0, 0, 0, 0, 0; break;
  }
  return b;
}

inline constexpr int kPresetTrialLength = 120;

/// Preset treatment sequences on 120 days.
/// kind 1: 30-day blocks 1,0,0,1. kind 2: 15-day blocks 1,0,0,1,0,1,1,0.
inline std::vector<int> make_sequence(int kind, int n = kPresetTrialLength) {
  if (kind != 1 && kind != 2) throw DomainError("sequence kind must be 1 or 2");
  if (n != kPresetTrialLength) throw DomainError("preset sequences are defined for n = 120 only");
  static const int pattern1[] = {1, 0, 0, 1};
  static const int pattern2[] = {1, 0, 0, 1, 0, 1, 1, 0};
  const int block = kind == 1 ? 30 : 15;
  std::vector<int> x(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) x[static_cast<std::size_t>(t)] = kind == 1 ? pattern1[t / block] : pattern2[t / block];
  return x;
}

enum class ErrorTruth { E1, E2 };

inline ErrorTruth parse_error_truth(const std::string& s) {
  if (s == "E1") return ErrorTruth::E1;
  if (s == "E2") return ErrorTruth::E2;
  throw DomainError("unknown error truth '" + s + "' (expected E1 or E2)");
}

inline std::string to_string(ErrorTruth e) { return e == ErrorTruth::E1 ? "E1" : "E2"; }

/// E1: AR(1) with phi = 0.5. E2: (0.5, 0, 0, 0.3, 0, 0.2).
/// Note E2's coefficients sum to 1, so Phi(1) = 0: a unit root.
inline ArCoefficients error_truth(ErrorTruth e) {
  if (e == ErrorTruth::E1) return ArCoefficients::Constant(1, 0.5);
  ArCoefficients phi(6);
  phi << 0.5, 0, 0, 0.3, 0, 0.2;
  return phi;
}

/// One simulation cell.
struct ScenarioSpec {
  std::string lag_curve_name = "LC1";
  Vector beta = lag_curve(LagCurve::LC1);
  std::string sequence_name = "1";
  std::vector<int> treatment = make_sequence(1);
  double sigma = 10.0;
  ArCoefficients phi_true = ArCoefficients::Constant(1, 0.5);
  double mu = 0.0;
  int replicates = 20;
  std::uint64_t master_seed = 1;
  int warmup = kDefaultArWarmup;
  /// Permit truths on the unit circle (E2). Noise then starts from zero on
  /// day 1 with no warm-up.
  bool allow_nonstationary_truth = false;

  int n() const { return static_cast<int>(treatment.size()); }

  void validate() const {
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be non-negative");
    if (beta.size() < 1) throw DimensionError("lag curve must have at least one coefficient");
    if (treatment.size() < 2) throw DimensionError("trial must have at least 2 days");
    if (!allow_nonstationary_truth && !is_stationary(phi_true))
      throw DomainError("true AR coefficients are not stationary");
  }

  static ScenarioSpec preset(LagCurve curve, int sequence, double sigma, ArCoefficients phi, int replicates,
                             std::uint64_t master_seed) {
    ScenarioSpec s;
    s.lag_curve_name = to_string(curve);
    s.beta = lag_curve(curve);
    s.sequence_name = std::to_string(sequence);
    s.treatment = make_sequence(sequence);
    s.sigma = sigma;
    s.phi_true = std::move(phi);
    s.replicates = replicates;
    s.master_seed = master_seed;
    if (!is_stationary(s.phi_true)) {
      s.allow_nonstationary_truth = true;
      s.warmup = 0;
    }
    return s;
  }
};

/// Stream ids under the master seed: replicate r owns ids [r << 24, (r+1) << 24).
/// Offset 0 generates data; fit slot s (>= 0) uses offset (s + 1) << 8 plus the
/// chain index.
inline std::uint64_t data_stream_id(int replicate) { return static_cast<std::uint64_t>(replicate) << 24; }

inline std::uint64_t fit_stream_base(int replicate, int slot) {
  return data_stream_id(replicate) + (static_cast<std::uint64_t>(slot + 1) << 8);
}

/// Y_t = mu + sum_l beta_l X_{t-l} + eps_t with AR noise; deterministic per
/// (master_seed, replicate).
inline TrialData generate_trial(const ScenarioSpec& spec, int replicate) {
  spec.validate();
  RngStream rng(spec.master_seed, data_stream_id(replicate));
  const int n = spec.n();
  const Vector noise = spec.allow_nonstationary_truth
                           ? simulate_ar_noise_unchecked(spec.phi_true, spec.sigma, n, spec.warmup, rng)
                           : simulate_ar_noise(spec.phi_true, spec.sigma, n, spec.warmup, rng);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    double v = spec.mu + noise(t);
    for (int l = 0; l < spec.beta.size() && l <= t; ++l) v += spec.beta(l) * spec.treatment[static_cast<std::size_t>(t - l)];
    y[static_cast<std::size_t>(t)] = v;
  }
  return TrialData::from(spec.treatment, std::move(y));
}

/// Point estimate of the lag curve, plus a stationarity audit of any stored
/// phi draws.
struct Estimate {
  Vector beta;
  long phi_draws = 0;
  long phi_nonstationary = 0;
};

using Estimator =
    std::function<Estimate(const TrialData&, const ScenarioSpec&, const LagSpec&, const McmcConfig&)>;

struct MethodSpec {
  std::string name;
  LagSpec working;
  Estimator estimator;
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"bdlm-ar", "nb-dlm", "br-dlm", "koyck"};
  return names;
}

namespace detail {

inline Estimate estimate_from_fit(const FitResult& fit) {
  Estimate e;
  e.beta = fit.summary.beta_mean();
  for (const auto& c : fit.chains) {
    if (c.phi.cols() == 0) continue;
    for (Eigen::Index r = 0; r < c.phi.rows(); ++r) {
      ++e.phi_draws;
      if (!is_stationary(c.phi.row(r).transpose())) ++e.phi_nonstationary;
    }
  }
  return e;
}

}  // namespace detail

/// Built-in estimators. NB-DLM and BR-DLM ignore the working AR order (they
/// assume independent errors); Koyck uses the scenario's true phi. The name
/// "bdlagm" is reserved for an externally supplied estimator.
inline MethodSpec builtin_method(const std::string& name, LagSpec working) {
  if (name == "bdlm-ar") {
    return {name, working, [](const TrialData& d, const ScenarioSpec&, const LagSpec& w, const McmcConfig& cfg) {
              return detail::estimate_from_fit(fit_bdlm_ar(d, w, cfg));
            }};
  }
  if (name == "nb-dlm") {
    working.ar = 0;
    return {name, working, [](const TrialData& d, const ScenarioSpec&, const LagSpec& w, const McmcConfig& cfg) {
              return detail::estimate_from_fit(fit_nb_dlm(d, w, cfg));
            }};
  }
  if (name == "br-dlm") {
    working.ar = 0;
    return {name, working, [](const TrialData& d, const ScenarioSpec&, const LagSpec& w, const McmcConfig& cfg) {
              return detail::estimate_from_fit(fit_br_dlm(d, w, cfg));
            }};
  }
  if (name == "koyck") {
    working.ar = -1;  // resolved per scenario: the true AR order
    return {name, working, [](const TrialData& d, const ScenarioSpec& s, const LagSpec& w, const McmcConfig&) {
              return Estimate{fit_koyck(d, w.lag, s.phi_true).lag_curve()};
            }};
  }
  if (name == "bdlagm") throw UsageError("method 'bdlagm' is reserved for an external plug-in and is not built in");
  throw UsageError("unknown method '" + name + "' (known: bdlm-ar, nb-dlm, br-dlm, koyck)");
}

struct MetricsRow {
  std::string scenario;
  std::string sequence;
  double sigma = 0.0;
  std::string phi;
  std::string method;
  int working_lag = 0;
  int working_ar = 0;
  std::string estimand;
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  int n_reps = 0;
  int n_failed = 0;
};

struct ReplicateFailure {
  std::size_t cell = 0;
  int replicate = 0;
  std::string method;
  std::string message;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<ReplicateFailure> failures;
  long phi_draws = 0;
  long phi_nonstationary = 0;
};

inline std::string format_phi(const ArCoefficients& phi) {
  std::string s;
  char buf[32];
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%g", phi(i));
    if (i) s += ';';
    s += buf;
  }
  return s.empty() ? "0" : s;
}

namespace detail {

/// Appends bias / RMSE rows for one (cell, method) from successful replicates.
inline void aggregate_cell(const ScenarioSpec& cell, const MethodSpec& method, const std::vector<const Estimate*>& ok,
                           int n_failed, std::vector<MetricsRow>& rows) {
  const int working_ar = method.working.ar < 0 ? static_cast<int>(cell.phi_true.size()) : method.working.ar;
  auto row = [&](const std::string& estimand, double truth, const std::vector<double>& errors) {
    MetricsRow r{cell.lag_curve_name, cell.sequence_name, cell.sigma, format_phi(cell.phi_true), method.name,
                 method.working.lag, working_ar, estimand, truth, 0.0, 0.0, static_cast<int>(ok.size()), n_failed};
    if (!errors.empty()) {
      double s = 0.0, ss = 0.0;
      for (double e : errors) {
        s += e;
        ss += e * e;
      }
      r.bias = s / static_cast<double>(errors.size());
      r.rmse = std::sqrt(ss / static_cast<double>(errors.size()));
    } else {
      r.bias = r.rmse = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(r));
  };

  const Effects truth = derived_effects(cell.beta);
  const int L = method.working.lag;
  std::vector<double> imm, carry, tot, dist;
  for (const Estimate* e : ok) {
    const Effects est = derived_effects(e->beta);
    imm.push_back(est.immediate - truth.immediate);
    carry.push_back(est.carryover - truth.carryover);
    tot.push_back(est.total - truth.total);
    const Eigen::Index len = std::max(e->beta.size(), cell.beta.size());
    double d2 = 0.0;
    for (Eigen::Index l = 0; l < len; ++l) {
      const double b = l < e->beta.size() ? e->beta(l) : 0.0;
      const double t = l < cell.beta.size() ? cell.beta(l) : 0.0;
      d2 += (b - t) * (b - t);
    }
    dist.push_back(std::sqrt(d2));
  }
  row("total", truth.total, tot);
  if (L >= 1) row("carryover", truth.carryover, carry);
  row("immediate", truth.immediate, imm);
  const int max_l = std::min<int>(L, static_cast<int>(cell.beta.size()) - 1);
  for (int l = 0; l <= max_l; ++l) {
    std::vector<double> err;
    for (const Estimate* e : ok) err.push_back(e->beta(l) - cell.beta(l));
    row("beta[" + std::to_string(l) + "]", cell.beta(l), err);
  }
  row("euclidean_distance", 0.0, dist);
}

}  // namespace detail

/// For every cell x replicate: generate data once, run every method on it,
/// then aggregate per (cell, method). Replicates run on up to `jobs` threads;
/// method slot m of replicate r samples from stream base fit_stream_base(r, m)
/// under the cell's master seed. Failures are counted per method and excluded.
inline ExperimentResult run_experiment(const std::vector<ScenarioSpec>& cells, const std::vector<MethodSpec>& methods,
                                       const McmcConfig& mcmc, int jobs = 1) {
  if (cells.empty()) throw DomainError("experiment grid is empty");
  if (methods.empty()) throw DomainError("no methods requested");
  for (const auto& c : cells) c.validate();

  struct Task {
    std::size_t cell;
    int replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int r = 0; r < cells[c].replicates; ++r) tasks.push_back({c, r});

  struct Outcome {
    bool ok = false;
    Estimate estimate;
    std::string error;
  };
  std::vector<std::vector<Outcome>> outcomes(tasks.size(), std::vector<Outcome>(methods.size()));

  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const auto& task = tasks[i];
    const ScenarioSpec& cell = cells[task.cell];
    TrialData data;
    try {
      data = generate_trial(cell, task.replicate);
    } catch (const std::exception& e) {
      for (auto& o : outcomes[i]) o.error = std::string("data generation: ") + e.what();
      return;
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      McmcConfig cfg = mcmc;
      cfg.seed = cell.master_seed;
      cfg.stream_base = fit_stream_base(task.replicate, static_cast<int>(m));
      try {
        outcomes[i][m].estimate = methods[m].estimator(data, cell, methods[m].working, cfg);
        outcomes[i][m].ok = true;
      } catch (const std::exception& e) {
        outcomes[i][m].error = e.what();
      }
    }
  });

  ExperimentResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<const Estimate*> ok;
      int failed = 0;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].cell != c) continue;
        const auto& o = outcomes[i][m];
        if (o.ok) {
          ok.push_back(&o.estimate);
          result.phi_draws += o.estimate.phi_draws;
          result.phi_nonstationary += o.estimate.phi_nonstationary;
        } else {
          ++failed;
          result.failures.push_back({c, tasks[i].replicate, methods[m].name, o.error});
        }
      }
      detail::aggregate_cell(cells[c], methods[m], ok, failed, result.rows);
    }
  }
  return result;
}

/// Working models L = 0..7 x p in {0, 1, 7} crossed with error truths E1, E2;
/// data from LC1.
struct MisspecificationGrid {
  std::vector<LagSpec> working_models;
  std::vector<ErrorTruth> truths;
};

inline MisspecificationGrid misspecification_grid() {
  MisspecificationGrid g;
  for (int L = 7; L >= 0; --L)
    for (int p : {7, 1, 0}) g.working_models.push_back({L, p});
  g.truths = {ErrorTruth::E1, ErrorTruth::E2};
  return g;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "scenario,sequence,sigma,phi,method,working_L,working_p,estimand,truth,bias,rmse,n_reps,n_failed\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.sequence << ',' << num(r.sigma) << ',' << r.phi << ',' << r.method << ','
       << r.working_lag << ',' << r.working_ar << ',' << r.estimand << ',' << num(r.truth) << ',' << num(r.bias)
       << ',' << num(r.rmse) << ',' << r.n_reps << ',' << r.n_failed << '\n';
  }
}

}  // namespace bdlmar
