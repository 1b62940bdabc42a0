#pragma once

// Command-line front end: fit, simulate, diagnose.
//
// Exit codes: 0 success, 1 usage error, 2 data or domain error, 3 numeric
// failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>

#include "bdlmar/baselines.hpp"
#include "bdlmar/diagnostics.hpp"
#include "bdlmar/io.hpp"
#include "bdlmar/mcmc.hpp"
#include "bdlmar/simulation.hpp"

namespace bdlmar {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

namespace detail {

inline Json library_versions() {
  return {{"bdlmar", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)}};
}

inline Json mcmc_json(const McmcConfig& c) {
  return {{"iterations", c.iterations}, {"burn_in", c.burn_in}, {"chains", c.chains},   {"thin", c.thin},
          {"step_a", c.step_a},         {"tune_step", c.tune_step}, {"seed", c.seed},
          {"max_phi_rejections", c.max_phi_rejections}, {"ci_level", c.ci_level}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text_file(path, text);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct FitArgs {
  std::string input, out, draws, method = "bdlm-ar";
  LagSpec spec{7, 1};
  McmcConfig mcmc;
  int jobs = 1;
  int lb_lags = kDefaultLjungBoxLags;
};

inline int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const TrialData raw = read_trial_csv(a.input);
  const TrialData data = raw.has_missing() ? impute_by_block(raw) : raw;
  long imputed = 0;
  for (double y : raw.outcome) imputed += is_missing(y) ? 1 : 0;

  FitResult fit;
  if (a.method == "bdlm-ar") {
    fit = fit_bdlm_ar(data, a.spec, a.mcmc, {}, a.jobs, a.lb_lags);
  } else if (a.method == "nb-dlm") {
    fit = fit_nb_dlm(data, {a.spec.lag, 0}, a.mcmc, a.jobs);
  } else if (a.method == "br-dlm") {
    fit = fit_br_dlm(data, {a.spec.lag, 0}, a.mcmc, {}, a.jobs);
  } else {
    throw UsageError("fit: unknown method '" + a.method + "' (known: bdlm-ar, nb-dlm, br-dlm)");
  }

  Json cfg;
  cfg["command"] = "fit";
  cfg["input"] = a.input;
  cfg["draws"] = a.draws.empty() ? Json(nullptr) : Json(a.draws);
  cfg["method"] = a.method;
  cfg["lag"] = a.spec.lag;
  cfg["ar"] = a.method == "bdlm-ar" ? a.spec.ar : 0;
  cfg["lb_lags"] = a.lb_lags;
  cfg["mcmc"] = mcmc_json(a.mcmc);

  Json j;
  j["config"] = cfg;
  j["versions"] = library_versions();
  j["n"] = data.size();
  j["imputed_outcomes"] = imputed;
  j["summary"] = to_json(fit.summary);

  if (!a.draws.empty()) {
    std::ostringstream ds;
    write_draws_csv(ds, fit.chains);
    write_text_file(a.draws, ds.str());
  }
  emit(a.out, dump(j), out);
  for (const auto& w : fit.summary.diagnostics.warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario = "LC1";
  int sequence = 1;
  double sigma = 10.0;
  std::vector<double> phi;
  std::string truth_errors;
  std::string methods = "bdlm-ar,nb-dlm,br-dlm";
  int reps = 20;
  bool full_scale = false;
  bool misspec_grid = false;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out, manifest;
  LagSpec working{7, 1};
  McmcConfig mcmc;
  bool reps_given = false, iters_given = false, burnin_given = false;
};

inline int cmd_simulate(SimulateArgs a, std::ostream& out, std::ostream& err) {
  if (a.full_scale) {
    if (!a.reps_given) a.reps = 100;
    if (!a.iters_given) a.mcmc.iterations = 50000;
    if (!a.burnin_given) a.mcmc.burn_in = 25000;
  }
  if (a.reps < 1) throw UsageError("simulate: --reps must be at least 1");
  if (!a.phi.empty() && !a.truth_errors.empty()) throw UsageError("simulate: give either --phi or --truth-errors");
  a.mcmc.seed = a.seed;
  a.mcmc.validate();

  const LagCurve curve = parse_lag_curve(a.scenario);
  std::vector<std::string> method_names = split_list(a.methods);
  if (method_names.empty()) throw UsageError("simulate: --methods is empty");
  for (const auto& m : method_names) {
    if (m == "bdlagm") throw UsageError("simulate: method 'bdlagm' is not built in (known: bdlm-ar, nb-dlm, br-dlm, koyck)");
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw UsageError("simulate: unknown method '" + m + "' (known: bdlm-ar, nb-dlm, br-dlm, koyck)");
  }
  const bool phi_given = !a.phi.empty() || !a.truth_errors.empty();
  if (std::find(method_names.begin(), method_names.end(), "koyck") != method_names.end() && !phi_given &&
      !a.misspec_grid)
    throw UsageError("simulate: method 'koyck' needs the true AR coefficients; pass --phi or --truth-errors");

  std::vector<ArCoefficients> truths;
  if (a.misspec_grid) {
    if (phi_given) throw UsageError("simulate: --misspec-grid fixes the error truths to E1 and E2");
    for (ErrorTruth t : misspecification_grid().truths) truths.push_back(error_truth(t));
  } else if (!a.truth_errors.empty()) {
    truths.push_back(error_truth(parse_error_truth(a.truth_errors)));
  } else if (!a.phi.empty()) {
    truths.push_back(Eigen::Map<const Vector>(a.phi.data(), static_cast<Eigen::Index>(a.phi.size())));
  } else {
    truths.push_back(ArCoefficients::Constant(1, 0.5));
  }

  std::vector<ScenarioSpec> cells;
  for (const auto& phi : truths) {
    if (!a.misspec_grid && a.truth_errors.empty() && !is_stationary(phi))
      throw DomainError("simulate: --phi is not stationary");
    cells.push_back(ScenarioSpec::preset(curve, a.sequence, a.sigma, phi, a.reps, a.seed));
  }

  std::vector<MethodSpec> methods;
  if (a.misspec_grid) {
    for (const auto& name : method_names)
      for (const auto& w : misspecification_grid().working_models) {
        if (name != "bdlm-ar" && w.ar != 0) continue;
        methods.push_back(builtin_method(name, w));
      }
  } else {
    for (const auto& name : method_names) methods.push_back(builtin_method(name, a.working));
  }

  const ExperimentResult res = run_experiment(cells, methods, a.mcmc, a.jobs);

  std::ostringstream csv;
  write_metrics_csv(csv, res.rows);
  emit(a.out, csv.str(), out);

  Json cfg;
  cfg["command"] = "simulate";
  cfg["scenario"] = a.scenario;
  cfg["sequence"] = a.sequence;
  cfg["sigma"] = a.sigma;
  Json tj = Json::array();
  for (const auto& t : truths) tj.push_back(std::vector<double>(t.data(), t.data() + t.size()));
  cfg["phi_truths"] = tj;
  cfg["truth_errors"] = a.truth_errors.empty() ? Json(nullptr) : Json(a.truth_errors);
  cfg["misspec_grid"] = a.misspec_grid;
  cfg["methods"] = method_names;
  cfg["working_lag"] = a.working.lag;
  cfg["working_ar"] = a.working.ar;
  cfg["replicates"] = a.reps;
  cfg["full_scale"] = a.full_scale;
  cfg["intercept"] = 0.0;
  cfg["mcmc"] = mcmc_json(a.mcmc);
  cfg["output"] = a.out;

  Json m;
  m["config"] = cfg;
  m["seeds"] = {{"master_seed", a.seed},
                {"data_stream", "replicate << 24"},
                {"fit_stream", "(replicate << 24) + ((method_slot + 1) << 8) + chain"}};
  m["versions"] = library_versions();
  m["cells"] = cells.size();
  m["method_slots"] = methods.size();
  m["phi_draws_checked"] = res.phi_draws;
  m["phi_draws_nonstationary"] = res.phi_nonstationary;
  m["failed_fits"] = res.failures.size();
  Json fails = Json::array();
  for (const auto& f : res.failures)
    fails.push_back({{"cell", f.cell}, {"replicate", f.replicate}, {"method", f.method}, {"error", f.message}});
  m["failures"] = fails;

  const std::string manifest =
      !a.manifest.empty() ? a.manifest : (a.out.empty() || a.out == "-" ? std::string() : a.out + ".manifest.json");
  if (!manifest.empty()) write_text_file(manifest, dump(m));
  if (!res.failures.empty())
    err << "warning: " << res.failures.size() << " replicate fits failed and were excluded (see manifest)\n";
  return kExitOk;
}

struct DiagnoseArgs {
  std::string fit, draws, input, out;
  int lb_lags = kDefaultLjungBoxLags;
  double ci = 0.90;
};

inline int cmd_diagnose(DiagnoseArgs a, std::ostream& out, std::ostream& err) {
  std::string method = "bdlm-ar";
  if (!a.fit.empty()) {
    std::ifstream in(a.fit);
    if (!in) throw DataError("cannot open fit file '" + a.fit + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw DataError("fit file '" + a.fit + "' is not valid JSON: " + e.what());
    }
    const Json cfg = j.value("config", Json::object());
    if (a.draws.empty() && cfg.contains("draws") && cfg["draws"].is_string()) a.draws = cfg["draws"];
    if (a.input.empty() && cfg.contains("input") && cfg["input"].is_string()) a.input = cfg["input"];
    if (cfg.contains("method") && cfg["method"].is_string()) method = cfg["method"];
    if (cfg.contains("mcmc") && cfg["mcmc"].contains("ci_level")) a.ci = cfg["mcmc"]["ci_level"];
  }
  if (a.draws.empty()) throw DataError("diagnose: no draws file (rerun fit with --draws, or pass --draws)");
  if (a.input.empty()) throw UsageError("diagnose: no trial input (pass --input or --fit)");

  const auto chains = read_draws_csv(a.draws);
  const TrialData raw = read_trial_csv(a.input);
  const TrialData data = raw.has_missing() ? impute_by_block(raw) : raw;

  const FitSummary s = summarize(std::span<const PosteriorDraws>(chains), a.ci, method);
  const LjungBoxResult lb = ljung_box(posterior_mean_innovations(data, s), a.lb_lags);

  Json psrf = Json::object();
  for (const auto& p : s.parameters) psrf[p.name] = p.psrf ? Json(*p.psrf) : Json(nullptr);
  Json warnings = Json::array();
  for (const auto& w : s.diagnostics.warnings) warnings.push_back(w);

  Json j;
  j["config"] = {{"command", "diagnose"}, {"fit", a.fit.empty() ? Json(nullptr) : Json(a.fit)},
                 {"draws", a.draws}, {"input", a.input}, {"lb_lags", a.lb_lags}, {"ci_level", a.ci}};
  j["versions"] = library_versions();
  j["chains"] = chains.size();
  j["draws_per_chain"] = chains.front().rows();
  j["psrf"] = psrf;
  j["converged"] = chains.size() >= 2 ? Json(s.diagnostics.converged) : Json(nullptr);
  j["ljung_box"] = {{"q", lb.q}, {"lags", lb.h}, {"df", lb.df}, {"p_value", lb.p_value}};
  j["warnings"] = warnings;
  emit(a.out, dump(j), out);
  for (const auto& w : s.diagnostics.warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

}  // namespace detail

/// Parses `args` (args[0] is the program name) and runs one subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Bayesian distributed lag models with autoregressive errors for N-of-1 trials", "bdlmar"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("bdlmar ") + kVersion);

  detail::FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a model to one trial CSV");
  fit->add_option("--input", fa.input, "Trial CSV with header day,treatment,outcome")->required();
  fit->add_option("--out", fa.out, "Summary JSON path (default: stdout)");
  fit->add_option("--draws", fa.draws, "Also write posterior draws CSV here");
  fit->add_option("--method", fa.method, "bdlm-ar, nb-dlm or br-dlm")->capture_default_str();
  fit->add_option("--lag", fa.spec.lag, "Maximum treatment lag L")->capture_default_str();
  fit->add_option("--ar", fa.spec.ar, "Error AR order p")->capture_default_str();
  fit->add_option("--iters", fa.mcmc.iterations, "Total MCMC iterations per chain")->capture_default_str();
  fit->add_option("--burnin", fa.mcmc.burn_in, "Burn-in iterations")->capture_default_str();
  fit->add_option("--chains", fa.mcmc.chains, "Number of chains")->capture_default_str();
  fit->add_option("--thin", fa.mcmc.thin, "Keep every k-th post-burn-in draw")->capture_default_str();
  fit->add_option("--step", fa.mcmc.step_a, "Half-width of the gamma random-walk proposal")->capture_default_str();
  fit->add_flag("--tune-step", fa.mcmc.tune_step, "Adapt the gamma step during burn-in");
  fit->add_option("--seed", fa.mcmc.seed, "Master seed")->capture_default_str();
  fit->add_option("--ci", fa.mcmc.ci_level, "Credible interval level")->capture_default_str();
  fit->add_option("--jobs", fa.jobs, "Worker threads (chains run in parallel)")->capture_default_str();
  fit->add_option("--lb-lags", fa.lb_lags, "Ljung-Box lags")->capture_default_str();

  detail::SimulateArgs sa;
  sa.mcmc.iterations = 5000;
  sa.mcmc.burn_in = 2500;
  sa.mcmc.chains = 1;
  auto* sim = app.add_subcommand("simulate", "Run the simulation study and write a metrics CSV");
  sim->add_option("--scenario", sa.scenario, "True lag curve LC1..LC5")->capture_default_str();
  sim->add_option("--sequence", sa.sequence, "Treatment sequence 1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  sim->add_option("--sigma", sa.sigma, "Innovation standard deviation")->capture_default_str();
  sim->add_option("--phi", sa.phi, "True AR coefficients, comma separated")->delimiter(',');
  sim->add_option("--truth-errors", sa.truth_errors, "Preset error truth E1 or E2")->check(CLI::IsMember({"E1", "E2"}));
  sim->add_option("--methods", sa.methods, "Comma separated: bdlm-ar,nb-dlm,br-dlm,koyck")->capture_default_str();
  auto* reps = sim->add_option("--reps", sa.reps, "Replicates per cell")->capture_default_str();
  sim->add_flag("--full-scale", sa.full_scale, "100 replicates, 50000 iterations, 25000 burn-in");
  sim->add_flag("--misspec-grid", sa.misspec_grid, "Working L 0..7 x p {0,1,7} against truths E1 and E2");
  sim->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sim->add_option("--out", sa.out, "Metrics CSV path (default: stdout)");
  sim->add_option("--manifest", sa.manifest, "Run manifest JSON path (default: <out>.manifest.json)");
  auto* iters = sim->add_option("--iters", sa.mcmc.iterations, "MCMC iterations per fit")->capture_default_str();
  auto* burn = sim->add_option("--burnin", sa.mcmc.burn_in, "Burn-in per fit")->capture_default_str();
  sim->add_option("--chains", sa.mcmc.chains, "Chains per fit")->capture_default_str();
  sim->add_option("--lag", sa.working.lag, "Working lag L")->capture_default_str();
  sim->add_option("--ar", sa.working.ar, "Working AR order p (bdlm-ar)")->capture_default_str();

  detail::DiagnoseArgs da;
  auto* diag = app.add_subcommand("diagnose", "Recompute Ljung-Box and PSRF from stored draws");
  diag->add_option("--fit", da.fit, "Fit summary JSON written by `fit --draws`");
  diag->add_option("--draws", da.draws, "Posterior draws CSV");
  diag->add_option("--input", da.input, "Trial CSV the draws were fitted to");
  diag->add_option("--lb-lags", da.lb_lags, "Ljung-Box lags")->capture_default_str();
  diag->add_option("--ci", da.ci, "Credible interval level when --fit is absent")->capture_default_str();
  diag->add_option("--out", da.out, "Diagnostics JSON path (default: stdout)");

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*fit) return detail::cmd_fit(fa, out, err);
    if (*sim) {
      sa.reps_given = reps->count() > 0;
      sa.iters_given = iters->count() > 0;
      sa.burnin_given = burn->count() > 0;
      return detail::cmd_simulate(sa, out, err);
    }
    if (*diag) return detail::cmd_diagnose(da, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace bdlmar
