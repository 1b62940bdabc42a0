#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace bdlmar;

namespace {

MethodSpec stub(const std::string& name, double offset) {
  return {name, LagSpec{7, 0}, [offset](const TrialData&, const ScenarioSpec& s, const LagSpec&, const McmcConfig&) {
            return Estimate{Vector(s.beta.array() + offset)};
          }};
}

const MetricsRow& find_row(const std::vector<MetricsRow>& rows, const std::string& method, const std::string& estimand) {
  for (const auto& r : rows)
    if (r.method == method && r.estimand == estimand) return r;
  throw std::runtime_error("row not found: " + method + "/" + estimand);
}

McmcConfig short_chain() {
  McmcConfig c;
  c.iterations = 600;
  c.burn_in = 300;
  c.chains = 1;
  return c;
}

}  // namespace

TEST(Sequences, BlockBoundaries) {
  const auto s1 = make_sequence(1);
  ASSERT_EQ(s1.size(), 120u);
  EXPECT_EQ(s1[29], 1);  // day 30
  EXPECT_EQ(s1[30], 0);  // day 31
  EXPECT_EQ(s1[90], 1);  // day 91
  const auto s2 = make_sequence(2);
  EXPECT_EQ(s2[14], 1);  // day 15
  EXPECT_EQ(s2[15], 0);  // day 16
  EXPECT_EQ(s2[45], 1);  // day 46
  for (const auto* s : {&s1, &s2}) EXPECT_EQ(std::count(s->begin(), s->end(), 1), 60);
  EXPECT_THROW(make_sequence(3), DomainError);
}

TEST(LagCurves, PresetValues) {
  EXPECT_DOUBLE_EQ(lag_curve(LagCurve::LC1).sum(), 9.6875);
  EXPECT_DOUBLE_EQ(lag_curve(LagCurve::LC2).cwiseAbs().sum(), 9.6875);
  EXPECT_DOUBLE_EQ(lag_curve(LagCurve::LC5)(0), 10.0);
  for (auto c : {LagCurve::LC1, LagCurve::LC2, LagCurve::LC3, LagCurve::LC4, LagCurve::LC5}) {
    EXPECT_EQ(lag_curve(c).size(), 8);
    EXPECT_EQ(parse_lag_curve(to_string(c)), c);
  }
  EXPECT_THROW(parse_lag_curve("LC6"), DomainError);
  EXPECT_EQ(parse_error_truth("E2"), ErrorTruth::E2);
  EXPECT_EQ(error_truth(ErrorTruth::E2), (Vector(6) << 0.5, 0, 0, 0.3, 0, 0.2).finished());
}

TEST(GenerateTrial, NoiseFreeOutcomesAreTheConvolution) {
  const auto lc1 = generate_trial(ScenarioSpec::preset(LagCurve::LC1, 1, 0.0, Vector(0), 1, 1), 0);
  EXPECT_DOUBLE_EQ(lc1.outcome[30], 4.6875);  // day 31: lags 1..4 of the first block
  EXPECT_DOUBLE_EQ(lc1.outcome[0], 5.0);
  EXPECT_DOUBLE_EQ(lc1.outcome[29], 9.6875);

  const auto lc5 = generate_trial(ScenarioSpec::preset(LagCurve::LC5, 2, 0.0, Vector(0), 1, 1), 0);
  for (std::size_t t = 0; t < lc5.size(); ++t) EXPECT_DOUBLE_EQ(lc5.outcome[t], 10.0 * lc5.treatment[t]);
}

TEST(GenerateTrial, DeterministicPerReplicateAndDistinctAcross) {
  const auto s = ScenarioSpec::preset(LagCurve::LC3, 2, 5.0, Vector::Constant(1, 0.5), 3, 77);
  EXPECT_EQ(generate_trial(s, 1).outcome, generate_trial(s, 1).outcome);
  EXPECT_NE(generate_trial(s, 0).outcome, generate_trial(s, 1).outcome);
}

TEST(GenerateTrial, NoiseAutocorrelationMatchesTruth) {
  // Pool lag-1 autocorrelation of the noise component across replicates.
  const auto s = ScenarioSpec::preset(LagCurve::LC1, 1, 1.0, Vector::Constant(1, 0.5), 200, 5);
  const auto exact = generate_trial(ScenarioSpec::preset(LagCurve::LC1, 1, 0.0, Vector(0), 1, 1), 0);
  double num = 0, den = 0;
  for (int r = 0; r < 200; ++r) {
    const auto d = generate_trial(s, r);
    for (std::size_t t = 0; t < d.size(); ++t) {
      const double e = d.outcome[t] - exact.outcome[t];
      den += e * e;
      if (t > 0) num += e * (d.outcome[t - 1] - exact.outcome[t - 1]);
    }
  }
  EXPECT_NEAR(num / den, 0.5, 0.03);
}

TEST(ScenarioSpec, UnitRootTruthIsAllowedOnlyViaPreset) {
  const auto s = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, error_truth(ErrorTruth::E2), 1, 1);
  EXPECT_TRUE(s.allow_nonstationary_truth);
  EXPECT_NO_THROW(generate_trial(s, 0));
  auto strict = s;
  strict.allow_nonstationary_truth = false;
  EXPECT_THROW(strict.validate(), DomainError);
}

TEST(RunExperiment, OracleEstimatorHasZeroError) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, Vector::Constant(1, 0.5), 5, 3);
  const auto res = run_experiment({cell}, {stub("exact", 0.0), stub("shifted", 1.0)}, short_chain());
  for (const char* est : {"total", "carryover", "immediate", "beta[0]", "beta[7]", "euclidean_distance"}) {
    EXPECT_EQ(find_row(res.rows, "exact", est).bias, 0.0) << est;
    EXPECT_EQ(find_row(res.rows, "exact", est).rmse, 0.0) << est;
  }
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "beta[3]").bias, 1.0);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "beta[3]").rmse, 1.0);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "immediate").rmse, 1.0);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "carryover").bias, 7.0);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "total").rmse, 8.0);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "shifted", "euclidean_distance").rmse, std::sqrt(8.0));
  EXPECT_EQ(find_row(res.rows, "exact", "total").n_reps, 5);
  EXPECT_DOUBLE_EQ(find_row(res.rows, "exact", "total").truth, 9.6875);
}

TEST(RunExperiment, FailuresAreCountedAndExcluded) {
  MethodSpec flaky{"flaky", LagSpec{7, 0},
                   [](const TrialData& d, const ScenarioSpec& s, const LagSpec&, const McmcConfig& cfg) {
                     if (cfg.stream_base == fit_stream_base(1, 0)) throw NumericError("boom");
                     (void)d;
                     return Estimate{s.beta};
                   }};
  const auto cell = ScenarioSpec::preset(LagCurve::LC2, 2, 10.0, Vector::Constant(1, 0.5), 4, 3);
  const auto res = run_experiment({cell}, {flaky}, short_chain());
  const auto& row = find_row(res.rows, "flaky", "total");
  EXPECT_EQ(row.n_reps, 3);
  EXPECT_EQ(row.n_failed, 1);
  EXPECT_EQ(row.rmse, 0.0);
  ASSERT_EQ(res.failures.size(), 1u);
  EXPECT_EQ(res.failures[0].replicate, 1);
  EXPECT_EQ(res.failures[0].message, "boom");
}

TEST(RunExperiment, AllFailuresGiveNaN) {
  MethodSpec broken{"broken", LagSpec{2, 0}, [](const TrialData&, const ScenarioSpec&, const LagSpec&,
                                                const McmcConfig&) -> Estimate { throw NumericError("no"); }};
  const auto cell = ScenarioSpec::preset(LagCurve::LC2, 2, 10.0, Vector::Constant(1, 0.5), 2, 3);
  const auto res = run_experiment({cell}, {broken}, short_chain());
  EXPECT_TRUE(std::isnan(find_row(res.rows, "broken", "total").rmse));
  EXPECT_EQ(find_row(res.rows, "broken", "total").n_failed, 2);
}

TEST(RunExperiment, ShortWorkingLagReportsAvailableEstimands) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, Vector::Constant(1, 0.5), 2, 3);
  MethodSpec l0{"l0", LagSpec{0, 0}, [](const TrialData&, const ScenarioSpec&, const LagSpec&, const McmcConfig&) {
                  return Estimate{Vector::Constant(1, 5.0)};
                }};
  const auto res = run_experiment({cell}, {l0}, short_chain());
  std::set<std::string> names;
  for (const auto& r : res.rows) names.insert(r.estimand);
  EXPECT_EQ(names, (std::set<std::string>{"total", "immediate", "beta[0]", "euclidean_distance"}));
  EXPECT_DOUBLE_EQ(find_row(res.rows, "l0", "total").bias, 5.0 - 9.6875);
}

TEST(RunExperiment, ResultsIndependentOfThreadCount) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC2, 1, 10.0, Vector::Constant(1, 0.5), 4, 11);
  const std::vector<MethodSpec> methods{builtin_method("bdlm-ar", {7, 1}), builtin_method("nb-dlm", {7, 1})};
  std::ostringstream a, b;
  write_metrics_csv(a, run_experiment({cell}, methods, short_chain(), 1).rows);
  write_metrics_csv(b, run_experiment({cell}, methods, short_chain(), 3).rows);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, AuditsStationarityOfEveryPhiDraw) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, Vector::Constant(1, 0.5), 3, 12);
  const auto res = run_experiment({cell}, {builtin_method("bdlm-ar", {7, 2})}, short_chain());
  EXPECT_EQ(res.phi_draws, 3 * 300);
  EXPECT_EQ(res.phi_nonstationary, 0);
}

TEST(BuiltinMethods, NamesAndWorkingModels) {
  EXPECT_EQ(builtin_method("nb-dlm", {7, 1}).working.ar, 0);
  EXPECT_EQ(builtin_method("br-dlm", {7, 1}).working.ar, 0);
  EXPECT_EQ(builtin_method("bdlm-ar", {5, 2}).working.ar, 2);
  EXPECT_THROW(builtin_method("bdlagm", {7, 1}), UsageError);
  EXPECT_THROW(builtin_method("lasso", {7, 1}), UsageError);
}

TEST(BuiltinMethods, KoyckFailsOnUnitRootTruth) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, error_truth(ErrorTruth::E2), 2, 1);
  const auto res = run_experiment({cell}, {builtin_method("koyck", {7, 0})}, short_chain());
  EXPECT_EQ(find_row(res.rows, "koyck", "total").n_failed, 2);
  EXPECT_EQ(find_row(res.rows, "koyck", "total").working_ar, 6);
}

TEST(MisspecificationGrid, Shape) {
  const auto g = misspecification_grid();
  EXPECT_EQ(g.working_models.size(), 24u);
  std::set<std::pair<int, int>> unique;
  for (const auto& w : g.working_models) unique.insert({w.lag, w.ar});
  EXPECT_EQ(unique.size(), 24u);
  EXPECT_EQ(g.truths.size(), 2u);
}

TEST(MetricsCsv, HeaderAndFormatting) {
  std::ostringstream os;
  MetricsRow r{"LC1", "1", 10.0, "0.5", "bdlm-ar", 7, 1, "total", 9.6875, 0.125, 2.5, 20, 0};
  write_metrics_csv(os, {r});
  EXPECT_EQ(os.str(),
            "scenario,sequence,sigma,phi,method,working_L,working_p,estimand,truth,bias,rmse,n_reps,n_failed\n"
            "LC1,1,10,0.5,bdlm-ar,7,1,total,9.6875,0.125,2.5,20,0\n");
  EXPECT_EQ(format_phi(error_truth(ErrorTruth::E2)), "0.5;0;0;0.3;0;0.2");
  EXPECT_EQ(format_phi(Vector(0)), "0");
}

TEST(ReducedScale, ProposedModelBeatsBaselinesOnCarryover) {
  const auto cell = ScenarioSpec::preset(LagCurve::LC1, 1, 10.0, Vector::Constant(1, 0.5), 20, 2024);
  McmcConfig cfg;
  cfg.iterations = 5000;
  cfg.burn_in = 2500;
  cfg.chains = 1;
  const auto res = run_experiment(
      {cell}, {builtin_method("bdlm-ar", {7, 1}), builtin_method("br-dlm", {7, 0}), builtin_method("nb-dlm", {7, 0})},
      cfg);
  const double ar = find_row(res.rows, "bdlm-ar", "carryover").rmse;
  const double br = find_row(res.rows, "br-dlm", "carryover").rmse;
  const double nb = find_row(res.rows, "nb-dlm", "carryover").rmse;
  EXPECT_LT(ar, br);
  EXPECT_LT(br, nb);
  EXPECT_TRUE(res.failures.empty());
}
