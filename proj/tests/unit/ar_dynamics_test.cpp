#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace bdlmar;

namespace {

Vector vec(std::initializer_list<double> v) {
  return Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

/// Largest root modulus of z^p - phi_1 z^{p-1} - ... - phi_p via the companion
/// matrix; stationary iff < 1.
double companion_spectral_radius(const Vector& phi) {
  const auto p = phi.size();
  Matrix c = Matrix::Zero(p, p);
  c.row(0) = phi.transpose();
  for (Eigen::Index i = 1; i < p; ++i) c(i, i - 1) = 1.0;
  return Eigen::EigenSolver<Matrix>(c, false).eigenvalues().cwiseAbs().maxCoeff();
}

double lag1_autocorrelation(const Vector& x) {
  const double m = x.mean();
  double num = 0, den = 0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    den += (x(t) - m) * (x(t) - m);
    if (t > 0) num += (x(t) - m) * (x(t - 1) - m);
  }
  return num / den;
}

double sample_variance(const Vector& x) { return (x.array() - x.mean()).square().sum() / (x.size() - 1.0); }

}  // namespace

TEST(Stationarity, Examples) {
  EXPECT_TRUE(is_stationary(vec({0.5})));
  EXPECT_FALSE(is_stationary(vec({1.0})));
  EXPECT_FALSE(is_stationary(vec({-1.0})));
  EXPECT_FALSE(is_stationary(vec({0.5, 0.6})));
  EXPECT_TRUE(is_stationary(Vector(0)));
  EXPECT_TRUE(is_stationary(vec({0.999999})));
}

TEST(Stationarity, SecondPresetErrorTruthHasUnitRoot) {
  // 0.5 + 0.3 + 0.2 = 1, so z = 1 solves 1 - sum phi_l z^l = 0.
  const Vector e2 = error_truth(ErrorTruth::E2);
  EXPECT_NEAR(e2.sum(), 1.0, 1e-15);
  EXPECT_NEAR(companion_spectral_radius(e2), 1.0, 1e-9);
  EXPECT_FALSE(is_stationary(e2));
  EXPECT_TRUE(is_stationary(error_truth(ErrorTruth::E1)));
  EXPECT_TRUE(is_stationary(Vector(0.99 * e2)));
}

TEST(Stationarity, AgreesWithCompanionEigenvalues) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  int stationary = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int p = 1 + static_cast<int>(gen() % 7);
    Vector phi(p);
    for (int i = 0; i < p; ++i) phi(i) = u(gen) / p;
    const double r = companion_spectral_radius(phi);
    if (std::abs(r - 1.0) < 1e-9) continue;
    stationary += r < 1.0;
    ASSERT_EQ(is_stationary(phi), r < 1.0) << phi.transpose();
  }
  EXPECT_GT(stationary, 100);
}

TEST(Stationarity, InvariantToTrailingZeros) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int trial = 0; trial < 500; ++trial) {
    Vector phi(3);
    for (int i = 0; i < 3; ++i) phi(i) = u(gen);
    Vector padded = Vector::Zero(6);
    padded.head(3) = phi;
    EXPECT_EQ(is_stationary(phi), is_stationary(padded));
  }
}

TEST(BackshiftFilter, Examples) {
  EXPECT_TRUE(backshift_filter(vec({0.5}), vec({1, 2, 3})).isApprox(vec({1.5, 2.0})));
  const Vector y = vec({4, -1, 2});
  EXPECT_EQ(backshift_filter(Vector(0), y), y);
  const Matrix ones = Matrix::Ones(5, 1);
  EXPECT_TRUE((backshift_filter(vec({0.5}), ones).array() == 0.5).all());
  EXPECT_THROW(backshift_filter(vec({0.5, 0.1}), vec({1, 2})), DimensionError);
}

TEST(BackshiftFilter, MatrixVersionIsColumnwise) {
  Matrix m(6, 2);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Vector phi = vec({0.3, -0.2});
  const Matrix f = backshift_filter(phi, m);
  for (int j = 0; j < 2; ++j) EXPECT_TRUE(f.col(j).isApprox(backshift_filter(phi, Vector(m.col(j)))));
}

TEST(StructuralResiduals, Examples) {
  const auto d = TrialData::from({1, 0}, {3, 4});
  EXPECT_TRUE(structural_residuals(d, 0.0, vec({1})).isApprox(vec({2, 4})));
  EXPECT_TRUE(structural_residuals(d, 1.0, vec({0})).isApprox(vec({2, 3})));
  EXPECT_EQ(structural_residuals(d, 0.0, vec({0, 0})), d.outcome_vector());

  const auto s = ScenarioSpec::preset(LagCurve::LC1, 1, 0.0, Vector(0), 1, 1);
  const auto exact = generate_trial(s, 0);
  EXPECT_TRUE(structural_residuals(exact, 0.0, s.beta).isZero(1e-12));
}

TEST(ErrorLagMatrix, Examples) {
  Matrix e1 = error_lag_matrix(vec({1, 2, 3}), 1);
  EXPECT_EQ(e1.rows(), 2);
  EXPECT_TRUE(e1.col(0).isApprox(vec({1, 2})));

  Matrix expected(2, 2);
  expected << 2, 1, 3, 2;
  EXPECT_EQ(error_lag_matrix(vec({1, 2, 3, 4}), 2), expected);

  EXPECT_EQ(error_lag_matrix(vec({1, 2, 3}), 0).cols(), 0);
}

TEST(SimulateArNoise, ZeroSigmaGivesZeros) {
  RngStream rng(1, 0);
  EXPECT_TRUE(simulate_ar_noise(vec({0.5, 0.2}), 0.0, 50, 10, rng).isZero());
}

TEST(SimulateArNoise, WhiteNoiseVariance) {
  RngStream rng(2, 0);
  const Vector e = simulate_ar_noise(Vector(0), 1.0, 100000, 0, rng);
  EXPECT_NEAR(sample_variance(e), 1.0, 0.02);
}

TEST(SimulateArNoise, ArOneMoments) {
  RngStream rng(3, 0);
  const Vector e = simulate_ar_noise(vec({0.5}), 1.0, 100000, 500, rng);
  EXPECT_NEAR(lag1_autocorrelation(e), 0.5, 0.02);
  EXPECT_NEAR(sample_variance(e) / (1.0 / 0.75), 1.0, 0.03);
}

TEST(SimulateArNoise, RejectsNonStationaryAndBadSigma) {
  RngStream rng(4, 0);
  EXPECT_THROW(simulate_ar_noise(vec({1.0}), 1.0, 10, 0, rng), DomainError);
  EXPECT_THROW(simulate_ar_noise(vec({0.5}), -1.0, 10, 0, rng), DomainError);
}

TEST(SimulateArNoise, DeterministicGivenStream) {
  RngStream a(9, 4), b(9, 4);
  EXPECT_EQ(simulate_ar_noise(vec({0.4}), 2.0, 200, 50, a), simulate_ar_noise(vec({0.4}), 2.0, 200, 50, b));
}

TEST(SimulateArNoise, FilterRoundTripIsWhite) {
  int rejections = 0;
  for (int run = 0; run < 100; ++run) {
    RngStream rng(55, static_cast<std::uint64_t>(run));
    const Vector phi = vec({0.6, -0.2});
    const Vector e = simulate_ar_noise(phi, 1.0, 120, kDefaultArWarmup, rng);
    rejections += ljung_box(backshift_filter(phi, e), 10).p_value < 0.05;
  }
  EXPECT_LE(rejections, 10);
}
