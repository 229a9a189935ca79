#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fbvol/stylized.hpp"
#include "support/fixtures.hpp"

using namespace fbvol;
using fbvol::testing::asymmetry_params;
using fbvol::testing::three_regime_params;
using fbvol::testing::vec;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, 0);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (double& v : x) v = z(rng);
  return x;
}

}  // namespace

// =============================================================================
// Autocorrelation
// =============================================================================

TEST(Acf, WhiteNoiseStaysInBand) {
  const auto x = gaussian(20000, 1);
  const AcfReport r = empirical_acf(x, 20, AcfTransform::Identity);
  int outside = 0;
  for (std::size_t h = 0; h < r.values.size(); ++h) outside += std::abs(r.values[h]) > 3 * r.std_error[h];
  EXPECT_LE(outside, 1);
}

TEST(Acf, AlternatingSeries) {
  std::vector<double> x(100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
  EXPECT_NEAR(lagged_correlation(x, 1), -1.0, 1e-12);
  EXPECT_NEAR(lagged_correlation(x, 2), 1.0, 1e-12);
  EXPECT_NEAR(lagged_correlation(x, 0), 1.0, 1e-12);
}

TEST(Acf, ConstantSeriesIsRejected) {
  std::vector<double> x(50, 0.3);
  EXPECT_THROW(lagged_correlation(x, 1), Error);
}

TEST(Acf, TransformsAndParsing) {
  const std::vector<double> x{-2.0, 0.0, 3.0};
  EXPECT_EQ(apply_transform(x, AcfTransform::Abs), (std::vector<double>{2.0, 0.0, 3.0}));
  EXPECT_EQ(apply_transform(x, AcfTransform::Square), (std::vector<double>{4.0, 0.0, 9.0}));
  EXPECT_EQ(apply_transform(x, AcfTransform::Sign), (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(parse_transform("square"), AcfTransform::Square);
  EXPECT_FALSE(parse_transform("cube").has_value());
}

TEST(Acf, SquaredReturnsArePositivelyCorrelatedOnMsmPaths) {
  // Volatility clustering: regimes persist over many steps.
  const auto p = three_regime_params();
  const Grid g(20.0, 5000);
  Rng rng = substream(4, 0);
  const PathBundle b = simulate_msm(p, g, simulate_driving_noise(g, p.q(), rng));
  const AcfReport r = empirical_acf(b.increments(), 5, AcfTransform::Square);
  EXPECT_GT(r.values[0], 2 * r.std_error[0]);
}

// =============================================================================
// Distribution summary
// =============================================================================

TEST(Distribution, GaussianMoments) {
  const auto x = gaussian(40000, 2);
  const DistributionReport r = distribution_report(x, 50);
  EXPECT_NEAR(r.mean, 0.0, 4.0 / std::sqrt(40000.0));
  EXPECT_NEAR(r.skewness, 0.0, 4 * std::sqrt(6.0 / 40000));
  EXPECT_NEAR(r.excess_kurtosis, 0.0, 4 * std::sqrt(24.0 / 40000));
  std::int64_t total = 0;
  for (auto c : r.histogram.counts) total += c;
  EXPECT_EQ(total, 40000);
}

TEST(Distribution, ConstantSeries) {
  std::vector<double> x(200, 1.5);
  const DistributionReport r = distribution_report(x, 10);
  EXPECT_EQ(r.mean, 1.5);
  EXPECT_EQ(r.skewness, 0.0);
  std::int64_t total = 0;
  for (auto c : r.histogram.counts) total += c;
  EXPECT_EQ(total, 200);
}

TEST(Distribution, TooShortIsRejected) {
  std::vector<double> x(99, 1.0);
  EXPECT_THROW(distribution_report(x), Error);
}

// =============================================================================
// Leverage proxy
// =============================================================================

TEST(Leverage, IidNoiseHasNoLeverage) {
  const auto x = gaussian(20000, 3);
  const LeverageReport r = leverage_proxy(x, 10);
  EXPECT_LT(std::abs(r.correlation), 4 * r.std_error);
}

TEST(Leverage, FlipsSignWithDrift) {
  // Negative drift paired with high volatility gives negative leverage;
  // mirroring the drifts flips the sign.
  const auto p = asymmetry_params();
  const RegimeParams mirrored(p.q(), -p.mu(), p.sigma());
  const Grid g(40.0, 10000);
  double neg = 0.0, pos = 0.0;
  for (int r = 0; r < 5; ++r) {
    Rng a = substream(6, r), b = substream(6, r);
    neg += leverage_proxy(simulate_msm(p, g, simulate_driving_noise(g, p.q(), a)).increments(), 20).correlation;
    pos += leverage_proxy(simulate_msm(mirrored, g, simulate_driving_noise(g, p.q(), b)).increments(), 20).correlation;
  }
  EXPECT_LT(neg, 0.0);
  EXPECT_GT(pos, 0.0);
}

// =============================================================================
// Autocovariance decomposition
// =============================================================================

TEST(Autocovariance, ZeroDriftVanishes) {
  const RegimeParams p(RateMatrix(fbvol::testing::three_regime_q()), Vector::Zero(3), vec({0.1, 0.15, 0.25}));
  const auto r = linear_autocovariance(p, 0.1, 0.5, 0.004, 200, 1);
  EXPECT_EQ(r.drift_term, 0.0);
  EXPECT_EQ(r.cross_term, 0.0);
  EXPECT_EQ(r.total, 0.0);
}

TEST(Autocovariance, SingleRegimeVanishes) {
  const RegimeParams p(RateMatrix(Matrix::Zero(1, 1)), vec({0.4}), vec({0.2}));
  const auto r = linear_autocovariance(p, 0.1, 0.5, 0.004, 200, 1);
  EXPECT_NEAR(r.total, 0.0, 1e-18);
  EXPECT_EQ(r.cross_term, 0.0);
}

TEST(Autocovariance, DriftTermClosedFormTwoState) {
  // Symmetric chain with rate a: exp(Qh)_ij = 1/2 (1 +/- e^{-2ah}); with mu = (1, -1),
  // sum_ij nu_i mu_i mu_j P_ij(h) = e^{-2ah}. The double integral has a closed form.
  const double a = 2.0, t = 0.1, s = 0.3, dt = 0.01;
  Matrix q(2, 2);
  q << -a, a, a, -a;
  const RegimeParams p{RateMatrix(q), vec({1, -1}), vec({0.1, 0.2})};
  const double k = 2 * a;
  const double exact = std::exp(-k * (s - t)) * std::pow((1 - std::exp(-k * dt)) / k, 2) * std::exp(k * dt);
  EXPECT_NEAR(autocovariance_drift_term(p, t, s, dt), exact, 1e-6 * exact);
}

TEST(Autocovariance, OrderingIsEnforced) {
  EXPECT_THROW(linear_autocovariance(three_regime_params(), 0.5, 0.1, 0.004, 10, 1), Error);
  EXPECT_THROW(linear_autocovariance(three_regime_params(), 0.1, 0.102, 0.004, 10, 1), Error);
}

// =============================================================================
// MSE optimality
// =============================================================================

TEST(MseCheck, SingleRegimeIsExact) {
  const RegimeParams p(RateMatrix(Matrix::Zero(1, 1)), vec({0.4}), vec({0.2}));
  const auto r = mse_optimality_check(p, Grid(1.0, 250), 0.5, 50, 1);
  EXPECT_EQ(r.filter_mse, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(MseCheck, EqualVolatilitiesAreExact) {
  const RegimeParams p(RateMatrix(fbvol::testing::three_regime_q()), vec({1, 0, -2}), vec({0.2, 0.2, 0.2}));
  const auto r = mse_optimality_check(p, Grid(1.0, 250), 0.5, 50, 1);
  EXPECT_NEAR(r.filter_mse, 0.0, 1e-25);
  EXPECT_TRUE(r.holds);
}

TEST(MseCheck, FilterBeatsConstants) {
  const auto r = mse_optimality_check(three_regime_params(), Grid(1.0, 250), 0.5, 2000, 5);
  EXPECT_TRUE(r.holds);
  ASSERT_EQ(r.candidates.size(), 4u);
  EXPECT_EQ(r.candidates[0].label, "sigma_nu");
}
