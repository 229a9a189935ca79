#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fbvol/portfolio.hpp"
#include "support/fixtures.hpp"

using namespace fbvol;
using fbvol::testing::three_regime_params;
using fbvol::testing::vec;

// =============================================================================
// Log-optimal fractions
// =============================================================================

TEST(Fractions, ZeroDriftInvestsNothing) {
  const Vector y = vec({0.2, 0.5, 0.3});
  EXPECT_EQ(hmm_fraction(y, Vector::Zero(3), 0.2), 0.0);
  EXPECT_EQ(fb_fraction(y, Vector::Zero(3), vec({0.1, 0.15, 0.25})), 0.0);
  EXPECT_EQ(msm_fraction(1, Vector::Zero(3), vec({0.1, 0.15, 0.25})), 0.0);
}

TEST(Fractions, SingleRegimeIsMerton) {
  const double m = 0.07, s = 0.2;
  EXPECT_NEAR(hmm_fraction(vec({1.0}), vec({m}), s), m / (s * s), 1e-15);
  EXPECT_NEAR(fb_fraction(vec({1.0}), vec({m}), vec({s})), m / (s * s), 1e-15);
  EXPECT_NEAR(msm_fraction(0, vec({m}), vec({s})), m / (s * s), 1e-15);
}

TEST(Fractions, FbVertexMatchesMsm) {
  const auto p = three_regime_params();
  // At e_1: mu_1 / sigma_1^2 = 1 / 0.01 = 100.
  EXPECT_NEAR(fb_fraction(vec({1, 0, 0}), p.mu(), p.sigma()), 100.0, 1e-12);
  for (int i = 0; i < 3; ++i) {
    const Vector e = Vector::Unit(3, i);
    EXPECT_NEAR(fb_fraction(e, p.mu(), p.sigma()), msm_fraction(i, p.mu(), p.sigma()), 1e-12);
    EXPECT_NEAR(log_optimal_fraction(ModelKind::Msm, e, p), msm_fraction(i, p.mu(), p.sigma()), 1e-12);
  }
}

TEST(Fractions, DispatchUsesModelVolatility) {
  const auto p = three_regime_params();
  const Vector y = vec({0.3, 0.3, 0.4});
  EXPECT_EQ(log_optimal_fraction(ModelKind::Hmm, y, p), hmm_fraction(y, p.mu(), p.hmm_volatility()));
  EXPECT_EQ(log_optimal_fraction(ModelKind::Fb, y, p), fb_fraction(y, p.mu(), p.sigma()));
}

// =============================================================================
// Wealth recursion
// =============================================================================

TEST(Wealth, ZeroFractionKeepsInitialWealth) {
  const std::vector<double> inc{0.1, -0.3, 0.05};
  const std::vector<double> pi(3, 0.0);
  const WealthPath w = simulate_wealth(inc, pi, 2.5);
  for (double x : w.wealth) EXPECT_EQ(x, 2.5);
  EXPECT_DOUBLE_EQ(w.log_terminal(), std::log(2.5));
}

TEST(Wealth, BuyAndHoldIsProductOfGrossReturns) {
  const std::vector<double> inc{0.1, -0.2, 0.05, 0.3};
  const std::vector<double> pi(4, 1.0);
  const WealthPath w = simulate_wealth(inc, pi, 1.0);
  EXPECT_NEAR(w.wealth.back(), 1.1 * 0.8 * 1.05 * 1.3, 1e-15);
  EXPECT_EQ(w.wealth.size(), 5u);
}

TEST(Wealth, ClampIsApplied) {
  const std::vector<double> inc{0.1};
  const std::vector<double> pi{2.5};
  EXPECT_NEAR(simulate_wealth(inc, pi, 1.0, Clamp{}).wealth.back(), 1.1, 1e-15);
  EXPECT_NEAR(simulate_wealth(inc, pi, 1.0).wealth.back(), 1.25, 1e-15);
}

TEST(Wealth, BankruptcyIsFlagged) {
  const std::vector<double> inc{0.1, -0.5, 0.2};
  const std::vector<double> pi(3, 3.0);
  const WealthPath w = simulate_wealth(inc, pi, 1.0);
  EXPECT_TRUE(w.bankrupt);
  EXPECT_EQ(w.wealth[2], 0.0);
  EXPECT_EQ(w.wealth[3], 0.0);
  EXPECT_TRUE(std::isinf(w.log_terminal()));
}

TEST(Wealth, ClampedWealthStaysPositive) {
  // With pi in [0, 1] wealth can only vanish if an increment is <= -1.
  const auto p = three_regime_params();
  const Grid g(1.0, 250);
  for (int r = 0; r < 50; ++r) {
    Rng rng = substream(5, r);
    const PathBundle b = simulate_fb_hmm(p, g, simulate_driving_noise(g, p.q(), rng));
    const auto fr = fb_rule()(b, p);
    const WealthPath w = simulate_wealth(b.increments(), fr, 1.0, Clamp{});
    EXPECT_FALSE(w.bankrupt);
    for (double x : w.wealth) EXPECT_GT(x, 0.0);
  }
}

TEST(Wealth, LengthMismatchIsRejected) {
  const std::vector<double> inc{0.1, 0.2};
  const std::vector<double> pi{0.5};
  EXPECT_THROW(simulate_wealth(inc, pi, 1.0), Error);
  const std::vector<double> pi2{0.5, 0.5};
  EXPECT_THROW(simulate_wealth(inc, pi2, 0.0), Error);
}

// =============================================================================
// Strategy rules and expected log utility
// =============================================================================

TEST(Rules, MsmRuleUsesTrueStateOnMsmPaths) {
  const auto p = three_regime_params();
  const Grid g(1.0, 250);
  Rng rng = substream(9, 0);
  const PathBundle b = simulate_msm(p, g, simulate_driving_noise(g, p.q(), rng));
  const auto fr = msm_rule()(b, p);
  for (std::size_t k = 0; k < fr.size(); ++k) EXPECT_EQ(fr[k], msm_fraction(b.chain_states[k], p.mu(), p.sigma()));
}

TEST(Rules, StandardRuleNames) {
  const auto rules = standard_rules(three_regime_params());
  std::vector<std::string> names;
  for (const auto& r : rules) names.push_back(r.name);
  EXPECT_EQ(names, (std::vector<std::string>{"hmm", "msm", "fb", "const_0.00", "const_0.25", "const_0.50", "const_1.00", "const_stationary"}));
}

TEST(ExpectedLogUtility, ZeroFractionHasNoVariance) {
  const auto p = three_regime_params();
  PortfolioSettings s;
  s.replications = 20;
  s.x0 = 3.0;
  const auto res = expected_log_utility(p, Grid(1.0, 100), {{"zero", constant_rule(0.0)}}, s);
  EXPECT_DOUBLE_EQ(res[0].mean_log_wealth, std::log(3.0));
  EXPECT_EQ(res[0].std_error, 0.0);
  EXPECT_EQ(res[0].paths, 20);
}

TEST(ExpectedLogUtility, DeterministicUnderSeed) {
  const auto p = three_regime_params();
  PortfolioSettings s;
  s.replications = 30;
  s.seed = 12;
  const auto a = expected_log_utility(p, Grid(1.0, 100), standard_rules(p), s);
  const auto b = expected_log_utility(p, Grid(1.0, 100), standard_rules(p), s);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mean_log_wealth, b[i].mean_log_wealth);
}

TEST(ExpectedLogUtility, FbRuleBeatsCashOnFbPaths) {
  const auto p = three_regime_params();
  PortfolioSettings s;
  s.replications = 400;
  s.seed = 3;
  const auto res = expected_log_utility(p, Grid(1.0, 250), {{"fb", fb_rule()}, {"cash", constant_rule(0.0)}}, s);
  EXPECT_GT(res[0].mean_log_wealth, res[1].mean_log_wealth);
}

TEST(ExpectedLogUtility, RequiresTwoReplications) {
  PortfolioSettings s;
  s.replications = 1;
  EXPECT_THROW(expected_log_utility(three_regime_params(), Grid(1.0, 100), {{"zero", constant_rule(0.0)}}, s), Error);
}
