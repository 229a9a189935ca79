#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fbvol/convergence.hpp"
#include "support/fixtures.hpp"

using namespace fbvol;
using fbvol::testing::three_regime_params;
using fbvol::testing::vec;

TEST(CoarseEuler, FineGridHasNoError) {
  const auto p = three_regime_params();
  const Grid g(1.0, 1024);
  Rng rng = substream(1, 0);
  const PathBundle b = simulate_fb_hmm(p, g, simulate_driving_noise(g, p.q(), rng));
  const CoarseError e = coarse_euler_error(b, p, 1024);
  EXPECT_EQ(e.drift, 0.0);
  EXPECT_EQ(e.diffusion, 0.0);
}

TEST(CoarseEuler, SingleRegimeHasNoError) {
  const RegimeParams p(RateMatrix(Matrix::Zero(1, 1)), vec({0.3}), vec({0.2}));
  const auto rep = euler_error_experiment(p, {4, 16, 64}, 256, 10, 1.0, 2);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.mse, 0.0);
    EXPECT_EQ(r.std_error, 0.0);
  }
}

TEST(CoarseEuler, GridsMustDivide) {
  try {
    euler_error_experiment(three_regime_params(), {64, 100}, 16384, 10, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_NE(std::string(e.what()).find("not divisible by n = 100"), std::string::npos);
  }
}

TEST(CoarseEuler, UnstableFineGridIsRejected) {
  EXPECT_THROW(euler_error_experiment(three_regime_params(), {2, 4}, 8, 10, 1.0, 1), Error);
}

TEST(CoarseEuler, StandardErrorShrinksWithReplications) {
  const auto p = three_regime_params();
  const auto a = euler_error_experiment(p, {64}, 1024, 200, 1.0, 3);
  const auto b = euler_error_experiment(p, {64}, 1024, 800, 1.0, 3);
  const double ratio = a.rows[0].std_error / b.rows[0].std_error;
  EXPECT_GT(ratio, 1.4);
  EXPECT_LT(ratio, 2.8);
}

TEST(CoarseEuler, ErrorDecreasesWithRefinement) {
  const auto rep = euler_error_experiment(three_regime_params(), {16, 64, 256}, 1024, 200, 1.0, 4);
  for (std::size_t j = 1; j < rep.rows.size(); ++j) {
    EXPECT_LT(rep.rows[j].mse, rep.rows[j - 1].mse);
    EXPECT_LT(rep.rows[j].diff_mse, rep.rows[j - 1].diff_mse);
    EXPECT_LT(rep.rows[j].drift_mse, rep.rows[j - 1].drift_mse);
  }
}
