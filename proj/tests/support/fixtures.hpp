#pragma once

// Shared parameter sets and test-only oracles.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fbvol/params.hpp"

namespace fbvol::testing {

inline Matrix three_regime_q() {
  Matrix q(3, 3);
  q << -7, 4, 3, 2, -4, 2, 3, 5, -8;
  return q;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Three-regime example: mu = (1, 0, -2), sigma = (0.10, 0.15, 0.25).
inline RegimeParams three_regime_params() { return RegimeParams(RateMatrix(three_regime_q()), vec({1, 0, -2}), vec({0.10, 0.15, 0.25})); }

/// Asymmetry example: mu = (0.5, 0, -1), sigma = (0.05, 0.08, 0.12).
inline RegimeParams asymmetry_params() { return RegimeParams(RateMatrix(three_regime_q()), vec({0.5, 0, -1}), vec({0.05, 0.08, 0.12})); }

inline RegimeParams two_state_params(double a = 5.0, double b = 3.0, double sigma0 = 0.2) {
  Matrix q(2, 2);
  q << -a, a, b, -b;
  return RegimeParams(RateMatrix(q), vec({1, -1}), vec({0.15, 0.25}), sigma0);
}

/// Discrete-time forward algorithm for a two-state chain observed through
/// Gaussian increments N(mu_i dt, sigma0^2 dt). The transition matrix is the
/// closed-form exp(Q dt) of a two-state generator with rates a (1->2), b (2->1).
inline std::vector<std::array<double, 2>> forward_filter_two_state(std::span<const double> increments, double a, double b,
                                                                   std::array<double, 2> mu, double sigma0, double dt) {
  const double s = a + b;
  const double e = std::exp(-s * dt);
  const double p00 = b / s + a / s * e, p01 = a / s * (1 - e);
  const double p10 = b / s * (1 - e), p11 = a / s + b / s * e;
  std::array<double, 2> alpha{b / s, a / s};
  std::vector<std::array<double, 2>> out{alpha};
  const double var = sigma0 * sigma0 * dt;
  for (double dR : increments) {
    const double pred0 = alpha[0] * p00 + alpha[1] * p10;
    const double pred1 = alpha[0] * p01 + alpha[1] * p11;
    const double l0 = std::exp(-(dR - mu[0] * dt) * (dR - mu[0] * dt) / (2 * var));
    const double l1 = std::exp(-(dR - mu[1] * dt) * (dR - mu[1] * dt) / (2 * var));
    const double z = pred0 * l0 + pred1 * l1;
    alpha = {pred0 * l0 / z, pred1 * l1 / z};
    out.push_back(alpha);
  }
  return out;
}

}  // namespace fbvol::testing
