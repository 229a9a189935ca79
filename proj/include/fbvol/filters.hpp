#pragma once

// Filtering recursions for the regime-switching return models.
//
// The production filter is the robust discretization of the Zakai equation
//
//   rho_k = diag(phi_k) (I + dt Q^T) rho_{k-1},
//   phi_k^i = exp(mu_i dR_k / s^2 - mu_i^2 dt / (2 s^2)),
//
// where s is the volatility in force over the step (sigma0 for the HMM,
// sigma^T Yhat_{k-1} for the FB-HMM). Yhat = rho / 1^T rho. The explicit
// Wonham step is kept only to cross-check the robust recursion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "fbvol/chain.hpp"
#include "fbvol/error.hpp"
#include "fbvol/params.hpp"

namespace fbvol {

inline constexpr double kRhoFloor = 1e-300;

/// Kallianpur-Striebel normalization rho / 1^T rho.
inline Vector normalize(const Vector& rho) {
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (!(rho(i) > 0.0) || !std::isfinite(rho(i))) fail(ErrorKind::Numerical, "filter recursion left positive cone");
  }
  return rho / rho.sum();
}

/// True when p is a probability vector up to `tol`.
inline bool on_simplex(const Vector& p, double tol = 1e-10) {
  return p.size() > 0 && p.minCoeff() >= 0.0 && std::abs(p.sum() - 1.0) <= tol;
}

/// Index of the largest entry (maximum a posteriori state).
inline int map_state(const Vector& p) {
  Eigen::Index idx = 0;
  p.maxCoeff(&idx);
  return static_cast<int>(idx);
}

/// One robust Zakai step on an unnormalized filter.
inline Vector robust_zakai_step(const Vector& rho_prev, double dR, double sigma_eff, const Vector& mu, const RateMatrix& q,
                                double dt) {
  require_stable_step(q, dt);
  if (!(sigma_eff > 0.0)) fail(ErrorKind::Numerical, "robust_zakai_step: effective volatility must be > 0");
  const double inv_var = 1.0 / (sigma_eff * sigma_eff);
  Vector rho = rho_prev + dt * (q.matrix().transpose() * rho_prev);
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    rho(i) *= std::exp(inv_var * mu(i) * dR - 0.5 * inv_var * mu(i) * mu(i) * dt);
    if (!(rho(i) > 0.0) || !std::isfinite(rho(i))) fail(ErrorKind::Numerical, "filter recursion left positive cone");
  }
  return rho;
}

/// Running robust filter that keeps rho normalized to unit mass.
///
/// Likelihood exponents are shifted by their maximum before exponentiating,
/// and entries are floored at kRhoFloor; both are inert after normalization.
class ZakaiRecursion {
 public:
  ZakaiRecursion(const RegimeParams& params, double dt, const Vector& prior)
      : mu_(params.mu()), qt_(params.q().matrix().transpose()), dt_(dt), yhat_(prior) {
    require_stable_step(params.q(), dt);
    if (prior.size() != params.dim() || !on_simplex(prior, 1e-9)) fail(ErrorKind::Config, "filter prior must be a probability vector of dimension d");
    yhat_ /= yhat_.sum();
  }

  const Vector& yhat() const noexcept { return yhat_; }

  const Vector& step(double dR, double sigma_eff) {
    const double inv_var = 1.0 / (sigma_eff * sigma_eff);
    Vector rho = yhat_ + dt_ * (qt_ * yhat_);
    Vector expo(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
      if (!(rho(i) > 0.0)) fail(ErrorKind::Numerical, "filter recursion left positive cone");
      expo(i) = inv_var * mu_(i) * dR - 0.5 * inv_var * mu_(i) * mu_(i) * dt_;
    }
    const double shift = expo.maxCoeff();
    for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) = std::max(rho(i) * std::exp(expo(i) - shift), kRhoFloor);
    yhat_ = normalize(rho);
    return yhat_;
  }

 private:
  Vector mu_;
  Matrix qt_;
  double dt_;
  Vector yhat_;
};

/// HMM filter Yhat_0..Yhat_n from return increments dR_1..dR_n, with
/// constant volatility params.hmm_volatility(). Prior defaults to nu.
inline std::vector<Vector> run_hmm_filter(std::span<const double> increments, const RegimeParams& params, const Grid& grid,
                                          const std::optional<Vector>& prior = std::nullopt) {
  if (static_cast<int>(increments.size()) != grid.steps()) fail(ErrorKind::Config, "run_hmm_filter: need one increment per grid step");
  const double s0 = params.hmm_volatility();
  ZakaiRecursion filter(params, grid.dt(), prior.value_or(params.nu()));
  std::vector<Vector> out;
  out.reserve(increments.size() + 1);
  out.push_back(filter.yhat());
  for (double dR : increments) out.push_back(filter.step(dR, s0));
  return out;
}

struct FbFilterTrace {
  std::vector<Vector> filter;  ///< Yhat_0..Yhat_n
  std::vector<double> vol;     ///< sigma^T Yhat_k
};

/// FB-HMM filter: the volatility in each step is sigma^T Yhat_{k-1}.
inline FbFilterTrace run_fb_filter(std::span<const double> increments, const RegimeParams& params, const Grid& grid,
                                   const std::optional<Vector>& prior = std::nullopt) {
  if (static_cast<int>(increments.size()) != grid.steps()) fail(ErrorKind::Config, "run_fb_filter: need one increment per grid step");
  ZakaiRecursion filter(params, grid.dt(), prior.value_or(params.nu()));
  FbFilterTrace out;
  out.filter.reserve(increments.size() + 1);
  out.vol.reserve(increments.size() + 1);
  out.filter.push_back(filter.yhat());
  out.vol.push_back(params.sigma().dot(filter.yhat()));
  for (double dR : increments) {
    out.filter.push_back(filter.step(dR, out.vol.back()));
    out.vol.push_back(params.sigma().dot(out.filter.back()));
  }
  return out;
}

/// Explicit Euler step of the normalized Wonham filter, clipped to the simplex.
inline Vector wonham_euler_step(const Vector& yhat, double dR, double sigma0, const Vector& mu, const RateMatrix& q, double dt) {
  const Vector g = mu / sigma0;
  const double dv = (dR - mu.dot(yhat) * dt) / sigma0;
  Vector next = yhat + dt * (q.matrix().transpose() * yhat) + (g.cwiseProduct(yhat) - g.dot(yhat) * yhat) * dv;
  next = next.cwiseMax(0.0);
  const double mass = next.sum();
  if (!(mass > 0.0)) return yhat;
  return next / mass;
}

inline std::vector<Vector> run_wonham_filter(std::span<const double> increments, const RegimeParams& params, const Grid& grid,
                                             const std::optional<Vector>& prior = std::nullopt) {
  const double s0 = params.hmm_volatility();
  std::vector<Vector> out;
  out.reserve(increments.size() + 1);
  out.push_back(prior.value_or(params.nu()));
  for (double dR : increments) out.push_back(wonham_euler_step(out.back(), dR, s0, params.mu(), params.q(), grid.dt()));
  return out;
}

/// Default realized-variance window max(10, round(n / 200)).
inline int default_detector_window(int steps) { return std::max(10, static_cast<int>(std::lround(steps / 200.0))); }

struct DetectorOutput {
  std::vector<int> states;            ///< detected state after increment k (k = 1..n)
  std::vector<double> realized_vol;   ///< sqrt of the windowed realized variance
};

/// Recovers the MSM state from realized volatility.
///
/// For increment k the realized variance over the last w increments (fewer at
/// the start) is compared with the volatility levels and the nearest level is
/// reported. Entry k therefore estimates the state in force during increment k.
inline DetectorOutput qv_state_detector(std::span<const double> increments, const Vector& sigma, int window, double dt) {
  if (window < 1) fail(ErrorKind::Config, "qv_state_detector: window must be >= 1");
  if (!(dt > 0.0)) fail(ErrorKind::Config, "qv_state_detector: dt must be > 0");
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    for (Eigen::Index j = i + 1; j < sigma.size(); ++j) {
      if (sigma(i) == sigma(j)) fail(ErrorKind::Config, "states indistinguishable by volatility");
    }
  }

  DetectorOutput out;
  out.states.reserve(increments.size());
  out.realized_vol.reserve(increments.size());
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    sum_sq += increments[k] * increments[k];
    if (k >= static_cast<std::size_t>(window)) sum_sq -= increments[k - window] * increments[k - window];
    // Recompute exactly once in a while so the running sum cannot drift.
    if (k % 4096 == 4095) {
      sum_sq = 0.0;
      const std::size_t lo = k + 1 >= static_cast<std::size_t>(window) ? k + 1 - window : 0;
      for (std::size_t j = lo; j <= k; ++j) sum_sq += increments[j] * increments[j];
    }
    const auto used = static_cast<double>(std::min<std::size_t>(k + 1, static_cast<std::size_t>(window)));
    const double rv = std::max(sum_sq, 0.0) / (used * dt);
    const double vol = std::sqrt(rv);
    Eigen::Index best = 0;
    (sigma.array() - vol).abs().minCoeff(&best);
    out.states.push_back(static_cast<int>(best));
    out.realized_vol.push_back(vol);
  }
  return out;
}

}  // namespace fbvol
