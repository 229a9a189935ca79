#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fbvol/chain.hpp"
#include "fbvol/error.hpp"

namespace fbvol {

/// Uniform time grid t_k = k T / n on [0, T]. Units are years.
class Grid {
 public:
  Grid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0)) fail(ErrorKind::Config, "grid: horizon T must be > 0");
    if (steps < 1) fail(ErrorKind::Config, "grid: step count n must be >= 1");
  }

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return horizon_ / steps_; }
  double time(int k) const noexcept { return k == steps_ ? horizon_ : k * dt(); }

 private:
  double horizon_;
  int steps_;
};

/// Model coefficients shared by the HMM, MSM and FB-HMM.
///
/// Drift is mu^T Y_t. The MSM and FB-HMM use the volatility vector `sigma`;
/// the HMM uses the scalar `sigma0`, which defaults to sigma^T nu (the
/// equal-variance HMM) when not given explicitly.
class RegimeParams {
 public:
  RegimeParams(RateMatrix q, Vector mu, Vector sigma, std::optional<double> sigma0 = std::nullopt)
      : q_(std::move(q)), mu_(std::move(mu)), sigma_(std::move(sigma)), sigma0_(sigma0) {
    std::vector<std::string> problems;
    const int d = q_.dim();
    if (mu_.size() != d) problems.push_back("mu has " + std::to_string(mu_.size()) + " entries, Q has dimension " + std::to_string(d));
    if (sigma_.size() != d) problems.push_back("sigma has " + std::to_string(sigma_.size()) + " entries, Q has dimension " + std::to_string(d));
    if (!mu_.allFinite()) problems.push_back("mu has non-finite entries");
    for (Eigen::Index i = 0; i < sigma_.size(); ++i) {
      if (!(sigma_(i) > 0.0) || !std::isfinite(sigma_(i))) {
        std::ostringstream os;
        os << "sigma[" << i + 1 << "] = " << sigma_(i) << " must be > 0";
        problems.push_back(os.str());
      }
    }
    if (sigma0_ && !(*sigma0_ > 0.0)) problems.push_back("sigma0 must be > 0");
    if (!problems.empty()) {
      std::string msg = problems.front();
      for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
      fail(ErrorKind::Config, msg);
    }
    nu_ = stationary_distribution(q_);
  }

  int dim() const noexcept { return q_.dim(); }
  const RateMatrix& q() const noexcept { return q_; }
  const Vector& mu() const noexcept { return mu_; }
  const Vector& sigma() const noexcept { return sigma_; }
  const Vector& nu() const noexcept { return nu_; }
  const std::optional<double>& sigma0() const noexcept { return sigma0_; }

  double hmm_volatility() const { return sigma0_ ? *sigma0_ : sigma_.dot(nu_); }

  RegimeParams with_sigma0(double s) const { return RegimeParams(q_, mu_, sigma_, s); }

 private:
  RateMatrix q_;
  Vector mu_;
  Vector sigma_;
  std::optional<double> sigma0_;
  Vector nu_;
};

/// (I + dt Q^T) maps the positive cone into itself only if dt max_i(-Q_ii) < 1.
inline void require_stable_step(const RateMatrix& q, double dt) {
  const double c = dt * q.max_exit_rate();
  if (!(c < 1.0)) {
    std::ostringstream os;
    os << "stability: dt * max(-Q_ii) = " << c << " must be < 1";
    fail(ErrorKind::Numerical, os.str());
  }
}

}  // namespace fbvol
