#pragma once

// Strong L2 error of the coarse Euler scheme for FB-HMM returns at T.
//
// Each replication simulates one exact chain path and one Brownian path on
// the fine grid and runs the coupled FB-HMM recursion there; that fine path
// stands in for the continuous-time process. For a coarse grid with
// m = fine_n / n fine steps per coarse step, the error is
//
//   eps = sum_blocks sum_{i in block} [ mu^T (Y_i - Y_b) dt_f + (vol_i - vol_b) dW_i ]
//
// where b is the first fine index of the block. This equals the reference
// R_T minus the coarse Euler sum built from left-endpoint coefficients and
// aggregated Brownian increments, and it vanishes identically when the
// coefficients are constant.

#include <cstdint>
#include <vector>

#include "fbvol/models.hpp"
#include "fbvol/params.hpp"
#include "fbvol/rng.hpp"
#include "fbvol/stats.hpp"

namespace fbvol {

struct ConvergenceRow {
  int n = 0;
  double mse = 0.0;
  double std_error = 0.0;
  double drift_mse = 0.0;
  double drift_std_error = 0.0;
  double diff_mse = 0.0;
  double diff_std_error = 0.0;
};

struct ConvergenceReport {
  int fine_n = 0;
  int replications = 0;
  std::vector<ConvergenceRow> rows;
};

struct CoarseError {
  double drift = 0.0;
  double diffusion = 0.0;
  double total() const { return drift + diffusion; }
};

/// Error of the n-step coarse scheme against a fine-grid FB-HMM path.
inline CoarseError coarse_euler_error(const PathBundle& fine, const RegimeParams& params, int n) {
  const int fine_n = fine.grid.steps();
  if (n < 1 || fine_n % n != 0) fail(ErrorKind::Config, "grid: coarse n must divide fine_n");
  const int m = fine_n / n;
  const double dt = fine.grid.dt();
  const Vector& mu = params.mu();
  CoarseError e;
  for (int block = 0; block < n; ++block) {
    const auto b = static_cast<std::size_t>(block * m);
    const double mu_b = mu(fine.chain_states[b]);
    const double vol_b = fine.vol[b];
    for (std::size_t i = b; i < b + static_cast<std::size_t>(m); ++i) {
      e.drift += (mu(fine.chain_states[i]) - mu_b) * dt;
      e.diffusion += (fine.vol[i] - vol_b) * fine.dW[i];
    }
  }
  return e;
}

inline ConvergenceReport euler_error_experiment(const RegimeParams& params, const std::vector<int>& n_values, int fine_n,
                                                int replications, double horizon, std::uint64_t seed) {
  if (fine_n < 1) fail(ErrorKind::Config, "grid: fine_n must be >= 1");
  if (n_values.empty()) fail(ErrorKind::Config, "grid: n_values must not be empty");
  for (int n : n_values) {
    if (n < 1 || fine_n % n != 0) fail(ErrorKind::Config, "grid: fine_n = " + std::to_string(fine_n) + " is not divisible by n = " + std::to_string(n));
  }
  if (replications < 2) fail(ErrorKind::Config, "converge: need at least 2 replications");
  const Grid fine_grid(horizon, fine_n);
  require_stable_step(params.q(), fine_grid.dt());

  std::vector<RunningStats> total(n_values.size()), drift(n_values.size()), diff(n_values.size());
  for (int r = 0; r < replications; ++r) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(r));
    const Drivers drivers = simulate_driving_noise(fine_grid, params.q(), rng);
    const PathBundle fine = simulate_fb_hmm(params, fine_grid, drivers);
    for (std::size_t j = 0; j < n_values.size(); ++j) {
      const CoarseError e = coarse_euler_error(fine, params, n_values[j]);
      total[j].add(e.total() * e.total());
      drift[j].add(e.drift * e.drift);
      diff[j].add(e.diffusion * e.diffusion);
    }
  }

  ConvergenceReport rep;
  rep.fine_n = fine_n;
  rep.replications = replications;
  for (std::size_t j = 0; j < n_values.size(); ++j) {
    rep.rows.push_back({n_values[j], total[j].mean(), total[j].std_error(), drift[j].mean(), drift[j].std_error(), diff[j].mean(),
                        diff[j].std_error()});
  }
  return rep;
}

}  // namespace fbvol
