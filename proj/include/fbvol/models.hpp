#pragma once

// Return-path simulators for the HMM, MSM and FB-HMM on a uniform grid.
//
// All three consume the same Drivers (one exact chain path, one set of
// Brownian increments) so that paths can be compared pathwise. Coefficients
// are frozen at the left endpoint of each step (explicit Euler).

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fbvol/chain.hpp"
#include "fbvol/filters.hpp"
#include "fbvol/params.hpp"
#include "fbvol/rng.hpp"

namespace fbvol {

enum class ModelKind { Hmm, Msm, Fb };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Hmm: return "hmm";
    case ModelKind::Msm: return "msm";
    case ModelKind::Fb: return "fb";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(const std::string& s) {
  if (s == "hmm") return ModelKind::Hmm;
  if (s == "msm") return ModelKind::Msm;
  if (s == "fb" || s == "fb-hmm" || s == "fbhmm") return ModelKind::Fb;
  return std::nullopt;
}

struct Drivers {
  ChainPath chain;
  std::vector<double> dW;  ///< dW[k-1] = W(t_k) - W(t_{k-1}), k = 1..n
};

/// One exact chain path on [0, T] plus n Normal(0, dt) increments.
/// Y_0 ~ nu unless `initial_state` is given.
inline Drivers simulate_driving_noise(const Grid& grid, const RateMatrix& q, Rng& rng,
                                      std::optional<int> initial_state = std::nullopt) {
  Drivers out;
  if (initial_state) {
    out.chain = simulate_chain(q, *initial_state, grid.horizon(), rng);
  } else {
    out.chain = simulate_chain(q, stationary_distribution(q), grid.horizon(), rng);
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  out.dW.resize(static_cast<std::size_t>(grid.steps()));
  for (double& w : out.dW) w = normal(rng);
  return out;
}

/// Grid-aligned simulation output. All arrays except dW have n + 1 entries.
struct PathBundle {
  ModelKind model = ModelKind::Hmm;
  Grid grid{1.0, 1};
  std::vector<double> dW;          ///< n increments
  std::vector<int> chain_states;   ///< Y(t_k), 0-based
  std::vector<double> returns;     ///< cumulative R_k, R_0 = 0
  std::vector<Vector> filter;      ///< Yhat_k
  std::vector<double> vol;         ///< volatility sigma_k at t_k

  /// dR_k = R_k - R_{k-1}, k = 1..n.
  std::vector<double> increments() const {
    std::vector<double> out(dW.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = returns[k + 1] - returns[k];
    return out;
  }
};

namespace detail {

inline std::vector<int> grid_states(const ChainPath& chain, const Grid& grid) {
  std::vector<int> out(static_cast<std::size_t>(grid.steps()) + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= grid.steps(); ++k) {
    const double t = grid.time(k);
    while (seg + 1 < chain.jump_times.size() && chain.jump_times[seg + 1] <= t) ++seg;
    out[static_cast<std::size_t>(k)] = chain.states[seg];
  }
  return out;
}

inline void check_drivers(const RegimeParams& params, const Grid& grid, const Drivers& drivers) {
  if (static_cast<int>(drivers.dW.size()) != grid.steps()) fail(ErrorKind::Config, "drivers: dW length does not match the grid");
  if (std::abs(drivers.chain.horizon - grid.horizon()) > 1e-12 * grid.horizon()) fail(ErrorKind::Config, "drivers: chain horizon does not match the grid");
  for (int s : drivers.chain.states) {
    if (s < 0 || s >= params.dim()) fail(ErrorKind::Config, "drivers: chain state out of range for the parameters");
  }
}

inline PathBundle start_bundle(ModelKind kind, const Grid& grid, const Drivers& drivers) {
  PathBundle b;
  b.model = kind;
  b.grid = grid;
  b.dW = drivers.dW;
  b.chain_states = grid_states(drivers.chain, grid);
  b.returns.assign(static_cast<std::size_t>(grid.steps()) + 1, 0.0);
  return b;
}

}  // namespace detail

/// dR_k = mu^T Y_{k-1} dt + sigma0 dW_k, filtered by the robust HMM filter.
inline PathBundle simulate_hmm(const RegimeParams& params, const Grid& grid, const Drivers& drivers) {
  detail::check_drivers(params, grid, drivers);
  PathBundle b = detail::start_bundle(ModelKind::Hmm, grid, drivers);
  const double s0 = params.hmm_volatility();
  const double dt = grid.dt();
  for (std::size_t k = 1; k < b.returns.size(); ++k) {
    b.returns[k] = b.returns[k - 1] + params.mu()(b.chain_states[k - 1]) * dt + s0 * b.dW[k - 1];
  }
  b.filter = run_hmm_filter(b.increments(), params, grid);
  b.vol.assign(b.returns.size(), s0);
  return b;
}

/// dR_k = mu^T Y_{k-1} dt + sigma^T Y_{k-1} dW_k. The chain is observable, so
/// the filter field is the grid-sampled indicator of Y.
inline PathBundle simulate_msm(const RegimeParams& params, const Grid& grid, const Drivers& drivers) {
  detail::check_drivers(params, grid, drivers);
  PathBundle b = detail::start_bundle(ModelKind::Msm, grid, drivers);
  const double dt = grid.dt();
  for (std::size_t k = 1; k < b.returns.size(); ++k) {
    const int y = b.chain_states[k - 1];
    b.returns[k] = b.returns[k - 1] + params.mu()(y) * dt + params.sigma()(y) * b.dW[k - 1];
  }
  b.filter.reserve(b.returns.size());
  b.vol.reserve(b.returns.size());
  for (int y : b.chain_states) {
    b.filter.push_back(unit_vector(params.dim(), y));
    b.vol.push_back(params.sigma()(y));
  }
  return b;
}

/// Coupled FB-HMM scheme: the volatility over step k is sigma^T Yhat_{k-1},
/// and Yhat is updated by the robust recursion driven by the simulated
/// increment.
inline PathBundle simulate_fb_hmm(const RegimeParams& params, const Grid& grid, const Drivers& drivers) {
  detail::check_drivers(params, grid, drivers);
  PathBundle b = detail::start_bundle(ModelKind::Fb, grid, drivers);
  const double dt = grid.dt();
  ZakaiRecursion filter(params, dt, params.nu());
  b.filter.reserve(b.returns.size());
  b.vol.reserve(b.returns.size());
  b.filter.push_back(filter.yhat());
  b.vol.push_back(params.sigma().dot(filter.yhat()));
  for (std::size_t k = 1; k < b.returns.size(); ++k) {
    const double vol = b.vol.back();
    const double dR = params.mu()(b.chain_states[k - 1]) * dt + vol * b.dW[k - 1];
    b.returns[k] = b.returns[k - 1] + dR;
    // Feed the stored difference so an external rerun on increments() matches bit for bit.
    b.filter.push_back(filter.step(b.returns[k] - b.returns[k - 1], vol));
    b.vol.push_back(params.sigma().dot(b.filter.back()));
  }
  return b;
}

inline PathBundle simulate(ModelKind kind, const RegimeParams& params, const Grid& grid, const Drivers& drivers) {
  switch (kind) {
    case ModelKind::Hmm: return simulate_hmm(params, grid, drivers);
    case ModelKind::Msm: return simulate_msm(params, grid, drivers);
    case ModelKind::Fb: return simulate_fb_hmm(params, grid, drivers);
  }
  return simulate_hmm(params, grid, drivers);
}

}  // namespace fbvol
