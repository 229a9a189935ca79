#pragma once

// Log-utility trading with interest rate 0.
//
// The log-optimal fraction is conditional drift over conditional variance:
//   HMM:    mu^T Yhat / sigma0^2
//   MSM:    mu^T Y / (sigma^T Y)^2        (Y observable)
//   FB-HMM: mu^T Yhat / (sigma^T Yhat)^2
// Wealth evolves as X_k = X_{k-1} (1 + pi_{k-1} dR_k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbvol/filters.hpp"
#include "fbvol/models.hpp"
#include "fbvol/params.hpp"
#include "fbvol/rng.hpp"
#include "fbvol/stats.hpp"

namespace fbvol {

struct Clamp {
  double lo = 0.0;
  double hi = 1.0;

  double apply(double pi) const { return std::clamp(pi, lo, hi); }
};

inline double hmm_fraction(const Vector& yhat, const Vector& mu, double sigma0) { return mu.dot(yhat) / (sigma0 * sigma0); }

inline double msm_fraction(int state, const Vector& mu, const Vector& sigma) {
  const double s = sigma(state);
  return mu(state) / (s * s);
}

inline double fb_fraction(const Vector& yhat, const Vector& mu, const Vector& sigma) {
  const double s = sigma.dot(yhat);
  return mu.dot(yhat) / (s * s);
}

/// Dispatch on the model. `state_info` is Yhat for HMM/FB and the indicator
/// e_Y (or any simplex vector, read as its MAP state) for the MSM.
inline double log_optimal_fraction(ModelKind kind, const Vector& state_info, const RegimeParams& params) {
  switch (kind) {
    case ModelKind::Hmm: return hmm_fraction(state_info, params.mu(), params.hmm_volatility());
    case ModelKind::Msm: return msm_fraction(map_state(state_info), params.mu(), params.sigma());
    case ModelKind::Fb: return fb_fraction(state_info, params.mu(), params.sigma());
  }
  return 0.0;
}

/// Per-step fractions pi_0..pi_{n-1}; pi_{k-1} is held over increment k.
struct Strategy {
  std::string name;
  std::vector<double> fractions;
  std::optional<Clamp> clamp;
};

struct WealthPath {
  std::vector<double> wealth;  ///< X_0..X_n; zero after bankruptcy
  bool bankrupt = false;

  double log_terminal() const {
    return bankrupt ? -std::numeric_limits<double>::infinity() : std::log(wealth.back());
  }
};

inline WealthPath simulate_wealth(std::span<const double> increments, std::span<const double> fractions, double x0,
                                  const std::optional<Clamp>& clamp = std::nullopt) {
  if (increments.size() != fractions.size()) fail(ErrorKind::Config, "simulate_wealth: one fraction per increment required");
  if (!(x0 > 0.0)) fail(ErrorKind::Config, "simulate_wealth: x0 must be > 0");
  WealthPath out;
  out.wealth.reserve(increments.size() + 1);
  out.wealth.push_back(x0);
  for (std::size_t k = 0; k < increments.size(); ++k) {
    if (out.bankrupt) {
      out.wealth.push_back(0.0);
      continue;
    }
    const double pi = clamp ? clamp->apply(fractions[k]) : fractions[k];
    const double next = out.wealth.back() * (1.0 + pi * increments[k]);
    if (next <= 0.0) {
      out.bankrupt = true;
      out.wealth.push_back(0.0);
    } else {
      out.wealth.push_back(next);
    }
  }
  return out;
}

/// Builds the fractions a strategy would hold along one simulated path.
using StrategyRule = std::function<std::vector<double>(const PathBundle&, const RegimeParams&)>;

struct NamedRule {
  std::string name;
  StrategyRule rule;
};

inline StrategyRule constant_rule(double pi) {
  return [pi](const PathBundle& b, const RegimeParams&) { return std::vector<double>(b.dW.size(), pi); };
}

/// HMM investor: equal-variance HMM filter run on the observed returns.
inline StrategyRule hmm_rule() {
  return [](const PathBundle& b, const RegimeParams& p) {
    const auto incr = b.increments();
    const auto filter = run_hmm_filter(incr, p, b.grid);
    std::vector<double> out(incr.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = hmm_fraction(filter[k], p.mu(), p.hmm_volatility());
    return out;
  };
}

/// FB investor: FB filter run on the observed returns.
inline StrategyRule fb_rule() {
  return [](const PathBundle& b, const RegimeParams& p) {
    const auto incr = b.increments();
    const auto trace = run_fb_filter(incr, p, b.grid);
    std::vector<double> out(incr.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fb_fraction(trace.filter[k], p.mu(), p.sigma());
    return out;
  };
}

/// MSM investor. On MSM paths the chain is observable and the true state is
/// used. On other paths the state is read off realized volatility; before
/// any increment is seen the fraction is mu^T nu / (sigma^T nu)^2.
inline StrategyRule msm_rule(int window = 0) {
  return [window](const PathBundle& b, const RegimeParams& p) {
    std::vector<double> out(b.dW.size());
    if (b.model == ModelKind::Msm) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = msm_fraction(b.chain_states[k], p.mu(), p.sigma());
      return out;
    }
    const auto incr = b.increments();
    const int w = window > 0 ? window : default_detector_window(b.grid.steps());
    const auto det = qv_state_detector(incr, p.sigma(), w, b.grid.dt());
    out[0] = fb_fraction(p.nu(), p.mu(), p.sigma());
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = msm_fraction(det.states[k - 1], p.mu(), p.sigma());
    return out;
  };
}

/// Own-model optimal rule for each model kind.
inline NamedRule optimal_rule(ModelKind kind) {
  switch (kind) {
    case ModelKind::Hmm: return {"hmm", hmm_rule()};
    case ModelKind::Msm: return {"msm", msm_rule()};
    case ModelKind::Fb: return {"fb", fb_rule()};
  }
  return {"hmm", hmm_rule()};
}

/// The three model rules, the constants {0, 0.25, 0.5, 1} and the
/// stationary Merton fraction mu^T nu / (sigma^T nu)^2.
inline std::vector<NamedRule> standard_rules(const RegimeParams& params) {
  std::vector<NamedRule> rules{{"hmm", hmm_rule()}, {"msm", msm_rule()}, {"fb", fb_rule()}};
  for (double c : {0.0, 0.25, 0.5, 1.0}) rules.push_back({"const_" + std::to_string(c).substr(0, 4), constant_rule(c)});
  rules.push_back({"const_stationary", constant_rule(fb_fraction(params.nu(), params.mu(), params.sigma()))});
  return rules;
}

struct StrategyResult {
  std::string name;
  double mean_log_wealth = 0.0;  ///< over non-bankrupt paths
  double std_error = 0.0;
  std::int64_t bankrupt_count = 0;
  std::int64_t paths = 0;
};

struct PortfolioSettings {
  ModelKind model = ModelKind::Fb;
  int replications = 1000;
  double x0 = 1.0;
  std::optional<Clamp> clamp = Clamp{};
  std::uint64_t seed = 1;
};

/// Monte Carlo estimate of E[log X_T] for each rule on `settings.model` paths.
/// Replication r draws its drivers from substream(seed, r).
inline std::vector<StrategyResult> expected_log_utility(const RegimeParams& params, const Grid& grid,
                                                        const std::vector<NamedRule>& rules, const PortfolioSettings& settings) {
  if (settings.replications < 2) fail(ErrorKind::Config, "portfolio: need at least 2 replications");
  std::vector<StrategyResult> out(rules.size());
  std::vector<RunningStats> stats(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) out[i].name = rules[i].name;

  for (int r = 0; r < settings.replications; ++r) {
    Rng rng = substream(settings.seed, static_cast<std::uint64_t>(r));
    const Drivers drivers = simulate_driving_noise(grid, params.q(), rng);
    const PathBundle bundle = simulate(settings.model, params, grid, drivers);
    const auto incr = bundle.increments();
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto fractions = rules[i].rule(bundle, params);
      const WealthPath w = simulate_wealth(incr, fractions, settings.x0, settings.clamp);
      if (w.bankrupt) {
        ++out[i].bankrupt_count;
      } else {
        stats[i].add(w.log_terminal());
      }
    }
  }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    out[i].paths = stats[i].count();
    out[i].mean_log_wealth = stats[i].count() > 0 ? stats[i].mean() : -std::numeric_limits<double>::infinity();
    out[i].std_error = stats[i].std_error();
  }
  return out;
}

}  // namespace fbvol
