#pragma once

// HMM, MSM and FB-HMM run on shared drivers, with state-recovery scores.

#include <vector>

#include "fbvol/filters.hpp"
#include "fbvol/models.hpp"
#include "fbvol/params.hpp"

namespace fbvol {

struct ModelComparison {
  PathBundle hmm;
  PathBundle msm;
  PathBundle fb;
  DetectorOutput detector;        ///< realized-volatility detector on the MSM increments
  double hmm_filter_accuracy = 0;  ///< share of k = 1..n with argmax Yhat_k == Y(t_k), HMM path
  double msm_detector_accuracy = 0;  ///< share of k = 1..n with detected_k == Y(t_{k-1}), MSM path
  double fb_filter_accuracy = 0;   ///< as for the HMM, on the FB-HMM path
};

/// Fraction of k = 1..n where the filter's MAP state matches the chain at t_k.
inline double map_accuracy(const PathBundle& b) {
  const std::size_t n = b.dW.size();
  std::size_t hits = 0;
  for (std::size_t k = 1; k <= n; ++k) hits += map_state(b.filter[k]) == b.chain_states[k];
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Fraction of increments whose detected state matches the state driving them.
inline double detector_accuracy(const DetectorOutput& det, const std::vector<int>& chain_states) {
  std::size_t hits = 0;
  for (std::size_t k = 0; k < det.states.size(); ++k) hits += det.states[k] == chain_states[k];
  return static_cast<double>(hits) / static_cast<double>(det.states.size());
}

inline ModelComparison compare_models(const RegimeParams& params, const Grid& grid, const Drivers& drivers, int window) {
  ModelComparison c{simulate_hmm(params, grid, drivers), simulate_msm(params, grid, drivers), simulate_fb_hmm(params, grid, drivers), {}};
  c.detector = qv_state_detector(c.msm.increments(), params.sigma(), window, grid.dt());
  c.hmm_filter_accuracy = map_accuracy(c.hmm);
  c.msm_detector_accuracy = detector_accuracy(c.detector, c.msm.chain_states);
  c.fb_filter_accuracy = map_accuracy(c.fb);
  return c;
}

}  // namespace fbvol
