#pragma once

// Stylized-fact estimators for return increments, the FB-HMM linear
// autocovariance decomposition, and the Monte Carlo check that the filter
// volatility sigma^T Yhat beats every constant volatility in mean square.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbvol/chain.hpp"
#include "fbvol/models.hpp"
#include "fbvol/params.hpp"
#include "fbvol/rng.hpp"
#include "fbvol/stats.hpp"

namespace fbvol {

enum class AcfTransform { Identity, Abs, Square, Sign };

inline const char* to_string(AcfTransform t) {
  switch (t) {
    case AcfTransform::Identity: return "identity";
    case AcfTransform::Abs: return "abs";
    case AcfTransform::Square: return "square";
    case AcfTransform::Sign: return "sign";
  }
  return "?";
}

inline std::optional<AcfTransform> parse_transform(const std::string& s) {
  if (s == "identity" || s == "linear") return AcfTransform::Identity;
  if (s == "abs") return AcfTransform::Abs;
  if (s == "square") return AcfTransform::Square;
  if (s == "sign") return AcfTransform::Sign;
  return std::nullopt;
}

inline std::vector<double> apply_transform(std::span<const double> x, AcfTransform t) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) {
    switch (t) {
      case AcfTransform::Identity: break;
      case AcfTransform::Abs: v = std::abs(v); break;
      case AcfTransform::Square: v = v * v; break;
      case AcfTransform::Sign: v = static_cast<double>((v > 0.0) - (v < 0.0)); break;
    }
  }
  return out;
}

/// Pearson correlation of (x_0..x_{n-1-lag}) with (x_lag..x_{n-1}).
inline double lagged_correlation(std::span<const double> x, std::size_t lag) {
  if (x.size() < lag + 2) fail(ErrorKind::Range, "autocorrelation: series too short for the lag");
  const std::size_t m = x.size() - lag;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += x[i];
    mb += x[i + lag];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = x[i] - ma, b = x[i + lag] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  const auto [lo_a, hi_a] = std::minmax_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
  const auto [lo_b, hi_b] = std::minmax_element(x.begin() + static_cast<std::ptrdiff_t>(lag), x.end());
  if (*lo_a == *hi_a || *lo_b == *hi_b || !(saa > 0.0) || !(sbb > 0.0)) fail(ErrorKind::Numerical, "autocorrelation undefined for a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct AcfReport {
  std::vector<int> lags;
  std::vector<double> values;
  std::vector<double> std_error;  ///< white-noise band 1/sqrt(n - lag)
  AcfTransform transform = AcfTransform::Identity;
};

/// Sample autocorrelation of the transformed series at lags 1..max_lag.
inline AcfReport empirical_acf(std::span<const double> increments, int max_lag, AcfTransform transform) {
  if (max_lag < 1) fail(ErrorKind::Config, "empirical_acf: max_lag must be >= 1");
  if (increments.size() <= static_cast<std::size_t>(max_lag) + 2) fail(ErrorKind::Range, "empirical_acf: series length must exceed max_lag + 2");
  const auto x = apply_transform(increments, transform);
  AcfReport r;
  r.transform = transform;
  for (int h = 1; h <= max_lag; ++h) {
    r.lags.push_back(h);
    r.values.push_back(lagged_correlation(x, static_cast<std::size_t>(h)));
    r.std_error.push_back(1.0 / std::sqrt(static_cast<double>(x.size() - static_cast<std::size_t>(h))));
  }
  return r;
}

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 edges
  std::vector<std::int64_t> counts;
};

struct DistributionReport {
  double mean = 0.0;
  double variance = 0.0;         ///< population (1/n) variance
  double skewness = 0.0;         ///< 0 for a constant series
  double excess_kurtosis = 0.0;  ///< 0 for a constant series
  Histogram histogram;
};

inline DistributionReport distribution_report(std::span<const double> x, int bins = 50) {
  if (x.size() < 100) fail(ErrorKind::Range, "distribution_report: need at least 100 observations");
  if (bins < 1) fail(ErrorKind::Config, "distribution_report: bins must be >= 1");
  DistributionReport r;
  const auto n = static_cast<double>(x.size());
  for (double v : x) r.mean += v;
  r.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = v - r.mean, c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  r.variance = m2;
  if (m2 > 0.0) {
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    r.histogram.edges = {lo, hi};
    r.histogram.counts = {static_cast<std::int64_t>(x.size())};
    return r;
  }
  const double width = (hi - lo) / bins;
  r.histogram.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) r.histogram.edges[static_cast<std::size_t>(i)] = lo + i * width;
  r.histogram.edges.back() = hi;
  r.histogram.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : x) {
    auto b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++r.histogram.counts[static_cast<std::size_t>(b)];
  }
  return r;
}

struct LeverageReport {
  double correlation = 0.0;
  double std_error = 0.0;
  std::size_t pairs = 0;
};

/// corr(dR_k, sqrt(sum_{j=k+1}^{k+w} dR_j^2)): past return vs future realized volatility.
inline LeverageReport leverage_proxy(std::span<const double> increments, int window) {
  if (window < 1) fail(ErrorKind::Config, "leverage_proxy: window must be >= 1");
  if (increments.size() < static_cast<std::size_t>(window) + 3) fail(ErrorKind::Range, "leverage_proxy: series too short for the window");
  const std::size_t m = increments.size() - static_cast<std::size_t>(window);
  std::vector<double> past(m), future(m);
  double acc = 0.0;
  for (int j = 1; j <= window; ++j) acc += increments[static_cast<std::size_t>(j)] * increments[static_cast<std::size_t>(j)];
  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0) {
      acc += increments[k + window] * increments[k + window] - increments[k] * increments[k];
    }
    past[k] = increments[k];
    future[k] = std::sqrt(std::max(acc, 0.0));
  }
  double mp = 0.0, mf = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mp += past[k];
    mf += future[k];
  }
  mp /= static_cast<double>(m);
  mf /= static_cast<double>(m);
  double spf = 0.0, spp = 0.0, sff = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    spf += (past[k] - mp) * (future[k] - mf);
    spp += (past[k] - mp) * (past[k] - mp);
    sff += (future[k] - mf) * (future[k] - mf);
  }
  if (!(spp > 0.0) || !(sff > 0.0)) fail(ErrorKind::Numerical, "leverage_proxy: degenerate series");
  LeverageReport r;
  r.pairs = m;
  r.correlation = spf / std::sqrt(spp * sff);
  r.std_error = std::sqrt(std::max(0.0, 1.0 - r.correlation * r.correlation) / static_cast<double>(m - 2));
  return r;
}

// ---------------------------------------------------------------------------
// Linear autocovariance of FB-HMM increments
// ---------------------------------------------------------------------------

struct AutocovarianceReport {
  double drift_term = 0.0;      ///< int_s^{s+dt} int_t^{t+dt} sum_ij mu_i mu_j exp(Q(r-u))_ij nu_i du dr
  double cross_term = 0.0;      ///< Monte Carlo E[int sigma^T Yhat dW over [t,t+dt] * int mu^T Y dr over [s,s+dt]]
  double cross_std_error = 0.0;
  double mean_term = 0.0;       ///< -(dt mu^T nu)^2
  double total = 0.0;
  int t_index = 0;              ///< grid index of t
  int s_index = 0;              ///< grid index of s
  int replications = 0;
};

/// Grid index k with k dt == time (up to 1e-9 relative), or a range error.
inline int grid_index(double time, double dt) {
  const double k = std::round(time / dt);
  if (std::abs(k * dt - time) > 1e-9 * std::max(1.0, std::abs(time))) fail(ErrorKind::Range, "time is not a multiple of the grid step");
  return static_cast<int>(k);
}

/// 64 x 64 composite midpoint rule for the chain part of the autocovariance.
inline double autocovariance_drift_term(const RegimeParams& params, double t, double s, double dt, int panels = 64) {
  const Vector& mu = params.mu();
  const Vector& nu = params.nu();
  const double h = dt / panels;
  double acc = 0.0;
  for (int a = 0; a < panels; ++a) {
    const double r = s + (a + 0.5) * h;
    for (int b = 0; b < panels; ++b) {
      const double u = t + (b + 0.5) * h;
      const Matrix p = transition_matrix(params.q(), r - u);
      acc += nu.cwiseProduct(mu).dot(p * mu);
    }
  }
  return acc * h * h;
}

/// Decomposes Cov(dR_t, dR_s) for the FB-HMM, t + dt < s.
///
/// Replication r simulates an FB-HMM path on the grid of step dt up to s + dt
/// using substream(seed, r). The stochastic integral over [t, t+dt] is the
/// Euler term vol_t dW and the drift integral over [s, s+dt] is mu^T Y_s dt.
inline AutocovarianceReport linear_autocovariance(const RegimeParams& params, double t, double s, double dt, int replications,
                                                  std::uint64_t seed) {
  if (!(dt > 0.0)) fail(ErrorKind::Range, "linear_autocovariance: dt must be > 0");
  if (!(t >= 0.0) || !(t + dt < s)) fail(ErrorKind::Range, "linear_autocovariance: ordering requires 0 <= t and t + dt < s");
  if (replications < 2) fail(ErrorKind::Config, "linear_autocovariance: need at least 2 replications");

  AutocovarianceReport r;
  r.t_index = grid_index(t, dt);
  r.s_index = grid_index(s, dt);
  r.replications = replications;
  r.drift_term = autocovariance_drift_term(params, t, s, dt);
  const double mu_nu = params.mu().dot(params.nu());
  const double m = mu_nu * dt;
  r.mean_term = -m * m;

  const Grid grid(dt * (r.s_index + 1), r.s_index + 1);
  RunningStats cross;
  for (int rep = 0; rep < replications; ++rep) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(rep));
    const Drivers drivers = simulate_driving_noise(grid, params.q(), rng);
    const PathBundle b = simulate_fb_hmm(params, grid, drivers);
    const auto ti = static_cast<std::size_t>(r.t_index);
    const auto si = static_cast<std::size_t>(r.s_index);
    const double noise_t = b.vol[ti] * b.dW[ti];
    // Centering the drift by its known mean leaves the expectation unchanged
    // (E[noise_t] = 0) and removes the variance a deterministic drift would add.
    const double drift_s = (params.mu()(b.chain_states[si]) - mu_nu) * dt;
    cross.add(noise_t * drift_s);
  }
  r.cross_term = cross.mean();
  r.cross_std_error = cross.std_error();
  r.total = r.drift_term + r.cross_term + r.mean_term;
  return r;
}

// ---------------------------------------------------------------------------
// Mean-square optimality of the filter volatility
// ---------------------------------------------------------------------------

struct MseCandidate {
  std::string label;
  double value = 0.0;  ///< the constant volatility c
  double mse = 0.0;
  double std_error = 0.0;
};

struct MseReport {
  double filter_mse = 0.0;
  double filter_std_error = 0.0;
  std::vector<MseCandidate> candidates;
  bool holds = false;  ///< filter_mse <= candidate mse + 2 combined standard errors, for every candidate
  int time_index = 0;
};

/// E[(sigma^T Y_t - sigma^T Yhat_t)^2] vs E[(sigma^T Y_t - c)^2] for c in
/// {sigma^T nu, sigma_1, ..., sigma_d}, estimated on FB-HMM paths.
inline MseReport mse_optimality_check(const RegimeParams& params, const Grid& grid, double t, int replications, std::uint64_t seed) {
  if (replications < 2) fail(ErrorKind::Config, "mse_optimality_check: need at least 2 replications");
  MseReport rep;
  rep.time_index = grid_index(t, grid.dt());
  if (rep.time_index < 0 || rep.time_index > grid.steps()) fail(ErrorKind::Range, "mse_optimality_check: t outside the grid");

  std::vector<MseCandidate> cands;
  cands.push_back({"sigma_nu", params.sigma().dot(params.nu())});
  for (int i = 0; i < params.dim(); ++i) cands.push_back({"sigma_" + std::to_string(i + 1), params.sigma()(i)});

  // Only the path up to t matters.
  const Grid sub(grid.dt() * std::max(rep.time_index, 1), std::max(rep.time_index, 1));
  RunningStats filt;
  std::vector<RunningStats> cs(cands.size());
  for (int r = 0; r < replications; ++r) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(r));
    const Drivers drivers = simulate_driving_noise(sub, params.q(), rng);
    const PathBundle b = simulate_fb_hmm(params, sub, drivers);
    const auto k = static_cast<std::size_t>(rep.time_index);
    const double truth = params.sigma()(b.chain_states[k]);
    const double e = truth - b.vol[k];
    filt.add(e * e);
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double ec = truth - cands[c].value;
      cs[c].add(ec * ec);
    }
  }
  rep.filter_mse = filt.mean();
  rep.filter_std_error = filt.std_error();
  rep.holds = true;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    cands[c].mse = cs[c].mean();
    cands[c].std_error = cs[c].std_error();
    // The absolute slack only absorbs rounding when both errors are ~0.
    const double band = 2.0 * std::hypot(rep.filter_std_error, cands[c].std_error) + 1e-20;
    if (rep.filter_mse > cands[c].mse + band) rep.holds = false;
  }
  rep.candidates = std::move(cands);
  return rep;
}

}  // namespace fbvol
