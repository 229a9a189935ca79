#pragma once

// Continuous-time Markov chain machinery: rate matrices, stationary laws,
// exact (Gillespie) path simulation and the transition semigroup exp(Q t).

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbvol/error.hpp"
#include "fbvol/rng.hpp"

namespace fbvol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline bool strongly_connected(const Matrix& q) {
  const Eigen::Index d = q.rows();
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < d; ++j) {
        const double rate = transpose ? q(j, i) : q(i, j);
        if (j != i && rate > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach_all(false) && reach_all(true);
}

}  // namespace detail

/// Every violated rate-matrix invariant, one message each. Empty when valid.
inline std::vector<std::string> rate_matrix_violations(const Matrix& q) {
  std::vector<std::string> out;
  if (q.rows() < 1 || q.rows() != q.cols()) {
    out.push_back("Q must be a non-empty square matrix");
    return out;
  }
  if (!q.allFinite()) {
    out.push_back("Q has non-finite entries");
    return out;
  }
  const Eigen::Index d = q.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j && q(i, j) < 0.0) {
        std::ostringstream os;
        os << "Q[" << i + 1 << "][" << j + 1 << "] = " << q(i, j) << " is a negative off-diagonal rate";
        out.push_back(os.str());
      }
    }
    const double scale = std::max(1.0, q.row(i).cwiseAbs().maxCoeff());
    if (std::abs(q.row(i).sum()) > 1e-12 * scale) {
      std::ostringstream os;
      os << "Q row " << i + 1 << " sums to " << q.row(i).sum() << ", expected 0";
      out.push_back(os.str());
    }
  }
  if (out.empty() && !detail::strongly_connected(q)) out.push_back("chain not irreducible");
  return out;
}

/// Generator of an irreducible chain on {0, ..., d-1}. Rates are per year.
class RateMatrix {
 public:
  explicit RateMatrix(Matrix q) : q_(std::move(q)) {
    const auto problems = rate_matrix_violations(q_);
    if (!problems.empty()) {
      std::string msg = problems.front();
      for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
      fail(ErrorKind::Config, msg);
    }
  }

  int dim() const noexcept { return static_cast<int>(q_.rows()); }
  const Matrix& matrix() const noexcept { return q_; }
  double operator()(int i, int j) const { return q_(i, j); }

  /// Largest total exit rate max_i(-Q_ii).
  double max_exit_rate() const { return (-q_.diagonal()).maxCoeff(); }

 private:
  Matrix q_;
};

/// Unique invariant law nu with nu^T Q = 0 and 1^T nu = 1.
inline Vector stationary_distribution(const RateMatrix& q) {
  const int d = q.dim();
  Matrix a = q.matrix().transpose();
  a.row(d - 1).setOnes();
  Vector rhs = Vector::Zero(d);
  rhs(d - 1) = 1.0;
  Vector nu = a.fullPivLu().solve(rhs);
  nu = nu.cwiseMax(0.0);
  return nu / nu.sum();
}

/// exp(Q dt) by scaling and squaring of a truncated Taylor series.
inline Matrix transition_matrix(const RateMatrix& q, double dt) {
  if (!(dt >= 0.0)) fail(ErrorKind::Range, "transition_matrix: dt must be >= 0");
  const int d = q.dim();
  Matrix a = q.matrix() * dt;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  // Round-off can leave entries like -1e-17 where the exact value is 0.
  return result.cwiseMax(0.0);
}

/// Exact right-continuous path of the chain on [0, horizon].
struct ChainPath {
  std::vector<double> jump_times;  ///< jump_times[0] == 0, strictly increasing, all < horizon
  std::vector<int> states;         ///< states[k] holds on [jump_times[k], jump_times[k+1])
  double horizon = 0.0;

  std::size_t jumps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

/// State in force at time t; at a jump time this is the post-jump state.
inline int state_at(const ChainPath& path, double t) {
  if (!(t >= 0.0 && t <= path.horizon)) {
    std::ostringstream os;
    os << "state_at: t = " << t << " outside [0, " << path.horizon << "]";
    fail(ErrorKind::Range, os.str());
  }
  const auto it = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t);
  return path.states[static_cast<std::size_t>(it - path.jump_times.begin() - 1)];
}

/// Draws a state index from a probability vector.
inline int sample_state(const Vector& law, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * law.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < law.size(); ++i) {
    acc += law(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(law.size() - 1);
}

/// Gillespie simulation started from a fixed state.
inline ChainPath simulate_chain(const RateMatrix& q, int initial_state, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) fail(ErrorKind::Range, "simulate_chain: horizon must be > 0");
  if (initial_state < 0 || initial_state >= q.dim()) fail(ErrorKind::Range, "simulate_chain: initial state out of range");

  ChainPath path;
  path.horizon = horizon;
  path.jump_times.push_back(0.0);
  path.states.push_back(initial_state);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int state = initial_state;
  double t = 0.0;
  for (;;) {
    const double exit_rate = -q(state, state);
    if (exit_rate <= 0.0) break;
    t += std::exponential_distribution<double>(exit_rate)(rng);
    if (t >= horizon) break;

    const double u = unif(rng) * exit_rate;
    double acc = 0.0;
    int next = -1;
    for (int j = 0; j < q.dim(); ++j) {
      if (j == state) continue;
      acc += q(state, j);
      next = j;
      if (u < acc) break;
    }
    state = next;
    path.jump_times.push_back(t);
    path.states.push_back(state);
  }
  return path;
}

/// Gillespie simulation with Y_0 drawn from `initial_law`.
inline ChainPath simulate_chain(const RateMatrix& q, const Vector& initial_law, double horizon, Rng& rng) {
  if (initial_law.size() != q.dim()) fail(ErrorKind::Range, "simulate_chain: initial law has wrong dimension");
  const int start = sample_state(initial_law, rng);
  return simulate_chain(q, start, horizon, rng);
}

/// Unit vector e_i of length d.
inline Vector unit_vector(int d, int i) {
  Vector e = Vector::Zero(d);
  e(i) = 1.0;
  return e;
}

}  // namespace fbvol
