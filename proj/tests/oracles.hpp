#ifndef LANEHMM_TESTS_ORACLES_HPP
#define LANEHMM_TESTS_ORACLES_HPP
// Independent reference computations used by the tests. Nothing here calls
// into the library's inference code.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace oracle {

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Trapezoid rule over [i - 0.5, i + 0.5] per lane, then normalized.
inline std::vector<double> discretize_trapezoid(double mu, double sigma, int n, double step = 1e-4) {
  std::vector<double> out(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double a = i - 0.5, b = i + 0.5;
    const auto k = static_cast<long>(std::llround((b - a) / step));
    const double h = (b - a) / static_cast<double>(k);
    double s = 0.5 * (normal_pdf(a, mu, sigma) + normal_pdf(b, mu, sigma));
    for (long j = 1; j < k; ++j) s += normal_pdf(a + static_cast<double>(j) * h, mu, sigma);
    out[static_cast<std::size_t>(i - 1)] = s * h;
    total += s * h;
  }
  for (auto& v : out) v /= total;
  return out;
}

/// Joint-state model written out cell by cell. State index = lane * 2 + s,
/// s = 0 (OK) or 1 (BAD).
struct JointModel {
  int n = 0;
  Eigen::MatrixXd lane;      // n x n
  Eigen::Matrix2d sensor;    // 2 x 2
  Eigen::MatrixXd det_ok;    // n x n
  Eigen::MatrixXd det_bad;   // n x n
  Eigen::Matrix2d wor;       // 2 x 2

  int states() const { return 2 * n; }

  double transition(int from, int to) const {
    return lane(from / 2, to / 2) * sensor(from % 2, to % 2);
  }

  double likelihood(int state, const Eigen::VectorXd& tentative, const Eigen::Vector2d& w) const {
    const int l = state / 2, s = state % 2;
    // No counters at all is no lane evidence.
    double det = tentative.isZero(0.0) ? 1.0 : 0.0;
    for (int j = 0; j < n; ++j) det += (s == 0 ? det_ok(l, j) : det_bad(l, j)) * tentative(j);
    const double rel = wor(s, 0) * w(0) + wor(s, 1) * w(1);
    return det * rel;
  }
};

/// Filtered posterior at every depth t = 1..T by summing over every state
/// trajectory. The initial joint belief is uniform; each frame is a
/// transition followed by an observation. Returns T rows of 2n entries.
inline std::vector<Eigen::VectorXd> enumerate_posteriors(const JointModel& m,
                                                         const std::vector<Eigen::VectorXd>& tentative,
                                                         const std::vector<Eigen::Vector2d>& wor) {
  const int S = m.states();
  const std::size_t T = tentative.size();
  std::vector<Eigen::VectorXd> acc(T, Eigen::VectorXd::Zero(S));

  // lik[t][s] precomputed; the trajectory weight is built multiplicatively.
  std::vector<std::vector<double>> lik(T, std::vector<double>(static_cast<std::size_t>(S)));
  for (std::size_t t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) lik[t][static_cast<std::size_t>(s)] = m.likelihood(s, tentative[t], wor[t]);

  // Depth 1 prior: sum over the initial state.
  std::vector<double> first(static_cast<std::size_t>(S), 0.0);
  for (int x1 = 0; x1 < S; ++x1)
    for (int x0 = 0; x0 < S; ++x0) first[static_cast<std::size_t>(x1)] += m.transition(x0, x1) / S;

  std::vector<int> path(T);
  std::vector<double> weight(T);
  // Iterative DFS over x_1..x_T.
  std::size_t depth = 0;
  path[0] = -1;
  while (true) {
    if (++path[depth] >= S) {
      if (depth == 0) break;
      --depth;
      continue;
    }
    const auto s = static_cast<std::size_t>(path[depth]);
    const double prior = depth == 0 ? first[s] : weight[depth - 1] * m.transition(path[depth - 1], path[depth]);
    weight[depth] = prior * lik[depth][s];
    acc[depth](path[depth]) += weight[depth];
    if (depth + 1 < T) {
      ++depth;
      path[depth] = -1;
    }
  }
  for (auto& a : acc) a /= a.sum();
  return acc;
}

/// Straightforward two-threshold valid flag: on at count >= hi, off at
/// count < lo, otherwise unchanged.
struct HysteresisReference {
  int window;
  double lo;
  std::vector<bool> history;
  bool valid = false;

  bool push(bool detected) {
    history.push_back(detected);
    int count = 0;
    const std::size_t start = history.size() > static_cast<std::size_t>(window) ? history.size() - window : 0;
    for (std::size_t i = start; i < history.size(); ++i) count += history[i] ? 1 : 0;
    if (count >= window) valid = true;
    else if (count < lo) valid = false;
    return valid;
  }
};

}  // namespace oracle

#endif  // LANEHMM_TESTS_ORACLES_HPP
