#ifndef LANEHMM_MODEL_HPP
#define LANEHMM_MODEL_HPP

// Parameterization of the lane / sensor-state HMM and construction of its
// four conditional probability tables. Everything in here is a pure function
// of its arguments; the resulting tables are immutable values that may be
// shared across threads.

#include <Eigen/Core>

#include <cmath>

#include "lanehmm/error.hpp"

namespace lanehmm {

/// Model parameters: lane count, lane-change and detector spreads (in
/// lane-index units), the sensor-state and reliability-observation
/// probabilities, and the bonus weight of continuous lines.
struct HmmParams {
  int n = 3;
  double sigma1 = 0.4;  // lane transition spread
  double sigma2 = 0.5;  // detector accuracy when the sensor is OK
  double p1 = 0.9;      // P(OK -> OK)
  double p2 = 0.9;      // P(BAD -> BAD)
  double p3 = 0.7;      // P(reliability reads OK | OK)
  double p4 = 0.7;      // P(reliability reads BAD | BAD)
  double bv = 5.0;

  void validate() const;

  friend bool operator==(const HmmParams&, const HmmParams&) = default;
};

/// Geometry and line-tracking thresholds used by the inverse sensor model.
struct RuntimeConfig {
  double lane_width = 3.5;        // meters
  double compat_tolerance = 0.6;  // meters
  int lri_window = 10;            // frames
  double hysteresis_fraction = 0.5;

  void validate() const;

  friend bool operator==(const RuntimeConfig&, const RuntimeConfig&) = default;
};

template <typename Scalar = double>
using LaneVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
using LaneMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows: sensor state at t (OK, BAD); columns: state at t+1.
template <typename Scalar = double>
using SensorCpt = Eigen::Matrix<Scalar, 2, 2>;

/// Rows: sensor state (OK, BAD); columns: observed reliability (OK, BAD).
template <typename Scalar = double>
using WorCpt = Eigen::Matrix<Scalar, 2, 2>;

/// Row i: distribution of the lane at t+1 given lane i+1 at t.
template <typename Scalar = double>
using LaneCpt = LaneMatrix<Scalar>;

/// Distribution of the detector's lane output given (sensor state, lane).
/// Rows [0, n) hold the OK block, rows [n, 2n) the BAD block.
template <typename Scalar = double>
struct DetectorCpt {
  LaneMatrix<Scalar> table;

  Eigen::Index lanes() const { return table.cols(); }
  auto ok() const { return table.topRows(lanes()); }
  auto bad() const { return table.bottomRows(lanes()); }
};

enum SensorState : int { kSensorOk = 0, kSensorBad = 1 };

namespace detail {

// Probability mass of the standard normal on [lo, hi]. Tails go through
// erfc so that far-away lanes keep their (tiny) mass instead of cancelling
// to zero. The formula is mirror-symmetric: mass(-hi, -lo) == mass(lo, hi)
// bit for bit.
template <typename Scalar>
Scalar standard_normal_mass(Scalar lo, Scalar hi) {
  using std::erfc;
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  if (lo >= 0) return (erfc(lo * r) - erfc(hi * r)) / 2;
  if (hi <= 0) return (erfc(-hi * r) - erfc(-lo * r)) / 2;
  return Scalar(1) - (erfc(-lo * r) / 2 + erfc(hi * r) / 2);
}

// Sum paired from both ends, so that reversing v leaves the result unchanged.
template <typename Derived>
typename Derived::Scalar symmetric_sum(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = v.size();
  Scalar total(0);
  for (Eigen::Index i = 0; i < n / 2; ++i) total += v(i) + v(n - 1 - i);
  if (n % 2 == 1) total += v(n / 2);
  return total;
}

}  // namespace detail

/// Discretizes N(mu, sigma^2) over the lane intervals [i - 0.5, i + 0.5],
/// i = 1..n, and renormalizes over the finite roadway. mu is a lane index
/// (lane centers are integers, lane 1 is the leftmost lane).
template <typename Scalar = double>
LaneVector<Scalar> discretize_normal(Scalar mu, Scalar sigma, int n) {
  if (n < 1) throw ParameterError("discretize_normal: lane count must be >= 1");
  if (!(sigma > 0) || !std::isfinite(static_cast<double>(sigma)))
    throw ParameterError("discretize_normal: sigma must be positive and finite");
  if (!(mu >= 1 && mu <= n))
    throw ParameterError("discretize_normal: mean must lie within [1, n]");

  LaneVector<Scalar> out(n);
  for (int i = 0; i < n; ++i) {
    const Scalar d = Scalar(i + 1) - mu;
    out(i) = detail::standard_normal_mass<Scalar>((d - Scalar(0.5)) / sigma,
                                                  (d + Scalar(0.5)) / sigma);
  }
  const Scalar total = detail::symmetric_sum(out);
  // The density is strictly positive; the center lane never underflows.
  return out / total;
}

template <typename Scalar = double>
LaneCpt<Scalar> build_lane_cpt(const HmmParams& params) {
  params.validate();
  LaneCpt<Scalar> cpt(params.n, params.n);
  for (int i = 0; i < params.n; ++i)
    cpt.row(i) = discretize_normal<Scalar>(Scalar(i + 1), Scalar(params.sigma1), params.n).transpose();
  return cpt;
}

template <typename Scalar = double>
SensorCpt<Scalar> build_sensor_cpt(const HmmParams& params) {
  params.validate();
  SensorCpt<Scalar> cpt;
  cpt << Scalar(params.p1), Scalar(1) - Scalar(params.p1),
         Scalar(1) - Scalar(params.p2), Scalar(params.p2);
  return cpt;
}

template <typename Scalar = double>
DetectorCpt<Scalar> build_detector_cpt(const HmmParams& params) {
  params.validate();
  const int n = params.n;
  DetectorCpt<Scalar> cpt{LaneMatrix<Scalar>(2 * n, n)};
  for (int i = 0; i < n; ++i)
    cpt.table.row(i) = discretize_normal<Scalar>(Scalar(i + 1), Scalar(params.sigma2), n).transpose();
  cpt.table.bottomRows(n).setConstant(Scalar(1) / Scalar(n));
  return cpt;
}

template <typename Scalar = double>
WorCpt<Scalar> build_wor_cpt(const HmmParams& params) {
  params.validate();
  WorCpt<Scalar> cpt;
  cpt << Scalar(params.p3), Scalar(1) - Scalar(params.p3),
         Scalar(1) - Scalar(params.p4), Scalar(params.p4);
  return cpt;
}

/// All four tables for one parameterization.
template <typename Scalar = double>
struct ModelTables {
  LaneCpt<Scalar> lane;
  SensorCpt<Scalar> sensor;
  DetectorCpt<Scalar> detector;
  WorCpt<Scalar> wor;

  explicit ModelTables(const HmmParams& params)
      : lane(build_lane_cpt<Scalar>(params)),
        sensor(build_sensor_cpt<Scalar>(params)),
        detector(build_detector_cpt<Scalar>(params)),
        wor(build_wor_cpt<Scalar>(params)) {}

  int lanes() const { return static_cast<int>(lane.rows()); }
};

}  // namespace lanehmm

#endif  // LANEHMM_MODEL_HPP
