#ifndef LANEHMM_FILTER_HPP
#define LANEHMM_FILTER_HPP

// Forward filtering over the joint (lane, sensor state) belief.
//
// The belief is kept as an n x 2 matrix, column 0 = sensor OK, column 1 =
// sensor BAD, row i = lane i+1. Lane and sensor state evolve independently,
// so the joint prediction is L^T * P * S. Line evidence enters as virtual
// evidence: the tentative vector weights the detector-output CPT and the
// reliability vector weights the WOR CPT.

#include <Eigen/Core>

#include <functional>
#include <optional>

#include "lanehmm/error.hpp"
#include "lanehmm/model.hpp"

namespace lanehmm {

template <typename Scalar = double>
using JointBelief = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

struct FrameEstimate {
  int map_lane = 1;  // 1-based
  double map_lane_prob = 0.0;
  Eigen::VectorXd lane_marginal;
  double sensor_ok_prob = 0.0;
};

template <typename Scalar = double>
JointBelief<Scalar> init_belief(int n, const std::optional<LaneVector<Scalar>>& prior = std::nullopt) {
  if (n < 1) throw ParameterError("init_belief: lane count must be >= 1");
  LaneVector<Scalar> lanes = LaneVector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  if (prior) {
    if (prior->size() != n) throw ParameterError("init_belief: prior has wrong length");
    if ((prior->array() < 0).any() || !prior->allFinite())
      throw ParameterError("init_belief: prior has negative or non-finite entries");
    using std::abs;
    if (abs(prior->sum() - Scalar(1)) > Scalar(1e-12))
      throw ParameterError("init_belief: prior does not sum to 1");
    lanes = *prior;
  }
  JointBelief<Scalar> belief(n, 2);
  belief.col(kSensorOk) = lanes / Scalar(2);
  belief.col(kSensorBad) = lanes / Scalar(2);
  return belief;
}

/// One-step prediction through the lane and sensor-state CPTs.
template <typename Scalar>
JointBelief<Scalar> predict(const JointBelief<Scalar>& belief, const LaneCpt<Scalar>& lane_cpt,
                            const SensorCpt<Scalar>& sensor_cpt) {
  if (lane_cpt.rows() != belief.rows() || lane_cpt.cols() != belief.rows())
    throw ParameterError("predict: lane CPT does not match belief size");
  return lane_cpt.transpose() * belief * sensor_cpt;
}

/// Soft-evidence likelihood of every (lane, sensor state) cell.
template <typename Scalar>
JointBelief<Scalar> evidence_likelihood(const LaneVector<Scalar>& tentative,
                                        const Eigen::Matrix<Scalar, 2, 1>& wor,
                                        const DetectorCpt<Scalar>& det_cpt,
                                        const WorCpt<Scalar>& wor_cpt) {
  const Eigen::Index n = det_cpt.lanes();
  if (tentative.size() != n) throw ParameterError("update: tentative vector has wrong length");
  if ((tentative.array() < 0).any() || (wor.array() < 0).any())
    throw ParameterError("update: evidence must be non-negative");

  JointBelief<Scalar> lik(n, 2);
  // CPT rows are stochastic, so constant evidence gives a constant
  // likelihood; it is set exactly to avoid rounding noise.
  if (tentative.maxCoeff() == tentative.minCoeff()) {
    lik.setOnes();
  } else {
    // Normalizing first makes any exactly representable rescaling of the
    // counts produce bit-identical likelihoods.
    const LaneVector<Scalar> t = tentative / tentative.sum();
    lik.col(kSensorOk) = det_cpt.ok() * t;
    lik.col(kSensorBad) = det_cpt.bad() * t;
  }
  if (wor(0) != wor(1)) {
    const Eigen::Matrix<Scalar, 2, 1> sensor_lik = wor_cpt * wor;
    lik.col(kSensorOk) *= sensor_lik(0);
    lik.col(kSensorBad) *= sensor_lik(1);
  }
  return lik;
}

/// Bayes update with the tentative vector (any non-negative scale) and the
/// WOR vector as virtual evidence.
template <typename Scalar>
JointBelief<Scalar> update(const JointBelief<Scalar>& belief, const LaneVector<Scalar>& tentative,
                           const Eigen::Matrix<Scalar, 2, 1>& wor, const DetectorCpt<Scalar>& det_cpt,
                           const WorCpt<Scalar>& wor_cpt) {
  if (det_cpt.lanes() != belief.rows()) throw ParameterError("update: detector CPT does not match belief size");
  const JointBelief<Scalar> posterior =
      belief.cwiseProduct(evidence_likelihood(tentative, wor, det_cpt, wor_cpt));
  const Scalar total = posterior.sum();
  if (!(total > 0)) throw Error("update: evidence has zero likelihood under every state");
  return posterior / total;
}

template <typename Scalar>
FrameEstimate map_lane(const JointBelief<Scalar>& belief) {
  FrameEstimate est;
  est.lane_marginal = belief.rowwise().sum().template cast<double>();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < est.lane_marginal.size(); ++i)
    if (est.lane_marginal(i) > est.lane_marginal(best)) best = i;
  est.map_lane = static_cast<int>(best) + 1;
  est.map_lane_prob = est.lane_marginal(best);
  est.sensor_ok_prob = static_cast<double>(belief.col(kSensorOk).sum());
  return est;
}

template <typename Scalar = double>
struct FilterTrace {
  long long step = 0;
  JointBelief<Scalar> predicted;
  JointBelief<Scalar> likelihood;
  JointBelief<Scalar> posterior;
};

/// Incremental filter: predict -> update -> MAP per frame.
template <typename Scalar = double>
class LaneFilter {
 public:
  using TraceSink = std::function<void(const FilterTrace<Scalar>&)>;

  explicit LaneFilter(const HmmParams& params, const std::optional<LaneVector<Scalar>>& prior = std::nullopt)
      : tables_(params), belief_(init_belief<Scalar>(params.n, prior)) {}

  FrameEstimate step(const LaneVector<Scalar>& tentative, const Eigen::Matrix<Scalar, 2, 1>& wor) {
    const JointBelief<Scalar> predicted = predict<Scalar>(belief_, tables_.lane, tables_.sensor);
    belief_ = update<Scalar>(predicted, tentative, wor, tables_.detector, tables_.wor);
    if (trace_) {
      trace_({steps_, predicted, evidence_likelihood<Scalar>(tentative, wor, tables_.detector, tables_.wor),
              belief_});
    }
    ++steps_;
    return map_lane(belief_);
  }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }

  const JointBelief<Scalar>& belief() const { return belief_; }
  const ModelTables<Scalar>& tables() const { return tables_; }
  long long steps() const { return steps_; }

 private:
  ModelTables<Scalar> tables_;
  JointBelief<Scalar> belief_;
  long long steps_ = 0;
  TraceSink trace_;
};

}  // namespace lanehmm

#endif  // LANEHMM_FILTER_HPP
