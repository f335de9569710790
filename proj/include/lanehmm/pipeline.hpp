#ifndef LANEHMM_PIPELINE_HPP
#define LANEHMM_PIPELINE_HPP

// Glue between the detector log, the inverse sensor model, the filter and
// the evaluation. Tracking (LRI / isValid) does not depend on the HMM
// parameters, so it is done once per sequence in prepare_sequence and shared
// by every candidate the tuner evaluates.

#include <functional>
#include <span>
#include <vector>

#include "lanehmm/dataset.hpp"
#include "lanehmm/evaluation.hpp"
#include "lanehmm/filter.hpp"
#include "lanehmm/inverse_sensor.hpp"

namespace lanehmm {

struct PrepareOptions {
  // Use lri/valid fields from the log when present instead of recomputing.
  bool use_logged_lri = false;
};

struct PreparedSequence {
  SequenceHeader header;
  std::vector<long long> frame_ids;
  std::vector<std::vector<TrackedLine>> lines;  // sorted by offset
  std::vector<GroundTruth> truth;

  std::size_t size() const { return frame_ids.size(); }
};

PreparedSequence prepare_sequence(const Sequence& sequence, const RuntimeConfig& cfg,
                                  PrepareOptions options = {});

/// Frames [begin, end) of a prepared sequence.
PreparedSequence slice(const PreparedSequence& sequence, std::size_t begin, std::size_t end);

struct PipelineRun {
  std::vector<ResultRecord> results;
  std::vector<LaneEstimate> model;
  std::vector<LaneEstimate> baseline;
};

struct PipelineOptions {
  std::optional<Eigen::VectorXd> prior;
  LaneFilter<double>::TraceSink trace;
  bool keep_results = true;  // the tuner only needs the estimates
};

/// Runs inverse sensor model + filter + detector baseline over a sequence.
/// params.n must match the sequence header.
PipelineRun run_pipeline(const PreparedSequence& sequence, const HmmParams& params, const RuntimeConfig& cfg,
                         const PipelineOptions& options = {});

}  // namespace lanehmm

#endif  // LANEHMM_PIPELINE_HPP
