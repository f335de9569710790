#ifndef LANEHMM_EVALUATION_HPP
#define LANEHMM_EVALUATION_HPP

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lanehmm/dataset.hpp"
#include "lanehmm/inverse_sensor.hpp"

namespace lanehmm {

/// Lane assigned to one frame; nullopt means no assignment.
struct LaneEstimate {
  long long frame_id = 0;
  std::optional<int> lane;
};

struct GroundTruth {
  long long frame_id = 0;
  std::optional<int> gt_lane;
  bool crossing = false;
};

std::vector<GroundTruth> ground_truth(std::span<const FrameRecord> frames);

/// Counts indexed (estimate, gt). Rows 0..n-1 are lanes 1..n, row n is
/// "no assignment"; columns are GT lanes.
struct ConfusionMatrix {
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;

  long long total() const { return counts.sum(); }
  int lanes() const { return static_cast<int>(counts.cols()); }
};

/// counts[d] for |estimate - gt| == d (d = 0..n-1), then one trailing slot
/// for no assignment.
struct CategoryHistogram {
  std::vector<long long> counts;

  long long correct() const { return counts.front(); }
  long long no_assignment() const { return counts.back(); }
  long long total() const;
};

CategoryHistogram categories_from_confusion(const ConfusionMatrix& confusion);

struct Metrics {
  ConfusionMatrix confusion;
  CategoryHistogram categories;
  double accuracy = 0.0;
  long long evaluated = 0;
  long long skipped_crossing = 0;
  long long missing_gt = 0;
};

/// Baseline decision from the raw counters: argmax, or no assignment when
/// all counters are zero or the maximum is shared.
std::optional<int> baseline_lane(const TentativeVector& tentative);

/// Detector-only estimate for every frame.
std::vector<LaneEstimate> detector_baseline(std::span<const long long> frame_ids,
                                            std::span<const std::vector<TrackedLine>> frames,
                                            const HmmParams& params, const RuntimeConfig& cfg);

/// Scores estimates against ground truth, matching frames by frame_id.
/// Crossing frames and frames without GT are skipped. Throws ConfigError
/// when the two streams do not cover the same frame ids.
Metrics evaluate(std::span<const LaneEstimate> estimates, std::span<const GroundTruth> truth, int n);

nlohmann::json to_json(const Metrics& metrics);
Metrics metrics_from_json(const nlohmann::json& j);

struct TimelineRow {
  long long frame_id = 0;
  std::optional<int> gt_lane;
  bool crossing = false;
  std::optional<int> baseline;
  std::optional<int> model;
};

struct ComparisonReport {
  Metrics model;
  Metrics baseline;
  double accuracy_delta = 0.0;              // model - baseline
  std::vector<long long> category_deltas;   // model - baseline, per category
  std::vector<TimelineRow> timeline;

  nlohmann::json to_json() const;
  static ComparisonReport from_json(const nlohmann::json& j);
  /// Human-readable summary.
  std::string render() const;
  /// Tab-separated per-frame table: frame, gt, crossing, baseline, model.
  std::string timeline_tsv() const;
};

ComparisonReport compare(const Metrics& model, const Metrics& baseline,
                         std::span<const LaneEstimate> model_estimates = {},
                         std::span<const LaneEstimate> baseline_estimates = {},
                         std::span<const GroundTruth> truth = {});

}  // namespace lanehmm

#endif  // LANEHMM_EVALUATION_HPP
