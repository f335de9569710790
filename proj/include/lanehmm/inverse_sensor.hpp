#ifndef LANEHMM_INVERSE_SENSOR_HPP
#define LANEHMM_INVERSE_SENSOR_HPP

#include <Eigen/Core>

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanehmm/model.hpp"

namespace lanehmm {

/// One road line reported by the upstream detector in one frame.
/// offset is the signed lateral distance in meters, negative on the left.
struct RawLineObservation {
  std::string track_id;
  double offset = 0.0;
  bool continuous = false;
  bool detected = true;
};

struct TrackedLine {
  std::string track_id;
  double offset = 0.0;
  bool continuous = false;
  int lri = 0;  // detections within the last lri_window frames
  bool is_valid = false;
};

/// Per-lane plausibility counters for one frame (index 0 = lane 1).
using TentativeVector = Eigen::VectorXd;

/// (belief the detector is OK, belief it is BAD); sums to one.
using WorEvidence = Eigen::Vector2d;

/// Line Reliability Index bookkeeping with isValid hysteresis.
///
/// Each track keeps the detection flags of its last `lri_window` frames. A
/// track that is absent from a frame counts as a miss. The valid flag is set
/// when the count reaches the window size and cleared only once the count
/// drops below `hysteresis_fraction * lri_window`.
///
/// One instance per sequence; not thread-safe.
class LriTracker {
 public:
  explicit LriTracker(const RuntimeConfig& cfg);

  /// Advances one frame. Returns one TrackedLine per input line, in input
  /// order. Throws ParameterError on duplicate track ids within the frame.
  std::vector<TrackedLine> update(std::span<const RawLineObservation> frame);

  void reset() { tracks_.clear(); }
  std::size_t active_tracks() const { return tracks_.size(); }

 private:
  struct Track {
    std::deque<bool> history;
    int count = 0;
    bool valid = false;
  };

  void push(Track& track, bool detected) const;

  RuntimeConfig cfg_;
  std::map<std::string, Track> tracks_;
};

/// Lateral offsets of the n+1 boundary lines (leftmost first) seen from the
/// center of `lane` (1-based).
std::vector<double> expected_boundary_offsets(int lane, int n, double lane_width);

/// True when `offset` lies within compat_tolerance of one of the boundaries
/// expected from the center of `lane`.
bool line_compatible(double offset, int lane, int n, const RuntimeConfig& cfg);

/// Lane implied by a continuous line, read as the outermost boundary on its
/// side. Empty for a zero offset.
std::optional<int> implied_lane_from_continuous(double offset, int n, const RuntimeConfig& cfg);

/// Sorts lines by offset (ascending) in place.
void sort_by_offset(std::vector<TrackedLine>& lines);

/// Counter vector: +1 for each lane compatible with a valid line, plus the
/// bonus value on the lane implied by a valid continuous line.
TentativeVector build_tentative(std::span<const TrackedLine> lines, const HmmParams& params,
                                const RuntimeConfig& cfg);

/// Whole-output reliability: pooled LRI over the lri budget of n+1 lines.
WorEvidence compute_wor(std::span<const TrackedLine> lines, int n, const RuntimeConfig& cfg);

/// Counters divided by their sum; uniform when all are zero.
Eigen::VectorXd normalize_tentative(const TentativeVector& tentative);

/// Both soft-evidence vectors for one frame.
struct FrameEvidence {
  TentativeVector tentative;  // raw counters
  WorEvidence wor;
};

FrameEvidence make_evidence(std::span<const TrackedLine> lines, const HmmParams& params,
                            const RuntimeConfig& cfg);

}  // namespace lanehmm

#endif  // LANEHMM_INVERSE_SENSOR_HPP
