#ifndef LANEHMM_SIMULATOR_HPP
#define LANEHMM_SIMULATOR_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lanehmm/dataset.hpp"

namespace lanehmm {

enum class FailureMode {
  kMarkov,         // OK->BAD with fail_prob, BAD->OK with recover_prob, per frame
  kFixedDuration,  // OK->BAD with fail_prob, BAD lasts exactly bad_duration_frames
};

struct SimConfig {
  int n_lanes = 3;
  double lane_width_m = 3.5;
  double fps = 10.0;
  long long duration_frames = 1000;
  double lane_change_prob_per_frame = 0.01;
  int lane_change_duration_frames = 20;
  int lane_change_cooldown_frames = 0;  // minimum frames between two changes
  double fail_prob = 0.05;
  double recover_prob = 0.2;
  FailureMode failure_mode = FailureMode::kMarkov;
  int bad_duration_frames = 10;  // kFixedDuration only
  double detect_prob_ok = 0.8;
  double detect_prob_bad = 0.1;
  double offset_noise_sd_m = 0.3;
  // An undetected line is still reported, at its last measured offset, for
  // this many frames after its last detection (a tracker coasting).
  int coast_frames = 10;
  int initial_lane = 0;  // 0 = drawn uniformly
  bool emit_gnss = false;
  GeoPoint gnss_origin{45.0, 9.0};
  double speed_mps = 30.0;  // northbound, only used for GNSS
  std::uint64_t seed = 42;

  void validate() const;
};

struct SimTruth {
  std::vector<int> gt_lane;
  std::vector<bool> crossing;
  std::vector<int> sensor_state;  // kSensorOk / kSensorBad
  std::vector<double> lateral_position;  // lane-index units
};

struct Simulation {
  SequenceHeader header;
  std::vector<FrameRecord> frames;
  SimTruth truth;
};

/// Deterministic given config.seed.
Simulation simulate(const SimConfig& config);

enum class BurstMode { kDropout, kClutter };

/// Overwrites frames [start, start + length): dropout clears every line,
/// clutter adds one spurious dashed line per frame (persistent track id
/// "clutter") at an offset uniform in +-clutter_half_range_m.
std::vector<FrameRecord> inject_burst(std::vector<FrameRecord> frames, std::size_t start, std::size_t length,
                                      BurstMode mode, std::uint64_t seed = 0,
                                      double clutter_half_range_m = 10.0);

/// Key-value config (same syntax as parameter files). Keys mirror the
/// SimConfig field names; failure_mode is "markov" or "fixed".
SimConfig parse_sim_config(std::istream& in, const std::string& source_name = "<sim-config>");
SimConfig load_sim_config(const std::filesystem::path& path);
std::string format_sim_config(const SimConfig& config);

}  // namespace lanehmm

#endif  // LANEHMM_SIMULATOR_HPP
