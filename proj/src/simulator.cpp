#include "lanehmm/simulator.hpp"

#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

#include "lanehmm/error.hpp"
#include "lanehmm/model.hpp"
#include "lanehmm/params_io.hpp"
#include "lanehmm/random.hpp"

namespace lanehmm {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError("SimConfig: " + what);
}

}  // namespace

void SimConfig::validate() const {
  require(n_lanes >= 1, "n_lanes must be >= 1");
  require(lane_width_m > 0.0, "lane_width_m must be positive");
  require((n_lanes + 1) * lane_width_m < 45.0, "roadway too wide for the +-50 m offset bound");
  require(fps > 0.0, "fps must be positive");
  require(duration_frames >= 1, "duration_frames must be >= 1");
  require(lane_change_prob_per_frame >= 0.0 && lane_change_prob_per_frame < 1.0,
          "lane_change_prob_per_frame must lie in [0, 1)");
  require(lane_change_duration_frames >= 1, "lane_change_duration_frames must be >= 1");
  require(lane_change_cooldown_frames >= 0, "lane_change_cooldown_frames must be >= 0");
  require(fail_prob >= 0.0 && fail_prob < 1.0, "fail_prob must lie in [0, 1)");
  require(recover_prob > 0.0 && recover_prob <= 1.0, "recover_prob must lie in (0, 1]");
  require(bad_duration_frames >= 1, "bad_duration_frames must be >= 1");
  require(detect_prob_ok > 0.0 && detect_prob_ok <= 1.0, "detect_prob_ok must lie in (0, 1]");
  require(detect_prob_bad >= 0.0 && detect_prob_bad < 1.0, "detect_prob_bad must lie in [0, 1)");
  require(offset_noise_sd_m >= 0.0, "offset_noise_sd_m must be >= 0");
  require(coast_frames >= 0, "coast_frames must be >= 0");
  require(initial_lane >= 0 && initial_lane <= n_lanes, "initial_lane must be 0 or a lane index");
}

Simulation simulate(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.n_lanes;
  const double w = config.lane_width_m;
  const int duration = config.lane_change_duration_frames;

  Simulation sim;
  sim.header = {n, w, config.fps, "simulated seed=" + std::to_string(config.seed)};
  const auto frames = static_cast<std::size_t>(config.duration_frames);
  sim.frames.reserve(frames);
  sim.truth.gt_lane.reserve(frames);

  int lane = config.initial_lane > 0 ? config.initial_lane : static_cast<int>(rng.uniform_int(1, n));
  int change_from = lane, change_to = lane, change_step = -1;  // -1: not changing
  int cooldown = 0;
  int sensor = kSensorOk;
  int bad_left = 0;

  std::vector<double> last_offset(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<long long> last_seen(static_cast<std::size_t>(n) + 1, -1);

  for (long long f = 0; f < config.duration_frames; ++f) {
    if (f > 0) {
      if (sensor == kSensorOk) {
        if (rng.bernoulli(config.fail_prob)) {
          sensor = kSensorBad;
          bad_left = config.bad_duration_frames;
        }
      } else if (config.failure_mode == FailureMode::kMarkov) {
        if (rng.bernoulli(config.recover_prob)) sensor = kSensorOk;
      } else if (--bad_left <= 0) {
        sensor = kSensorOk;
      }
    }

    if (change_step < 0) {
      if (cooldown > 0) {
        --cooldown;
      } else if (n > 1 && rng.bernoulli(config.lane_change_prob_per_frame)) {
        int dir = lane == 1 ? 1 : lane == n ? -1 : (rng.bernoulli(0.5) ? 1 : -1);
        change_from = lane;
        change_to = lane + dir;
        change_step = 0;
      }
    }
    double pos = lane;
    bool crossing = false;
    if (change_step >= 0) {
      crossing = true;
      ++change_step;
      pos = change_from + (change_to - change_from) * static_cast<double>(change_step) / duration;
      if (change_step == duration) {
        lane = change_to;
        change_step = -1;
        cooldown = config.lane_change_cooldown_frames;
      }
    }
    const int gt = std::clamp(static_cast<int>(std::floor(pos + 0.5)), 1, n);

    FrameRecord frame;
    frame.frame_id = f;
    frame.timestamp_s = static_cast<double>(f) / config.fps;
    frame.gt_lane = gt;
    frame.crossing = crossing;
    const double detect_p = sensor == kSensorOk ? config.detect_prob_ok : config.detect_prob_bad;
    for (int j = 0; j <= n; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double truth = (j + 0.5 - pos) * w;
      LineRecord line;
      line.track_id = "B" + std::to_string(j);
      line.continuous = (j == 0 || j == n);
      if (rng.bernoulli(detect_p)) {
        line.offset_m = truth + config.offset_noise_sd_m * rng.normal();
        line.detected = true;
        last_offset[jj] = line.offset_m;
        last_seen[jj] = f;
      } else if (last_seen[jj] >= 0 && f - last_seen[jj] <= config.coast_frames) {
        line.offset_m = last_offset[jj];
        line.detected = false;
      } else {
        continue;
      }
      frame.lines.push_back(std::move(line));
    }
    if (config.emit_gnss) {
      const double north_m = config.speed_mps * frame.timestamp_s;
      frame.gnss = GeoPoint{config.gnss_origin.lat + north_m / 111195.0, config.gnss_origin.lon};
    }

    sim.frames.push_back(std::move(frame));
    sim.truth.gt_lane.push_back(gt);
    sim.truth.crossing.push_back(crossing);
    sim.truth.sensor_state.push_back(sensor);
    sim.truth.lateral_position.push_back(pos);
  }
  return sim;
}

std::vector<FrameRecord> inject_burst(std::vector<FrameRecord> frames, std::size_t start, std::size_t length,
                                      BurstMode mode, std::uint64_t seed, double clutter_half_range_m) {
  if (!(clutter_half_range_m > 0.0 && clutter_half_range_m < 50.0))
    throw ParameterError("inject_burst: clutter range must lie in (0, 50) m");
  Rng rng(seed);
  const std::size_t end = std::min(frames.size(), start + length);
  for (std::size_t i = start; i < end; ++i) {
    auto& lines = frames[i].lines;
    if (mode == BurstMode::kDropout) {
      lines.clear();
      continue;
    }
    std::erase_if(lines, [](const LineRecord& l) { return l.track_id == "clutter"; });
    lines.push_back({"clutter", rng.uniform(-clutter_half_range_m, clutter_half_range_m), false, true, {}, {}});
  }
  return frames;
}

SimConfig parse_sim_config(std::istream& in, const std::string& source_name) {
  const auto kv = parse_key_values(in, source_name);
  SimConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "n_lanes") c.n_lanes = static_cast<int>(parse_int(value));
      else if (key == "lane_width_m") c.lane_width_m = parse_double(value);
      else if (key == "fps") c.fps = parse_double(value);
      else if (key == "duration_frames") c.duration_frames = parse_int(value);
      else if (key == "lane_change_prob_per_frame") c.lane_change_prob_per_frame = parse_double(value);
      else if (key == "lane_change_duration_frames") c.lane_change_duration_frames = static_cast<int>(parse_int(value));
      else if (key == "lane_change_cooldown_frames") c.lane_change_cooldown_frames = static_cast<int>(parse_int(value));
      else if (key == "fail_prob") c.fail_prob = parse_double(value);
      else if (key == "recover_prob") c.recover_prob = parse_double(value);
      else if (key == "failure_mode") {
        if (value == "markov") c.failure_mode = FailureMode::kMarkov;
        else if (value == "fixed") c.failure_mode = FailureMode::kFixedDuration;
        else throw std::invalid_argument("expected markov or fixed");
      } else if (key == "bad_duration_frames") c.bad_duration_frames = static_cast<int>(parse_int(value));
      else if (key == "detect_prob_ok") c.detect_prob_ok = parse_double(value);
      else if (key == "detect_prob_bad") c.detect_prob_bad = parse_double(value);
      else if (key == "offset_noise_sd_m") c.offset_noise_sd_m = parse_double(value);
      else if (key == "coast_frames") c.coast_frames = static_cast<int>(parse_int(value));
      else if (key == "initial_lane") c.initial_lane = static_cast<int>(parse_int(value));
      else if (key == "emit_gnss") c.emit_gnss = parse_int(value) != 0;
      else if (key == "gnss_origin_lat") c.gnss_origin.lat = parse_double(value);
      else if (key == "gnss_origin_lon") c.gnss_origin.lon = parse_double(value);
      else if (key == "speed_mps") c.speed_mps = parse_double(value);
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value));
      else throw ParseError(source_name + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ParseError(source_name + ": bad value '" + value + "' for '" + key + "'");
    }
  }
  c.validate();
  return c;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open simulator config " + path.string());
  return parse_sim_config(in, path.string());
}

std::string format_sim_config(const SimConfig& c) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "n_lanes=" << c.n_lanes << '\n'
      << "lane_width_m=" << format_double(c.lane_width_m) << '\n'
      << "fps=" << format_double(c.fps) << '\n'
      << "duration_frames=" << c.duration_frames << '\n'
      << "lane_change_prob_per_frame=" << format_double(c.lane_change_prob_per_frame) << '\n'
      << "lane_change_duration_frames=" << c.lane_change_duration_frames << '\n'
      << "lane_change_cooldown_frames=" << c.lane_change_cooldown_frames << '\n'
      << "fail_prob=" << format_double(c.fail_prob) << '\n'
      << "recover_prob=" << format_double(c.recover_prob) << '\n'
      << "failure_mode=" << (c.failure_mode == FailureMode::kMarkov ? "markov" : "fixed") << '\n'
      << "bad_duration_frames=" << c.bad_duration_frames << '\n'
      << "detect_prob_ok=" << format_double(c.detect_prob_ok) << '\n'
      << "detect_prob_bad=" << format_double(c.detect_prob_bad) << '\n'
      << "offset_noise_sd_m=" << format_double(c.offset_noise_sd_m) << '\n'
      << "coast_frames=" << c.coast_frames << '\n'
      << "initial_lane=" << c.initial_lane << '\n'
      << "emit_gnss=" << (c.emit_gnss ? 1 : 0) << '\n'
      << "gnss_origin_lat=" << format_double(c.gnss_origin.lat) << '\n'
      << "gnss_origin_lon=" << format_double(c.gnss_origin.lon) << '\n'
      << "speed_mps=" << format_double(c.speed_mps) << '\n'
      << "seed=" << c.seed << '\n';
  return out.str();
}

}  // namespace lanehmm
