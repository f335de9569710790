#include "lanehmm/inverse_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lanehmm/error.hpp"

namespace lanehmm {

LriTracker::LriTracker(const RuntimeConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void LriTracker::push(Track& track, bool detected) const {
  track.history.push_back(detected);
  track.count += detected ? 1 : 0;
  if (static_cast<int>(track.history.size()) > cfg_.lri_window) {
    track.count -= track.history.front() ? 1 : 0;
    track.history.pop_front();
  }
  if (track.count >= cfg_.lri_window) {
    track.valid = true;
  } else if (track.valid && track.count < cfg_.hysteresis_fraction * cfg_.lri_window) {
    track.valid = false;
  }
}

std::vector<TrackedLine> LriTracker::update(std::span<const RawLineObservation> frame) {
  std::set<std::string_view> seen;
  for (const auto& obs : frame) {
    if (!seen.insert(obs.track_id).second)
      throw ParameterError("LriTracker: duplicate track id '" + obs.track_id + "' in one frame");
    if (!std::isfinite(obs.offset)) throw ParameterError("LriTracker: non-finite offset");
  }

  std::vector<TrackedLine> out;
  out.reserve(frame.size());
  for (const auto& obs : frame) {
    Track& track = tracks_[obs.track_id];
    push(track, obs.detected);
    out.push_back({obs.track_id, obs.offset, obs.continuous, track.count, track.valid});
  }

  // Tracks missing from this frame count as missed. Once a track's history
  // holds no detection it is indistinguishable from an unknown one.
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    if (!seen.contains(it->first)) {
      push(it->second, false);
      if (it->second.count == 0 && !it->second.valid) {
        it = tracks_.erase(it);
        continue;
      }
    }
    ++it;
  }
  return out;
}

std::vector<double> expected_boundary_offsets(int lane, int n, double lane_width) {
  if (n < 1 || lane < 1 || lane > n) throw ParameterError("expected_boundary_offsets: lane out of range");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) out[static_cast<std::size_t>(j)] = (j - lane + 0.5) * lane_width;
  return out;
}

bool line_compatible(double offset, int lane, int n, const RuntimeConfig& cfg) {
  if (n < 1 || lane < 1 || lane > n) throw ParameterError("line_compatible: lane out of range");
  for (int j = 0; j <= n; ++j)
    if (std::abs(offset - (j - lane + 0.5) * cfg.lane_width) <= cfg.compat_tolerance) return true;
  return false;
}

std::optional<int> implied_lane_from_continuous(double offset, int n, const RuntimeConfig& cfg) {
  if (offset == 0.0) return std::nullopt;
  // Left: the line is boundary 0, so lane i satisfies offset = (0.5 - i) W.
  // Right: boundary n, offset = (n + 0.5 - i) W.
  const double lane = offset < 0.0 ? 0.5 - offset / cfg.lane_width : n + 0.5 - offset / cfg.lane_width;
  return std::clamp(static_cast<int>(std::lround(lane)), 1, n);
}

void sort_by_offset(std::vector<TrackedLine>& lines) {
  std::stable_sort(lines.begin(), lines.end(),
                   [](const TrackedLine& a, const TrackedLine& b) { return a.offset < b.offset; });
}

TentativeVector build_tentative(std::span<const TrackedLine> lines, const HmmParams& params,
                                const RuntimeConfig& cfg) {
  const int n = params.n;
  TentativeVector counters = TentativeVector::Zero(n);
  std::vector<TrackedLine> sorted(lines.begin(), lines.end());
  sort_by_offset(sorted);
  for (const auto& line : sorted) {
    if (!line.is_valid) continue;
    for (int lane = 1; lane <= n; ++lane)
      if (line_compatible(line.offset, lane, n, cfg)) counters(lane - 1) += 1.0;
    if (line.continuous) {
      if (const auto implied = implied_lane_from_continuous(line.offset, n, cfg)) counters(*implied - 1) += params.bv;
    }
  }
  return counters;
}

WorEvidence compute_wor(std::span<const TrackedLine> lines, int n, const RuntimeConfig& cfg) {
  long long total = 0;
  for (const auto& line : lines) total += line.lri;
  const double budget = static_cast<double>(cfg.lri_window) * (n + 1);
  const double frac = std::clamp(static_cast<double>(total) / budget, 0.0, 1.0);
  return {frac, 1.0 - frac};
}

Eigen::VectorXd normalize_tentative(const TentativeVector& tentative) {
  const double total = tentative.sum();
  if (total <= 0.0) return Eigen::VectorXd::Constant(tentative.size(), 1.0 / static_cast<double>(tentative.size()));
  return tentative / total;
}

FrameEvidence make_evidence(std::span<const TrackedLine> lines, const HmmParams& params, const RuntimeConfig& cfg) {
  return {build_tentative(lines, params, cfg), compute_wor(lines, params.n, cfg)};
}

}  // namespace lanehmm
