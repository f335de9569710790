#include "lanehmm/pipeline.hpp"

#include "lanehmm/error.hpp"

namespace lanehmm {

PreparedSequence prepare_sequence(const Sequence& sequence, const RuntimeConfig& cfg, PrepareOptions options) {
  PreparedSequence out;
  out.header = sequence.header;
  out.frame_ids.reserve(sequence.frames.size());
  out.lines.reserve(sequence.frames.size());
  out.truth = ground_truth(sequence.frames);

  LriTracker tracker(cfg);
  std::vector<RawLineObservation> raw;
  for (const auto& frame : sequence.frames) {
    raw.clear();
    for (const auto& l : frame.lines) raw.push_back({l.track_id, l.offset_m, l.continuous, l.detected});
    std::vector<TrackedLine> tracked = tracker.update(raw);
    if (options.use_logged_lri) {
      for (std::size_t i = 0; i < tracked.size(); ++i) {
        const auto& rec = frame.lines[i];
        if (rec.lri) {
          if (*rec.lri < 0 || *rec.lri > cfg.lri_window)
            throw ConfigError("logged LRI of '" + rec.track_id + "' outside [0, lri_window]");
          tracked[i].lri = *rec.lri;
          tracked[i].is_valid = rec.valid.value_or(false);
        }
      }
    }
    sort_by_offset(tracked);
    out.frame_ids.push_back(frame.frame_id);
    out.lines.push_back(std::move(tracked));
  }
  return out;
}

PreparedSequence slice(const PreparedSequence& sequence, std::size_t begin, std::size_t end) {
  end = std::min(end, sequence.size());
  begin = std::min(begin, end);
  PreparedSequence out;
  out.header = sequence.header;
  const auto b = static_cast<std::ptrdiff_t>(begin), e = static_cast<std::ptrdiff_t>(end);
  out.frame_ids.assign(sequence.frame_ids.begin() + b, sequence.frame_ids.begin() + e);
  out.lines.assign(sequence.lines.begin() + b, sequence.lines.begin() + e);
  out.truth.assign(sequence.truth.begin() + b, sequence.truth.begin() + e);
  return out;
}

PipelineRun run_pipeline(const PreparedSequence& sequence, const HmmParams& params, const RuntimeConfig& cfg,
                         const PipelineOptions& options) {
  if (params.n != sequence.header.n_lanes)
    throw ConfigError("parameters are for " + std::to_string(params.n) + " lanes but the sequence has " +
                      std::to_string(sequence.header.n_lanes));
  LaneFilter<double> filter(params, options.prior);
  if (options.trace) filter.set_trace(options.trace);

  PipelineRun run;
  run.model.reserve(sequence.size());
  run.baseline.reserve(sequence.size());
  if (options.keep_results) run.results.reserve(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const FrameEvidence ev = make_evidence(sequence.lines[i], params, cfg);
    const FrameEstimate est = filter.step(normalize_tentative(ev.tentative), ev.wor);
    const long long id = sequence.frame_ids[i];
    run.model.push_back({id, est.map_lane});
    run.baseline.push_back({id, baseline_lane(ev.tentative)});
    if (options.keep_results) {
      ResultRecord r;
      r.frame_id = id;
      r.map_lane = est.map_lane;
      r.lane_marginal.assign(est.lane_marginal.data(), est.lane_marginal.data() + est.lane_marginal.size());
      r.sensor_ok_prob = est.sensor_ok_prob;
      r.tentative.assign(ev.tentative.data(), ev.tentative.data() + ev.tentative.size());
      r.wor_frac = ev.wor(0);
      run.results.push_back(std::move(r));
    }
  }
  return run;
}

}  // namespace lanehmm
