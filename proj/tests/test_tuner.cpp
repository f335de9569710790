#include <doctest.h>

#include <algorithm>

#include "lanehmm/error.hpp"
#include "lanehmm/simulator.hpp"
#include "lanehmm/tuner.hpp"

using namespace lanehmm;

namespace {

std::vector<PreparedSequence> simulated(const SimConfig& c) {
  const Simulation sim = simulate(c);
  return {prepare_sequence(Sequence{sim.header, sim.frames}, RuntimeConfig{})};
}

SimConfig noisy(int n, long long frames, std::uint64_t seed) {
  SimConfig c;
  c.n_lanes = n;
  c.duration_frames = frames;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("perfect detections give perfect accuracy") {
  SimConfig c;
  c.n_lanes = 3;
  c.duration_frames = 1500;
  c.fail_prob = 0.0;
  c.detect_prob_ok = 1.0;
  c.offset_noise_sd_m = 0.0;
  const auto seqs = simulated(c);
  const RuntimeConfig cfg;
  HmmParams p;
  // No line is valid before the reliability window has filled once, so the
  // first lri_window - 1 frames carry no evidence and are the only misses.
  const auto warm_up = static_cast<std::size_t>(cfg.lri_window - 1);
  const std::vector<PreparedSequence> settled{slice(seqs[0], warm_up, seqs[0].size())};
  CHECK(objective(p, settled, cfg) == 1.0);
  const Metrics m = evaluate(run_pipeline(seqs[0], p, cfg).model, seqs[0].truth, 3);
  CHECK(m.categories.correct() == m.evaluated - static_cast<long long>(warm_up));
}

TEST_CASE("objective errors") {
  const auto seqs = simulated(noisy(3, 200, 1));
  HmmParams four;
  four.n = 4;
  CHECK_THROWS_AS(objective(four, seqs, RuntimeConfig{}), ConfigError);
  std::vector<PreparedSequence> empty{slice(seqs[0], 0, 0)};
  CHECK_THROWS_AS(objective(HmmParams{}, empty, RuntimeConfig{}), ConfigError);
  CHECK_THROWS_AS(random_search(SearchSpace{}, seqs, RuntimeConfig{}, 3, 0, 1), ParameterError);
  SearchSpace bad;
  bad.p1 = {0.5, 0.5};
  CHECK_THROWS_AS(random_search(bad, seqs, RuntimeConfig{}, 3, 5, 1), ParameterError);
}

TEST_CASE("random search is reproducible and independent of the job count") {
  const auto seqs = simulated(noisy(3, 600, 9));
  const RuntimeConfig cfg;
  const TunerResult a = random_search(SearchSpace{}, seqs, cfg, 3, 24, 5, 1);
  const TunerResult b = random_search(SearchSpace{}, seqs, cfg, 3, 24, 5, 3);
  CHECK(a.trials == b.trials);
  CHECK(a.best_params == b.best_params);
  CHECK(a.to_json() == b.to_json());
  const TunerResult c = random_search(SearchSpace{}, seqs, cfg, 3, 24, 6, 1);
  CHECK(c.trials != a.trials);
}

TEST_CASE("random search bookkeeping") {
  const auto seqs = simulated(noisy(2, 800, 4));
  const RuntimeConfig cfg;
  const SearchSpace space;
  const TunerResult r = random_search(space, seqs, cfg, 2, 40, 11);
  REQUIRE(r.trials.size() == 40);
  double best = -1.0;
  std::size_t first_best = 0;
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const Trial& t = r.trials[i];
    REQUIRE(space.contains(t.params));
    REQUIRE(t.params.n == 2);
    REQUIRE_NOTHROW(t.params.validate());
    REQUIRE(t.accuracy == objective(t.params, seqs, cfg));
    if (t.accuracy > best) {
      best = t.accuracy;
      first_best = i;
    }
  }
  CHECK(r.best_accuracy == best);
  CHECK(r.best_params == r.trials[first_best].params);

  const TunerResult one = random_search(space, seqs, cfg, 2, 1, 11);
  REQUIRE(one.trials.size() == 1);
  CHECK(one.best_params == r.trials[0].params);
}

TEST_CASE("searching matches the default parameters on noisy two-lane roads") {
  // The defaults are not among the draws, so this is not guaranteed per
  // road; 19/20 was measured and frozen.
  const RuntimeConfig cfg;
  HmmParams defaults;
  defaults.n = 2;
  int at_least_default = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto seqs = simulated(noisy(2, 3000, seed));
    const TunerResult r = random_search(SearchSpace{}, seqs, cfg, 2, 200, 3);
    at_least_default += r.best_accuracy >= objective(defaults, seqs, cfg);
  }
  CHECK(at_least_default >= 19);
}

TEST_CASE("coordinate refinement never gets worse") {
  const auto seqs = simulated(noisy(3, 1000, 13));
  const RuntimeConfig cfg;
  const SearchSpace space;
  const TunerResult rs = random_search(space, seqs, cfg, 3, 20, 2);

  const TunerResult zero = coordinate_refine(rs.best_params, space, seqs, cfg, 0);
  CHECK(zero.best_params == rs.best_params);
  CHECK(zero.best_accuracy == rs.best_accuracy);
  CHECK(zero.trials.size() == 1);

  const TunerResult refined = coordinate_refine(rs.best_params, space, seqs, cfg, 2, 2);
  CHECK(refined.best_accuracy >= rs.best_accuracy);
  CHECK(space.contains(refined.best_params));
  double best = 0.0;
  for (const Trial& t : refined.trials) {
    REQUIRE(space.contains(t.params));
    best = std::max(best, t.accuracy);
  }
  CHECK(refined.best_accuracy == best);

  const TunerResult serial = coordinate_refine(rs.best_params, space, seqs, cfg, 2, 1);
  CHECK(serial.trials == refined.trials);
}

TEST_CASE("split at the midpoint frame") {
  std::vector<PreparedSequence> seqs = simulated(noisy(3, 101, 1));
  const auto more = simulated(noisy(3, 40, 2));
  seqs.push_back(more[0]);
  const auto [first, second] = split_halves(seqs);
  REQUIRE(first.size() == 2);
  CHECK(first[0].size() == 50);
  CHECK(second[0].size() == 51);
  CHECK(first[1].size() == 20);
  CHECK(second[1].size() == 20);
  CHECK(second[0].frame_ids.front() == seqs[0].frame_ids[50]);
  CHECK(first[0].truth.back().frame_id == seqs[0].truth[49].frame_id);
}
