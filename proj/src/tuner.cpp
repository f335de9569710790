#include "lanehmm/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "lanehmm/error.hpp"
#include "lanehmm/random.hpp"

namespace lanehmm {

namespace {

nlohmann::json params_json(const HmmParams& p) {
  return {{"n", p.n},   {"sigma1", p.sigma1}, {"sigma2", p.sigma2}, {"p1", p.p1},
          {"p2", p.p2}, {"p3", p.p3},         {"p4", p.p4},         {"bv", p.bv}};
}

bool inside(const Interval& iv, double v) { return v >= iv.lo && v <= iv.hi; }

// Coordinate order used by the refinement: sigma1, sigma2, p1..p4, bv.
constexpr int kDims = 7;

double& coordinate(HmmParams& p, int dim) {
  switch (dim) {
    case 0: return p.sigma1;
    case 1: return p.sigma2;
    case 2: return p.p1;
    case 3: return p.p2;
    case 4: return p.p3;
    case 5: return p.p4;
    default: return p.bv;
  }
}

Interval bounds(const SearchSpace& s, int dim) {
  switch (dim) {
    case 0: return s.sigma1;
    case 1: return s.sigma2;
    case 2: return s.p1;
    case 3: return s.p2;
    case 4: return s.p3;
    case 5: return s.p4;
    default: return {static_cast<double>(s.bv_min), static_cast<double>(s.bv_max)};
  }
}

}  // namespace

void SearchSpace::validate() const {
  for (int d = 0; d < kDims; ++d) {
    const Interval iv = bounds(*this, d);
    if (!(iv.lo < iv.hi)) throw ParameterError("SearchSpace: empty interval");
  }
  if (!(sigma1.lo > 0 && sigma2.lo > 0)) throw ParameterError("SearchSpace: sigma bounds must be positive");
  for (const auto& iv : {p1, p2, p3, p4})
    if (!(iv.lo > 0 && iv.hi < 1)) throw ParameterError("SearchSpace: probability bounds must lie in (0, 1)");
  if (bv_min < 0) throw ParameterError("SearchSpace: bv must be non-negative");
}

bool SearchSpace::contains(const HmmParams& p) const {
  return inside(sigma1, p.sigma1) && inside(sigma2, p.sigma2) && inside(p1, p.p1) && inside(p2, p.p2) &&
         inside(p3, p.p3) && inside(p4, p.p4) && p.bv >= bv_min && p.bv <= bv_max && p.bv == std::floor(p.bv);
}

nlohmann::json TunerResult::to_json() const {
  nlohmann::json trials_json = nlohmann::json::array();
  for (std::size_t i = 0; i < trials.size(); ++i)
    trials_json.push_back({{"trial", i}, {"params", params_json(trials[i].params)}, {"accuracy", trials[i].accuracy}});
  return {{"best_params", params_json(best_params)},
          {"best_accuracy", best_accuracy},
          {"seed", seed},
          {"trials", trials_json}};
}

double objective(const HmmParams& params, std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg) {
  long long correct = 0, evaluated = 0;
  PipelineOptions options;
  options.keep_results = false;
  for (const auto& seq : sequences) {
    const PipelineRun run = run_pipeline(seq, params, cfg, options);
    const Metrics m = evaluate(run.model, seq.truth, params.n);
    correct += m.categories.correct();
    evaluated += m.evaluated;
  }
  if (evaluated == 0) throw ConfigError("objective: no annotated non-crossing frame to score");
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

std::vector<double> evaluate_candidates(std::span<const HmmParams> candidates,
                                        std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg,
                                        int jobs) {
  std::vector<double> scores(candidates.size(), 0.0);
  std::vector<std::exception_ptr> errors(candidates.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      try {
        scores[i] = objective(candidates[i], sequences, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (threads == 1 || candidates.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, candidates.size()); ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return scores;
}

TunerResult random_search(const SearchSpace& space, std::span<const PreparedSequence> sequences,
                          const RuntimeConfig& cfg, int n, int budget, std::uint64_t seed, int jobs) {
  space.validate();
  if (budget < 1) throw ParameterError("random_search: budget must be >= 1");
  Rng rng(seed);
  std::vector<HmmParams> candidates(static_cast<std::size_t>(budget));
  for (auto& c : candidates) {
    c.n = n;
    c.sigma1 = rng.uniform(space.sigma1.lo, space.sigma1.hi);
    c.sigma2 = rng.uniform(space.sigma2.lo, space.sigma2.hi);
    c.p1 = rng.uniform(space.p1.lo, space.p1.hi);
    c.p2 = rng.uniform(space.p2.lo, space.p2.hi);
    c.p3 = rng.uniform(space.p3.lo, space.p3.hi);
    c.p4 = rng.uniform(space.p4.lo, space.p4.hi);
    c.bv = static_cast<double>(rng.uniform_int(space.bv_min, space.bv_max));
  }
  const std::vector<double> scores = evaluate_candidates(candidates, sequences, cfg, jobs);

  TunerResult result;
  result.seed = seed;
  result.trials.reserve(candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.trials.push_back({candidates[i], scores[i]});
    if (scores[i] > scores[best]) best = i;
  }
  result.best_params = candidates[best];
  result.best_accuracy = scores[best];
  return result;
}

TunerResult coordinate_refine(const HmmParams& start, const SearchSpace& space,
                              std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg, int iterations,
                              int jobs) {
  space.validate();
  start.validate();
  if (iterations < 0) throw ParameterError("coordinate_refine: iterations must be >= 0");

  TunerResult result;
  result.best_params = start;
  result.best_accuracy = objective(start, sequences, cfg);
  result.trials.push_back({start, result.best_accuracy});

  std::array<double, kDims> half_width{};
  for (int d = 0; d < kDims; ++d) {
    const Interval iv = bounds(space, d);
    half_width[static_cast<std::size_t>(d)] = (iv.hi - iv.lo) / 4.0;
  }

  for (int cycle = 0; cycle < iterations; ++cycle) {
    for (int d = 0; d < kDims; ++d) {
      const Interval iv = bounds(space, d);
      const double hw = half_width[static_cast<std::size_t>(d)];
      const double current = coordinate(result.best_params, d);
      std::vector<HmmParams> candidates;
      for (int k = -3; k <= 3; ++k) {
        double v = std::clamp(current + k * hw / 3.0, iv.lo, iv.hi);
        if (d == kDims - 1) v = std::round(v);
        if (v == current) continue;
        if (std::any_of(candidates.begin(), candidates.end(),
                        [&](HmmParams& c) { return coordinate(c, d) == v; }))
          continue;
        HmmParams c = result.best_params;
        coordinate(c, d) = v;
        candidates.push_back(c);
      }
      if (candidates.empty()) continue;
      const std::vector<double> scores = evaluate_candidates(candidates, sequences, cfg, jobs);
      std::size_t best = candidates.size();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        result.trials.push_back({candidates[i], scores[i]});
        if (scores[i] > result.best_accuracy && (best == candidates.size() || scores[i] > scores[best])) best = i;
      }
      if (best != candidates.size()) {
        result.best_params = candidates[best];
        result.best_accuracy = scores[best];
      }
    }
    for (auto& hw : half_width) hw *= 0.5;
  }
  return result;
}

std::pair<std::vector<PreparedSequence>, std::vector<PreparedSequence>> split_halves(
    std::span<const PreparedSequence> sequences) {
  std::pair<std::vector<PreparedSequence>, std::vector<PreparedSequence>> out;
  for (const auto& seq : sequences) {
    const std::size_t mid = seq.size() / 2;
    out.first.push_back(slice(seq, 0, mid));
    out.second.push_back(slice(seq, mid, seq.size()));
  }
  return out;
}

}  // namespace lanehmm
