#ifndef LANEHMM_TUNER_HPP
#define LANEHMM_TUNER_HPP

// Derivative-free search over the HMM parameters against annotated
// sequences. The objective (pooled non-crossing accuracy) is piecewise
// constant, so only random sampling and a coordinate grid refinement are
// offered.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "lanehmm/pipeline.hpp"

namespace lanehmm {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct SearchSpace {
  Interval sigma1{0.05, 3.0};
  Interval sigma2{0.05, 3.0};
  Interval p1{0.01, 0.999};
  Interval p2{0.01, 0.999};
  Interval p3{0.01, 0.999};
  Interval p4{0.01, 0.999};
  int bv_min = 0;
  int bv_max = 10;

  void validate() const;
  bool contains(const HmmParams& params) const;
};

struct Trial {
  HmmParams params;
  double accuracy = 0.0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct TunerResult {
  HmmParams best_params;
  double best_accuracy = 0.0;
  std::vector<Trial> trials;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Pooled accuracy of the HMM estimate over the non-crossing annotated
/// frames of all sequences. Throws ConfigError when no frame is scorable or
/// when a sequence's lane count differs from params.n.
double objective(const HmmParams& params, std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg);

/// Evaluates `candidates` on up to `jobs` threads; results are returned in
/// candidate order regardless of completion order.
std::vector<double> evaluate_candidates(std::span<const HmmParams> candidates,
                                        std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg,
                                        int jobs);

/// `budget` uniform draws from the space for an n-lane road. The first
/// draw with the highest accuracy wins.
TunerResult random_search(const SearchSpace& space, std::span<const PreparedSequence> sequences,
                          const RuntimeConfig& cfg, int n, int budget, std::uint64_t seed, int jobs = 1);

/// Cyclic coordinate search: for each parameter in turn, evaluates a
/// 7-point grid around the incumbent and keeps strict improvements. The grid
/// half-width starts at a quarter of the parameter range and halves after
/// every cycle.
TunerResult coordinate_refine(const HmmParams& start, const SearchSpace& space,
                              std::span<const PreparedSequence> sequences, const RuntimeConfig& cfg,
                              int iterations, int jobs = 1);

/// Splits every sequence at its midpoint frame into (first halves, second halves).
std::pair<std::vector<PreparedSequence>, std::vector<PreparedSequence>> split_halves(
    std::span<const PreparedSequence> sequences);

}  // namespace lanehmm

#endif  // LANEHMM_TUNER_HPP
