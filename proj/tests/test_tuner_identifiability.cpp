#include <doctest.h>

#include <cmath>
#include <iostream>

#include "lanehmm/simulator.hpp"
#include "lanehmm/tuner.hpp"

using namespace lanehmm;

// A 500-trial search on a 10^4-frame road whose detector fails with
// p(OK->BAD)=0.1, p(BAD->OK)=0.03 should put p1 near 0.9.
TEST_CASE("random search recovers the sensor persistence p1") {
  const RuntimeConfig cfg;
  int hits = 0;
  for (int rep = 0; rep < 10; ++rep) {
    SimConfig c;
    c.n_lanes = 3;
    c.duration_frames = 10000;
    c.fail_prob = 0.1;
    c.recover_prob = 0.03;
    c.seed = 3000 + static_cast<std::uint64_t>(rep);
    const Simulation sim = simulate(c);
    const std::vector<PreparedSequence> seqs{prepare_sequence(Sequence{sim.header, sim.frames}, cfg)};
    const TunerResult r = random_search(SearchSpace{}, seqs, cfg, 3, 500, 100 + static_cast<std::uint64_t>(rep));
    const bool hit = std::abs(r.best_params.p1 - 0.9) <= 0.15;
    std::cout << "rep " << rep << " p1=" << r.best_params.p1 << " p2=" << r.best_params.p2
              << " accuracy=" << r.best_accuracy << (hit ? " hit" : " miss") << '\n';
    hits += hit;
  }
  std::cout << "p1 within 0.15 of 0.9 in " << hits << "/10 repetitions\n";
  CHECK(hits >= 8);
}
