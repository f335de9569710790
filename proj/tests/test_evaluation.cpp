#include <doctest.h>

#include <algorithm>
#include <random>

#include "lanehmm/error.hpp"
#include "lanehmm/evaluation.hpp"

using namespace lanehmm;

namespace {

struct Fixture {
  std::vector<GroundTruth> truth;
  std::vector<LaneEstimate> est;
};

// Ten frames: two crossing, six correct, one off by one, one unassigned.
Fixture hand_built() {
  Fixture f;
  const int gt[10] = {1, 1, 2, 2, 2, 3, 3, 3, 2, 2};
  const bool crossing[10] = {false, false, true, true, false, false, false, false, false, false};
  const std::optional<int> lane[10] = {1, 1, 3, 1, 2, 3, 3, 2, std::nullopt, 2};
  for (int i = 0; i < 10; ++i) {
    f.truth.push_back({100 + i, gt[i], crossing[i]});
    f.est.push_back({100 + i, lane[i]});
  }
  return f;
}

}  // namespace

TEST_CASE("hand-counted fixture") {
  const Fixture f = hand_built();
  const Metrics m = evaluate(f.est, f.truth, 3);
  CHECK(m.evaluated == 8);
  CHECK(m.skipped_crossing == 2);
  CHECK(m.missing_gt == 0);
  CHECK(m.accuracy == 0.75);
  CHECK(m.categories.counts == std::vector<long long>{6, 1, 0, 1});
  CHECK(m.confusion.counts(1, 2) == 1);  // said 2, truth 3
  CHECK(m.confusion.counts(3, 1) == 1);  // no assignment, truth 2
}

TEST_CASE("baseline decisions") {
  CHECK(baseline_lane(Eigen::Vector3d(0, 1, 1)) == std::nullopt);
  CHECK(baseline_lane(Eigen::Vector3d(0, 0, 0)) == std::nullopt);
  CHECK(baseline_lane(Eigen::Vector3d(0, 2, 1)) == 2);
  CHECK(baseline_lane(Eigen::Vector3d(8, 0, 0)) == 1);
  CHECK(baseline_lane(Eigen::VectorXd()) == std::nullopt);
}

TEST_CASE("stream mismatches are configuration errors") {
  Fixture f = hand_built();
  auto shorter = f.est;
  shorter.pop_back();
  CHECK_THROWS_AS(evaluate(shorter, f.truth, 3), ConfigError);
  auto shifted = f.est;
  shifted[0].frame_id = 999;
  CHECK_THROWS_AS(evaluate(shifted, f.truth, 3), ConfigError);
  auto out_of_range = f.est;
  out_of_range[0].lane = 4;
  CHECK_THROWS_AS(evaluate(out_of_range, f.truth, 3), ConfigError);
}

TEST_CASE("random streams: totals add up, histogram follows the matrix, order does not matter") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int frames = static_cast<int>(rng() % 200);
    std::vector<GroundTruth> truth;
    std::vector<LaneEstimate> est;
    for (int i = 0; i < frames; ++i) {
      std::optional<int> gt;
      if (rng() % 10) gt = 1 + static_cast<int>(rng() % n);
      truth.push_back({i * 3, gt, rng() % 5 == 0});
      std::optional<int> lane;
      if (rng() % 4) lane = 1 + static_cast<int>(rng() % n);
      est.push_back({i * 3, lane});
    }
    const Metrics m = evaluate(est, truth, n);
    REQUIRE(m.confusion.total() + m.skipped_crossing + m.missing_gt == frames);
    REQUIRE(m.confusion.total() == m.evaluated);
    REQUIRE(m.categories.counts == categories_from_confusion(m.confusion).counts);
    REQUIRE(m.categories.total() == m.evaluated);

    std::shuffle(est.begin(), est.end(), rng);
    std::shuffle(truth.begin(), truth.end(), rng);
    const Metrics s = evaluate(est, truth, n);
    REQUIRE(s.confusion.counts == m.confusion.counts);
    REQUIRE(s.accuracy == m.accuracy);
  }
}

TEST_CASE("metrics JSON round trip") {
  const Fixture f = hand_built();
  const Metrics m = evaluate(f.est, f.truth, 3);
  const Metrics back = metrics_from_json(to_json(m));
  CHECK(back.confusion.counts == m.confusion.counts);
  CHECK(back.categories.counts == m.categories.counts);
  CHECK(back.accuracy == m.accuracy);
  CHECK(back.evaluated == m.evaluated);
  CHECK(back.skipped_crossing == m.skipped_crossing);
}

TEST_CASE("comparison report") {
  const Fixture f = hand_built();
  const Metrics m = evaluate(f.est, f.truth, 3);

  SUBCASE("identical inputs") {
    const ComparisonReport r = compare(m, m);
    CHECK(r.accuracy_delta == 0.0);
    CHECK(std::all_of(r.category_deltas.begin(), r.category_deltas.end(), [](long long d) { return d == 0; }));
  }
  SUBCASE("0.9 against 0.6") {
    Metrics a = m, b = m;
    a.accuracy = 0.9;
    b.accuracy = 0.6;
    CHECK(compare(a, b).accuracy_delta == doctest::Approx(0.30).epsilon(1e-15));
    CHECK(compare(a, b).render().find("+0.3000") != std::string::npos);
  }
  SUBCASE("machine-readable round trip with timeline") {
    std::vector<LaneEstimate> baseline = f.est;
    for (auto& e : baseline) e.lane = std::nullopt;
    const Metrics b = evaluate(baseline, f.truth, 3);
    const ComparisonReport r = compare(m, b, f.est, baseline, f.truth);
    REQUIRE(r.timeline.size() == 10);
    CHECK(r.timeline[8].model == std::nullopt);
    CHECK(r.timeline[2].crossing);
    const ComparisonReport back = ComparisonReport::from_json(r.to_json());
    CHECK(back.to_json() == r.to_json());
    CHECK(back.render() == r.render());
    CHECK(back.timeline_tsv() == r.timeline_tsv());
    const std::string tsv = r.timeline_tsv();
    CHECK(tsv.rfind("frame\tgt\tcrossing\tbaseline\tmodel\n", 0) == 0);
    CHECK(tsv.find("108\t2\t0\t-\t-\n") != std::string::npos);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 11);
  }
}
