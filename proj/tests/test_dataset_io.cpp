#include <doctest.h>

#include <clocale>
#include <locale>
#include <random>
#include <sstream>

#include "lanehmm/dataset.hpp"
#include "lanehmm/error.hpp"
#include "lanehmm/params_io.hpp"
#include "lanehmm/pipeline.hpp"
#include "lanehmm/simulator.hpp"

using namespace lanehmm;

namespace {

const std::string kFixture = std::string(LANEHMM_FIXTURES) + "/sim3lane.seq";

double random_double(std::mt19937_64& rng, double lo, double hi) {
  // Mix of "nice" decimals and full-precision values.
  const double v = std::uniform_real_distribution<double>(lo, hi)(rng);
  return rng() % 2 ? v : std::round(v * 100.0) / 100.0;
}

FrameRecord random_frame(std::mt19937_64& rng, long long id, int n) {
  FrameRecord f;
  f.frame_id = id;
  f.timestamp_s = random_double(rng, 0.0, 1e5);
  if (rng() % 2) f.gnss = GeoPoint{random_double(rng, -90, 90), random_double(rng, -180, 180)};
  if (rng() % 5) f.gt_lane = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
  f.crossing = rng() % 4 == 0;
  const int m = static_cast<int>(rng() % 7);
  for (int i = 0; i < m; ++i) {
    LineRecord l;
    l.track_id = (rng() % 2 ? "B" : "track_") + std::to_string(i);
    l.offset_m = random_double(rng, -49.9, 49.9);
    l.continuous = rng() % 2;
    l.detected = rng() % 3 != 0;
    if (rng() % 3 == 0) {
      l.lri = static_cast<int>(rng() % 11);
      l.valid = rng() % 2;
    }
    f.lines.push_back(l);
  }
  return f;
}

std::string parse_error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_sequence(in, "t.seq");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

const std::string kHeader = "lanehmm-sequence format=1 n_lanes=3 lane_width_m=3.5 fps=10 source=test\n";

// Decimal comma, to catch any locale-sensitive formatting.
struct CommaPunct : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST_CASE("sequence round trip on random records") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    SequenceHeader h{1 + static_cast<int>(rng() % 6), random_double(rng, 2.5, 4.5), random_double(rng, 1, 60),
                     "rep " + std::to_string(rep) + " with spaces"};
    std::vector<FrameRecord> frames;
    long long id = static_cast<long long>(rng() % 100);
    for (int i = 0; i < 40; ++i) {
      frames.push_back(random_frame(rng, id, h.n_lanes));
      id += 1 + static_cast<long long>(rng() % 3);
    }
    std::ostringstream out;
    write_sequence(out, h, frames);
    std::istringstream in(out.str());
    const Sequence back = read_sequence(in);
    REQUIRE(back.header == h);
    REQUIRE(back.frames == frames);
    std::ostringstream again;
    write_sequence(again, back.header, back.frames);
    REQUIRE(again.str() == out.str());
  }
}

TEST_CASE("results round trip") {
  std::mt19937_64 rng(8);
  const SequenceHeader h{3, 3.5, 10, "x"};
  std::vector<ResultRecord> rs;
  for (int i = 0; i < 100; ++i) {
    ResultRecord r;
    r.frame_id = i;
    r.map_lane = 1 + i % 3;
    const double a = std::uniform_real_distribution<double>(0, 1)(rng);
    r.lane_marginal = {a / 2, a / 2, 1 - a};
    r.sensor_ok_prob = std::uniform_real_distribution<double>(0, 1)(rng);
    r.tentative = {0, double(i % 7), 1};
    r.wor_frac = 0.1 * (i % 11);
    rs.push_back(r);
  }
  std::ostringstream out;
  write_results(out, h, rs);
  std::istringstream in(out.str());
  const ResultsFile back = read_results(in);
  CHECK(back.header == h);
  CHECK(back.records == rs);
}

TEST_CASE("numbers are locale independent") {
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new CommaPunct));
  std::setlocale(LC_ALL, "de_DE.UTF-8");  // may be unavailable; the facet above is enough
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-1234567.25) == "-1234567.25");
  CHECK(parse_double("3.25") == 3.25);
  CHECK_THROWS_AS(parse_double("3,25"), std::invalid_argument);
  std::ostringstream out;
  write_sequence(out, SequenceHeader{3, 3.5, 10, "s"}, std::vector<FrameRecord>{{0, 0.1, {}, {{"B0", -1.75, true, true, {}, {}}}, 2, false}});
  CHECK(out.str().find("-1.75") != std::string::npos);
  CHECK(out.str().find("0.1") != std::string::npos);
  std::ostringstream res;
  write_results(res, SequenceHeader{}, std::vector<ResultRecord>{{123456, 2, {0.25, 0.5, 0.25}, 0.9, {0, 1, 0}, 0.5}});
  CHECK(res.str().find("frame=123456 lane=2 p=0.5") != std::string::npos);
  SimConfig big;
  big.seed = 987654321987ULL;
  CHECK(format_sim_config(big).find("seed=987654321987\n") != std::string::npos);
  CHECK(format_params(HmmParams{}, RuntimeConfig{}).find("lri_window=10\n") != std::string::npos);
  std::setlocale(LC_ALL, "C");
  std::locale::global(previous);
}

TEST_CASE("number helpers") {
  CHECK(parse_double("+2.5") == 2.5);
  CHECK(parse_double("1e-3") == 0.001);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double("nan"), std::invalid_argument);
  CHECK(parse_int("-7") == -7);
  CHECK_THROWS_AS(parse_int("7.0"), std::invalid_argument);
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0})
    CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("parse errors name the file, line and field") {
  CHECK(parse_error_of("").find("t.seq:0: missing header") != std::string::npos);
  CHECK(parse_error_of("garbage\n").find("t.seq:1:") != std::string::npos);
  CHECK(parse_error_of("lanehmm-sequence format=2 n_lanes=3\n").find("format") != std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0 lines=\nframe=0 t=0.1 lines=\n").find("t.seq:3:") !=
        std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0 gt=4 lines=\n").find("gt lane 4") != std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0 lines=a,60,1,1\n").find("50 m") != std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0 lines=a,1,1,1;a,2,0,1\n").find("duplicate track") !=
        std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0 colour=red lines=\n").find("colour") != std::string::npos);
  CHECK(parse_error_of(kHeader + "frame=0 t=0\n").find("lines=") != std::string::npos);
}

TEST_CASE("lenient reading accepts out-of-order ids for validation") {
  std::istringstream in(kHeader + "frame=3 t=0 gt=2 lines=\nframe=3 t=0.1 gt=2 lines=\n");
  const Sequence s = read_sequence(in, "t.seq", ReadOptions{false});
  const ValidationReport r = validate_sequence(s.header, s.frames);
  CHECK_FALSE(r.ok());
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].message.find("records 0 and 1") != std::string::npos);
  CHECK(r.to_json()["issues"][0]["severity"] == "error");
}

TEST_CASE("validation of the 3-lane fixture is clean") {
  const Sequence s = read_sequence(kFixture);
  const ValidationReport r = validate_sequence(s.header, s.frames);
  CHECK(r.issues.empty());
  CHECK(r.frames == 500);
  CHECK(r.crossing_fraction > 0.0);
  CHECK(r.annotated_fraction == 1.0);
  const auto j = r.to_json();
  CHECK(j["frames"] == 500);
}

TEST_CASE("all-crossing sequence warns that evaluation is empty") {
  std::vector<FrameRecord> frames;
  for (int i = 0; i < 5; ++i) frames.push_back({i, i * 0.1, {}, {}, 2, true});
  const ValidationReport r = validate_sequence({3, 3.5, 10, ""}, frames);
  CHECK(r.ok());
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].severity == ValidationIssue::Severity::kWarning);
  CHECK(r.crossing_fraction == 1.0);
  CHECK(r.no_detection_fraction == 1.0);
}

TEST_CASE("streaming reader yields the same frames as read_sequence") {
  const Sequence whole = read_sequence(kFixture);
  SequenceReader reader(kFixture);
  CHECK(reader.header() == whole.header);
  std::size_t i = 0;
  while (auto f = reader.next()) {
    REQUIRE(i < whole.frames.size());
    CHECK(*f == whole.frames[i++]);
  }
  CHECK(i == whole.frames.size());
}

TEST_CASE("writing results and reading them back scores like the in-memory run") {
  const Sequence seq = read_sequence(kFixture);
  const RuntimeConfig cfg;
  HmmParams params;
  const PreparedSequence prepared = prepare_sequence(seq, cfg);
  const PipelineRun run = run_pipeline(prepared, params, cfg);
  std::stringstream buf;
  write_results(buf, seq.header, run.results);
  const ResultsFile back = read_results(buf);
  std::vector<LaneEstimate> est;
  for (const auto& r : back.records) est.push_back({r.frame_id, r.map_lane});
  const Metrics a = evaluate(run.model, prepared.truth, 3), b = evaluate(est, prepared.truth, 3);
  CHECK(a.confusion.counts == b.confusion.counts);
  CHECK(a.accuracy == b.accuracy);
}

TEST_CASE("unwritable and missing paths") {
  const std::vector<FrameRecord> none;
  CHECK_THROWS_AS(write_sequence(std::filesystem::path("/nonexistent/dir/x.seq"), SequenceHeader{}, none), IoError);
  CHECK_THROWS_AS(write_results(std::filesystem::path("/nonexistent/dir/x.res"), SequenceHeader{},
                                std::vector<ResultRecord>{}),
                  IoError);
  CHECK_THROWS_AS(read_sequence(std::filesystem::path("/nonexistent/x.seq")), IoError);
}

TEST_CASE("simulated sequences survive the text format unchanged") {
  SimConfig c;
  c.duration_frames = 3000;
  c.emit_gnss = true;
  const Simulation sim = simulate(c);
  std::stringstream buf;
  write_sequence(buf, sim.header, sim.frames);
  const Sequence back = read_sequence(buf);
  CHECK(back.header == sim.header);
  CHECK(back.frames == sim.frames);
}
