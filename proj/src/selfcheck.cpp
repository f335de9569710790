#include "lanehmm/selfcheck.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "lanehmm/error.hpp"
#include "lanehmm/pipeline.hpp"

#ifndef LANEHMM_GOLDEN_PATH_DEFAULT
#define LANEHMM_GOLDEN_PATH_DEFAULT "golden/e2e_summary.txt"
#endif

namespace lanehmm {

namespace {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return out;
}

std::string join_counts(const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (out.empty() ? "" : ",") + std::to_string(m(r, c));
  return out;
}

std::string join_counts(const std::vector<long long>& v) {
  std::string out;
  for (const auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SimConfig golden_sim_config() {
  SimConfig c;
  c.n_lanes = 3;
  c.duration_frames = 2000;
  c.seed = 42;
  return c;
}

std::filesystem::path default_golden_path() { return LANEHMM_GOLDEN_PATH_DEFAULT; }

Summary end_to_end_summary() {
  const Simulation sim = simulate(golden_sim_config());
  std::ostringstream seq_text;
  write_sequence(seq_text, sim.header, sim.frames);
  std::istringstream seq_in(seq_text.str());
  const Sequence seq = read_sequence(seq_in, "<golden>");

  const RuntimeConfig cfg;
  HmmParams params;
  params.n = seq.header.n_lanes;
  const PreparedSequence prepared = prepare_sequence(seq, cfg);
  const PipelineRun run = run_pipeline(prepared, params, cfg);
  std::ostringstream results_text;
  write_results(results_text, seq.header, run.results);

  const Metrics model = evaluate(run.model, prepared.truth, params.n);
  const Metrics baseline = evaluate(run.baseline, prepared.truth, params.n);

  return {
      {"format", "1"},
      {"frames", std::to_string(seq.frames.size())},
      {"sequence_fnv1a", hex64(fnv1a(seq_text.str()))},
      {"results_fnv1a", hex64(fnv1a(results_text.str()))},
      {"evaluated", std::to_string(model.evaluated)},
      {"skipped_crossing", std::to_string(model.skipped_crossing)},
      {"model_accuracy", format_double(model.accuracy)},
      {"baseline_accuracy", format_double(baseline.accuracy)},
      {"model_confusion", join_counts(model.confusion.counts)},
      {"baseline_confusion", join_counts(baseline.confusion.counts)},
      {"model_categories", join_counts(model.categories.counts)},
      {"baseline_categories", join_counts(baseline.categories.counts)},
  };
}

std::string format_summary(const Summary& summary) {
  std::string out;
  for (const auto& [key, value] : summary) out += key + "=" + value + "\n";
  return out;
}

Summary parse_summary(const std::string& text) {
  Summary out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("<summary>", line_no, "expected key=value");
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

CheckReport end_to_end_check(const std::filesystem::path& golden_path) {
  std::ifstream in(golden_path, std::ios::binary);
  if (!in) throw IoError("cannot open golden summary " + golden_path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const Summary golden = parse_summary(buffer.str());
  const Summary actual = end_to_end_summary();

  std::map<std::string, std::string> want(golden.begin(), golden.end());
  std::map<std::string, std::string> got(actual.begin(), actual.end());
  CheckReport report;
  for (const auto& [key, value] : got) {
    const auto it = want.find(key);
    if (it == want.end() || it->second != value) report.divergent_fields.push_back(key);
  }
  for (const auto& [key, value] : want)
    if (!got.contains(key)) report.divergent_fields.push_back(key);
  report.pass = report.divergent_fields.empty();
  if (report.pass) {
    report.message = "end-to-end check passed (" + std::to_string(actual.size()) + " fields)";
  } else {
    report.message = "end-to-end check FAILED; divergent fields:";
    for (const auto& f : report.divergent_fields) {
      report.message += "\n  " + f + ": golden=" + (want.contains(f) ? want[f] : "<missing>") +
                        " actual=" + (got.contains(f) ? got[f] : "<missing>");
    }
  }
  return report;
}

}  // namespace lanehmm
