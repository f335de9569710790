// lanehmm: command-line front end for simulation, filtering, evaluation and
// parameter search. Summaries go to stdout, diagnostics to stderr.
//
// Exit codes:
//   0 success            4 configuration / parameter error
//   1 self-check failed  5 I/O error
//   2 usage error        6 other runtime error
//   3 parse error        7 not found (preset, map segment)

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lanehmm/dataset.hpp"
#include "lanehmm/error.hpp"
#include "lanehmm/evaluation.hpp"
#include "lanehmm/map_provider.hpp"
#include "lanehmm/params_io.hpp"
#include "lanehmm/pipeline.hpp"
#include "lanehmm/selfcheck.hpp"
#include "lanehmm/simulator.hpp"
#include "lanehmm/tuner.hpp"

namespace {

using namespace lanehmm;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kParse = 3,
  kConfig = 4,
  kIo = 5,
  kRuntime = 6,
  kNotFound = 7,
};

struct Options {
  std::vector<std::string> inputs;
  std::string sim_config;
  std::string params_file;
  std::string preset;
  std::string map;
  double map_radius = 50.0;
  int lanes = 0;
  double lane_width = 0.0;
  std::string out;
  std::string trace;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool use_logged_lri = false;

  // simulate
  long long frames = 0;
  std::vector<std::string> bursts;

  // tune
  int budget = 500;
  int refine = 0;
  bool no_split = false;

  // evaluate
  std::string results;

  // map-lookup
  double lat = 0.0, lon = 0.0;

  // presets
  std::string preset_name;

  // check
  std::string golden;
  bool write_golden = false;
};

SimConfig sim_config_from(const Options& o) {
  SimConfig cfg = o.sim_config.empty() ? SimConfig{} : load_sim_config(o.sim_config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.lanes > 0) cfg.n_lanes = o.lanes;
  if (o.lane_width > 0) cfg.lane_width_m = o.lane_width;
  if (o.frames > 0) cfg.duration_frames = o.frames;
  cfg.validate();
  return cfg;
}

std::vector<FrameRecord> apply_bursts(std::vector<FrameRecord> frames, const std::vector<std::string>& bursts,
                                      std::uint64_t seed) {
  for (const auto& item : bursts) {
    std::vector<std::string> parts;
    std::stringstream ss(item);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("--burst expects start:length:dropout|clutter, got '" + item + "'");
    BurstMode mode;
    if (parts[2] == "dropout") mode = BurstMode::kDropout;
    else if (parts[2] == "clutter") mode = BurstMode::kClutter;
    else throw ConfigError("unknown burst mode '" + parts[2] + "'");
    try {
      frames = inject_burst(std::move(frames), static_cast<std::size_t>(parse_int(parts[0])),
                            static_cast<std::size_t>(parse_int(parts[1])), mode, seed);
    } catch (const std::invalid_argument&) {
      throw ConfigError("--burst: bad number in '" + item + "'");
    }
  }
  return frames;
}

std::vector<Sequence> load_inputs(const Options& o) {
  std::vector<Sequence> out;
  if (!o.sim_config.empty()) {
    const Simulation sim = simulate(sim_config_from(o));
    out.push_back({sim.header, apply_bursts(sim.frames, o.bursts, sim_config_from(o).seed)});
    return out;
  }
  if (o.inputs.empty()) throw UsageError("one of --input or --sim-config is required");
  for (const auto& path : o.inputs) {
    if (!std::filesystem::exists(path)) throw IoError("input sequence not found: " + path);
    out.push_back(read_sequence(path));
  }
  return out;
}

ParamsFile params_from(const Options& o) {
  if (!o.params_file.empty()) return load_params(o.params_file);
  if (!o.preset.empty()) return load_preset(o.preset);
  return ParamsFile{};
}

// Lane count: --lanes, then the map at the first GNSS fix, then the header.
struct Resolved {
  int lanes = 0;
  double lane_width = 0.0;
  std::string lanes_source;
};

Resolved resolve_geometry(const Options& o, const Sequence& seq) {
  Resolved r{seq.header.n_lanes, seq.header.lane_width_m, "sequence header"};
  if (!o.map.empty()) {
    const MapExtract extract = load_extract(o.map);
    const auto fix = std::find_if(seq.frames.begin(), seq.frames.end(), [](const FrameRecord& f) { return f.gnss; });
    if (fix == seq.frames.end()) {
      std::cerr << "lanehmm: warning: no GNSS fix in sequence; map not consulted\n";
    } else {
      try {
        const MapMatch m = extract.lookup_lane_count(*fix->gnss, o.map_radius);
        r.lanes = m.lane_count;
        if (m.lane_width) r.lane_width = *m.lane_width;
        r.lanes_source = "map segment " + m.segment_id;
      } catch (const NotFoundError& e) {
        std::cerr << "lanehmm: warning: " << e.what() << "; using the sequence header\n";
      }
    }
  }
  if (o.lanes > 0) {
    r.lanes = o.lanes;
    r.lanes_source = "--lanes";
  }
  if (o.lane_width > 0) r.lane_width = o.lane_width;
  return r;
}

nlohmann::json belief_json(const JointBelief<double>& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < b.rows(); ++i) rows.push_back({b(i, 0), b(i, 1)});
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

int cmd_simulate(const Options& o) {
  if (o.out.empty()) throw ConfigError("simulate requires --out");
  const SimConfig cfg = sim_config_from(o);
  const Simulation sim = simulate(cfg);
  const auto frames = apply_bursts(sim.frames, o.bursts, cfg.seed);
  write_sequence(o.out, sim.header, frames);
  std::cout << "wrote " << frames.size() << " frames (" << cfg.n_lanes << " lanes, seed " << cfg.seed << ") to "
            << o.out << '\n';
  return kOk;
}

int cmd_run(const Options& o) {
  std::vector<Sequence> inputs = load_inputs(o);
  if (inputs.size() != 1) throw UsageError("run takes exactly one --input");
  Sequence seq = std::move(inputs.front());

  const ParamsFile pf = params_from(o);
  const Resolved geo = resolve_geometry(o, seq);
  if (pf.has_lane_count && pf.params.n != geo.lanes)
    throw ConfigError("parameters are for " + std::to_string(pf.params.n) + " lanes but " + geo.lanes_source +
                      " gives " + std::to_string(geo.lanes));
  HmmParams params = pf.params;
  params.n = geo.lanes;
  RuntimeConfig cfg = pf.runtime;
  cfg.lane_width = geo.lane_width;
  params.validate();
  cfg.validate();
  seq.header.n_lanes = geo.lanes;
  seq.header.lane_width_m = geo.lane_width;

  PrepareOptions prep;
  prep.use_logged_lri = o.use_logged_lri;
  const PreparedSequence prepared = prepare_sequence(seq, cfg, prep);

  PipelineOptions popts;
  std::ofstream trace;
  if (!o.trace.empty()) {
    trace.open(o.trace, std::ios::binary);
    if (!trace) throw IoError("cannot write trace " + o.trace);
    popts.trace = [&](const FilterTrace<double>& t) {
      trace << nlohmann::json{{"step", t.step},
                              {"predicted", belief_json(t.predicted)},
                              {"likelihood", belief_json(t.likelihood)},
                              {"posterior", belief_json(t.posterior)}}
                   .dump()
            << '\n';
    };
  }
  const PipelineRun run = run_pipeline(prepared, params, cfg, popts);

  const Metrics model = evaluate(run.model, prepared.truth, params.n);
  const Metrics baseline = evaluate(run.baseline, prepared.truth, params.n);
  const ComparisonReport report = compare(model, baseline, run.model, run.baseline, prepared.truth);

  if (!o.out.empty()) {
    write_results(o.out, seq.header, run.results);
    write_text(o.out + ".metrics.json", report.to_json().dump(2) + "\n");
    write_text(o.out + ".timeline.tsv", report.timeline_tsv());
  }
  std::cout << "lanes              " << params.n << " (" << geo.lanes_source << ")\n";
  std::cout << "frames             " << prepared.size() << '\n';
  std::cout << report.render();
  return kOk;
}

int cmd_evaluate(const Options& o) {
  if (o.inputs.size() != 1 || o.results.empty()) throw UsageError("evaluate takes exactly one --input");
  const Sequence seq = read_sequence(o.inputs.front());
  const ResultsFile results = read_results(o.results);
  const int n = results.header.n_lanes;
  const ParamsFile pf = params_from(o);
  HmmParams params = pf.params;
  if (pf.has_lane_count && params.n != n)
    throw ConfigError("parameters are for " + std::to_string(params.n) + " lanes but the results have " +
                      std::to_string(n));
  params.n = n;
  RuntimeConfig cfg = pf.runtime;
  cfg.lane_width = results.header.lane_width_m;

  Sequence relabeled = seq;
  relabeled.header.n_lanes = n;
  const PreparedSequence prepared = prepare_sequence(relabeled, cfg);
  std::vector<LaneEstimate> model;
  for (const auto& r : results.records) model.push_back({r.frame_id, r.map_lane});
  const std::vector<LaneEstimate> baseline = detector_baseline(prepared.frame_ids, prepared.lines, params, cfg);
  const ComparisonReport report = compare(evaluate(model, prepared.truth, n), evaluate(baseline, prepared.truth, n),
                                          model, baseline, prepared.truth);
  if (!o.out.empty()) {
    write_text(o.out, report.to_json().dump(2) + "\n");
    write_text(o.out + ".timeline.tsv", report.timeline_tsv());
  }
  std::cout << report.render();
  return kOk;
}

int cmd_tune(const Options& o) {
  const std::vector<Sequence> inputs = load_inputs(o);
  const ParamsFile pf = params_from(o);
  RuntimeConfig cfg = pf.runtime;
  const int n = o.lanes > 0 ? o.lanes : inputs.front().header.n_lanes;
  std::vector<PreparedSequence> prepared;
  for (Sequence seq : inputs) {
    if (seq.header.n_lanes != n && o.lanes == 0)
      throw ConfigError("tune: input sequences disagree on the lane count");
    seq.header.n_lanes = n;
    if (o.lane_width > 0) cfg.lane_width = o.lane_width;
    else cfg.lane_width = seq.header.lane_width_m;
    prepared.push_back(prepare_sequence(seq, cfg));
  }

  std::vector<PreparedSequence> train = prepared, test;
  if (!o.no_split) std::tie(train, test) = split_halves(prepared);

  const std::uint64_t seed = o.seed.value_or(1);
  const SearchSpace space;
  TunerResult result = random_search(space, train, cfg, n, o.budget, seed, o.jobs);
  if (o.refine > 0) {
    TunerResult refined = coordinate_refine(result.best_params, space, train, cfg, o.refine, o.jobs);
    refined.trials.insert(refined.trials.begin(), result.trials.begin(), result.trials.end());
    refined.seed = seed;
    result = std::move(refined);
  }
  if (!o.out.empty()) {
    nlohmann::json j = result.to_json();
    if (!test.empty()) j["held_out_accuracy"] = objective(result.best_params, test, cfg);
    write_text(o.out, j.dump(2) + "\n");
  }
  std::cout << "# trials=" << result.trials.size() << " seed=" << seed << '\n';
  std::cout << "# train_accuracy=" << format_double(result.best_accuracy) << '\n';
  if (!test.empty())
    std::cout << "# held_out_accuracy=" << format_double(objective(result.best_params, test, cfg)) << '\n';
  std::cout << format_params(result.best_params, cfg);
  return kOk;
}

int cmd_map_lookup(const Options& o) {
  if (o.map.empty()) throw ConfigError("map-lookup requires --map");
  const MapExtract extract = load_extract(o.map);
  const MapMatch m = extract.lookup_lane_count({o.lat, o.lon}, o.map_radius);
  std::cout << "lanes=" << m.lane_count << " segment=" << m.segment_id << " distance_m=" << format_double(m.distance_m);
  if (m.lane_width) std::cout << " lane_width_m=" << format_double(*m.lane_width);
  std::cout << '\n';
  return kOk;
}

int cmd_presets(const Options& o) {
  if (o.preset_name.empty()) {
    for (const auto& name : list_presets()) std::cout << name << '\n';
    return kOk;
  }
  const ParamsFile pf = load_preset(o.preset_name);
  std::cout << format_params(pf.params, pf.runtime);
  return kOk;
}

int cmd_check(const Options& o) {
  const std::filesystem::path golden = o.golden.empty() ? default_golden_path() : std::filesystem::path(o.golden);
  if (o.write_golden) {
    write_text(golden.string(), format_summary(end_to_end_summary()));
    std::cout << "wrote " << golden.string() << '\n';
    return kOk;
  }
  const CheckReport report = end_to_end_check(golden);
  (report.pass ? std::cout : std::cerr) << report.message << '\n';
  return report.pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ego-lane estimation from noisy line detections with an HMM sensor-failure model", "lanehmm"};
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* cmd, bool allow_sim) {
    auto* in = cmd->add_option("--input", o.inputs, "detector log sequence");
    if (allow_sim) {
      auto* sim = cmd->add_option("--sim-config", o.sim_config, "simulate the input instead of reading it");
      in->excludes(sim);
      sim->excludes(in);
      cmd->add_option("--burst", o.bursts, "inject start:length:dropout|clutter into the simulation");
    }
  };
  auto add_params = [&](CLI::App* cmd) {
    auto* p = cmd->add_option("--params", o.params_file, "key=value parameter file");
    auto* pr = cmd->add_option("--preset", o.preset, "named parameter preset (see `presets`)");
    p->excludes(pr);
    pr->excludes(p);
  };
  auto add_geometry = [&](CLI::App* cmd) {
    cmd->add_option("--lanes", o.lanes, "lane count (overrides map and header)")->check(CLI::PositiveNumber);
    cmd->add_option("--lane-width", o.lane_width, "lane width in meters")->check(CLI::PositiveNumber);
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic sequence");
  simulate_cmd->add_option("--sim-config", o.sim_config, "simulator key=value config");
  simulate_cmd->add_option("--seed", o.seed, "random seed");
  simulate_cmd->add_option("--frames", o.frames, "number of frames")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--burst", o.bursts, "inject start:length:dropout|clutter");
  simulate_cmd->add_option("--out", o.out, "output sequence file")->required();
  add_geometry(simulate_cmd);

  auto* run_cmd = app.add_subcommand("run", "filter a sequence and score it against ground truth");
  add_input(run_cmd, true);
  add_params(run_cmd);
  add_geometry(run_cmd);
  run_cmd->add_option("--map", o.map, "map extract for the lane-count prior");
  run_cmd->add_option("--map-radius", o.map_radius, "map search radius in meters")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", o.out, "results file (also writes .metrics.json and .timeline.tsv)");
  run_cmd->add_option("--trace", o.trace, "per-frame filter trace (JSON lines)");
  run_cmd->add_option("--seed", o.seed, "simulator seed override");
  run_cmd->add_flag("--use-logged-lri", o.use_logged_lri, "trust lri/valid fields present in the log");

  auto* tune_cmd = app.add_subcommand("tune", "random search (+ optional refinement) of the model parameters");
  add_input(tune_cmd, true);
  add_params(tune_cmd);
  add_geometry(tune_cmd);
  tune_cmd->add_option("--budget", o.budget, "random-search trials")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--refine", o.refine, "coordinate refinement cycles")->check(CLI::NonNegativeNumber);
  tune_cmd->add_option("--seed", o.seed, "search seed");
  tune_cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  tune_cmd->add_flag("--no-split", o.no_split, "tune on whole sequences instead of first halves");
  tune_cmd->add_option("--out", o.out, "trial log (JSON)");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a results file against a sequence's ground truth");
  eval_cmd->add_option("--input", o.inputs, "annotated sequence")->required();
  eval_cmd->add_option("--results", o.results, "results file written by `run --out`")->required();
  add_params(eval_cmd);
  eval_cmd->add_option("--out", o.out, "comparison report (JSON)");

  auto* map_cmd = app.add_subcommand("map-lookup", "lane count of the nearest mapped road");
  map_cmd->add_option("--map", o.map, "map extract")->required();
  map_cmd->add_option("--lat", o.lat, "latitude in degrees")->required();
  map_cmd->add_option("--lon", o.lon, "longitude in degrees")->required();
  map_cmd->add_option("--map-radius", o.map_radius, "search radius in meters")->check(CLI::PositiveNumber);

  auto* presets_cmd = app.add_subcommand("presets", "list presets, or print one");
  presets_cmd->add_option("name", o.preset_name, "preset to print");

  auto* check_cmd = app.add_subcommand("check", "regenerate the seeded default run and compare with the golden summary");
  check_cmd->add_option("--golden", o.golden, "golden summary file");
  check_cmd->add_flag("--write-golden", o.write_golden, "overwrite the golden file instead of checking")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(o);
    if (*run_cmd) return cmd_run(o);
    if (*tune_cmd) return cmd_tune(o);
    if (*eval_cmd) return cmd_evaluate(o);
    if (*map_cmd) return cmd_map_lookup(o);
    if (*presets_cmd) return cmd_presets(o);
    if (*check_cmd) return cmd_check(o);
  } catch (const UsageError& e) {
    std::cerr << "lanehmm: " << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "lanehmm: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const IoError& e) {
    std::cerr << "lanehmm: i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const NotFoundError& e) {
    std::cerr << "lanehmm: not found: " << e.what() << '\n';
    return kNotFound;
  } catch (const ConfigError& e) {
    std::cerr << "lanehmm: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "lanehmm: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "lanehmm: error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
