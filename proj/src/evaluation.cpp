#include "lanehmm/evaluation.hpp"

#include <cstdlib>
#include <iomanip>
#include <locale>
#include <map>
#include <numeric>
#include <sstream>

#include "lanehmm/error.hpp"

namespace lanehmm {

std::vector<GroundTruth> ground_truth(std::span<const FrameRecord> frames) {
  std::vector<GroundTruth> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back({f.frame_id, f.gt_lane, f.crossing});
  return out;
}

long long CategoryHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }

CategoryHistogram categories_from_confusion(const ConfusionMatrix& confusion) {
  const int n = confusion.lanes();
  CategoryHistogram hist{std::vector<long long>(static_cast<std::size_t>(n) + 1, 0)};
  for (int est = 0; est < n; ++est)
    for (int gt = 0; gt < n; ++gt) hist.counts[static_cast<std::size_t>(std::abs(est - gt))] += confusion.counts(est, gt);
  hist.counts.back() = confusion.counts.row(n).sum();
  return hist;
}

std::optional<int> baseline_lane(const TentativeVector& tentative) {
  if (tentative.size() == 0) return std::nullopt;
  Eigen::Index best = 0;
  const double top = tentative.maxCoeff(&best);
  if (top <= 0.0) return std::nullopt;
  if ((tentative.array() == top).count() > 1) return std::nullopt;
  return static_cast<int>(best) + 1;
}

std::vector<LaneEstimate> detector_baseline(std::span<const long long> frame_ids,
                                            std::span<const std::vector<TrackedLine>> frames,
                                            const HmmParams& params, const RuntimeConfig& cfg) {
  if (frame_ids.size() != frames.size()) throw ConfigError("detector_baseline: frame id / frame count mismatch");
  std::vector<LaneEstimate> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    out.push_back({frame_ids[i], baseline_lane(build_tentative(frames[i], params, cfg))});
  return out;
}

Metrics evaluate(std::span<const LaneEstimate> estimates, std::span<const GroundTruth> truth, int n) {
  if (n < 1) throw ParameterError("evaluate: lane count must be >= 1");
  if (estimates.size() != truth.size())
    throw ConfigError("evaluate: " + std::to_string(estimates.size()) + " estimates vs " +
                      std::to_string(truth.size()) + " ground-truth frames");
  std::map<long long, const LaneEstimate*> by_id;
  for (const auto& e : estimates)
    if (!by_id.emplace(e.frame_id, &e).second)
      throw ConfigError("evaluate: duplicate estimate for frame " + std::to_string(e.frame_id));

  Metrics m;
  m.confusion.counts.setZero(n + 1, n);
  for (const auto& t : truth) {
    const auto it = by_id.find(t.frame_id);
    if (it == by_id.end()) throw ConfigError("evaluate: no estimate for frame " + std::to_string(t.frame_id));
    if (!t.gt_lane) {
      ++m.missing_gt;
      continue;
    }
    if (t.crossing) {
      ++m.skipped_crossing;
      continue;
    }
    if (*t.gt_lane < 1 || *t.gt_lane > n) throw ConfigError("evaluate: gt lane out of range");
    const auto& lane = it->second->lane;
    if (lane && (*lane < 1 || *lane > n)) throw ConfigError("evaluate: estimated lane out of range");
    const int row = lane ? *lane - 1 : n;
    ++m.confusion.counts(row, *t.gt_lane - 1);
    ++m.evaluated;
  }
  m.categories = categories_from_confusion(m.confusion);
  m.accuracy = m.evaluated > 0 ? static_cast<double>(m.categories.correct()) / static_cast<double>(m.evaluated) : 0.0;
  return m;
}

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json confusion = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.confusion.counts.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.confusion.counts.cols(); ++c) row.push_back(m.confusion.counts(r, c));
    confusion.push_back(row);
  }
  return {{"accuracy", m.accuracy},
          {"evaluated", m.evaluated},
          {"skipped_crossing", m.skipped_crossing},
          {"missing_gt", m.missing_gt},
          {"confusion", confusion},
          {"categories", m.categories.counts}};
}

Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.evaluated = j.at("evaluated").get<long long>();
  m.skipped_crossing = j.at("skipped_crossing").get<long long>();
  m.missing_gt = j.at("missing_gt").get<long long>();
  const auto& rows = j.at("confusion");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = nr > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  m.confusion.counts.setZero(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r)
    for (Eigen::Index c = 0; c < nc; ++c) m.confusion.counts(r, c) = rows.at(r).at(c).get<long long>();
  m.categories.counts = j.at("categories").get<std::vector<long long>>();
  return m;
}

ComparisonReport compare(const Metrics& model, const Metrics& baseline, std::span<const LaneEstimate> model_estimates,
                         std::span<const LaneEstimate> baseline_estimates, std::span<const GroundTruth> truth) {
  if (model.categories.counts.size() != baseline.categories.counts.size())
    throw ConfigError("compare: metrics for different lane counts");
  ComparisonReport report;
  report.model = model;
  report.baseline = baseline;
  report.accuracy_delta = model.accuracy - baseline.accuracy;
  report.category_deltas.resize(model.categories.counts.size());
  for (std::size_t i = 0; i < report.category_deltas.size(); ++i)
    report.category_deltas[i] = model.categories.counts[i] - baseline.categories.counts[i];

  if (!truth.empty()) {
    if (model_estimates.size() != truth.size() || baseline_estimates.size() != truth.size())
      throw ConfigError("compare: timeline streams have different lengths");
    std::map<long long, std::optional<int>> model_by_id, base_by_id;
    for (const auto& e : model_estimates) model_by_id[e.frame_id] = e.lane;
    for (const auto& e : baseline_estimates) base_by_id[e.frame_id] = e.lane;
    for (const auto& t : truth) {
      const auto m = model_by_id.find(t.frame_id);
      const auto b = base_by_id.find(t.frame_id);
      if (m == model_by_id.end() || b == base_by_id.end())
        throw ConfigError("compare: frame " + std::to_string(t.frame_id) + " missing from an estimate stream");
      report.timeline.push_back({t.frame_id, t.gt_lane, t.crossing, b->second, m->second});
    }
  }
  return report;
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json j{{"model", lanehmm::to_json(model)},
                   {"baseline", lanehmm::to_json(baseline)},
                   {"accuracy_delta", accuracy_delta},
                   {"category_deltas", category_deltas}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : timeline) {
    auto opt = [](const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    rows.push_back({r.frame_id, opt(r.gt_lane), r.crossing, opt(r.baseline), opt(r.model)});
  }
  j["timeline"] = rows;
  return j;
}

ComparisonReport ComparisonReport::from_json(const nlohmann::json& j) {
  ComparisonReport r;
  r.model = metrics_from_json(j.at("model"));
  r.baseline = metrics_from_json(j.at("baseline"));
  r.accuracy_delta = j.at("accuracy_delta").get<double>();
  r.category_deltas = j.at("category_deltas").get<std::vector<long long>>();
  auto opt = [](const nlohmann::json& v) { return v.is_null() ? std::optional<int>() : std::optional<int>(v.get<int>()); };
  if (j.contains("timeline")) {
    for (const auto& row : j.at("timeline"))
      r.timeline.push_back({row.at(0).get<long long>(), opt(row.at(1)), row.at(2).get<bool>(), opt(row.at(3)),
                            opt(row.at(4))});
  }
  return r;
}

std::string ComparisonReport::render() const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::fixed << std::setprecision(4);
  out << "evaluated frames   " << model.evaluated << " (skipped crossing " << model.skipped_crossing
      << ", without gt " << model.missing_gt << ")\n";
  out << "model accuracy     " << model.accuracy << '\n';
  out << "baseline accuracy  " << baseline.accuracy << '\n';
  out << "delta              " << std::showpos << accuracy_delta << std::noshowpos << '\n';
  out << "category           model    baseline   delta\n";
  for (std::size_t i = 0; i < category_deltas.size(); ++i) {
    const bool none = i + 1 == category_deltas.size();
    const std::string label = none ? "no assignment" : i == 0 ? "correct" : "off by " + std::to_string(i);
    out << std::left << std::setw(18) << label << std::right << std::setw(6) << model.categories.counts[i]
        << std::setw(12) << baseline.categories.counts[i] << std::setw(8) << category_deltas[i] << '\n';
  }
  return out.str();
}

std::string ComparisonReport::timeline_tsv() const {
  auto cell = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("-"); };
  std::string out = "frame\tgt\tcrossing\tbaseline\tmodel\n";
  for (const auto& r : timeline) {
    out += std::to_string(r.frame_id) + '\t' + cell(r.gt_lane) + '\t' + (r.crossing ? "1" : "0") + '\t' +
           cell(r.baseline) + '\t' + cell(r.model) + '\n';
  }
  return out;
}

}  // namespace lanehmm
