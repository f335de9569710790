#include "lanehmm/map_provider.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

#include "lanehmm/dataset.hpp"
#include "lanehmm/error.hpp"

namespace lanehmm {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegree = kEarthRadiusM * kDegToRad;
constexpr double kCellDeg = 0.01;
constexpr double kTieEpsilonM = 1e-9;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

double point_segment_distance_m(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  // Projection centered halfway between the query and the segment midpoint,
  // so that swapping a degenerate segment with the query is symmetric.
  const double ref_lat = (p.lat + (a.lat + b.lat) / 2.0) / 2.0;
  const double kx = kMetersPerDegree * std::cos(ref_lat * kDegToRad);
  const double ky = kMetersPerDegree;
  const double ax = (a.lon - p.lon) * kx, ay = (a.lat - p.lat) * ky;
  const double bx = (b.lon - p.lon) * kx, by = (b.lat - p.lat) * ky;
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);
  const double cx = ax + t * dx, cy = ay + t * dy;
  return std::sqrt(cx * cx + cy * cy);
}

MapExtract::CellKey MapExtract::cell_of(double lat, double lon) {
  return {static_cast<long long>(std::floor(lat / kCellDeg)), static_cast<long long>(std::floor(lon / kCellDeg))};
}

MapExtract::MapExtract(std::vector<RoadSegment> segments) : segments_(std::move(segments)) {
  std::set<std::string> ids;
  for (const auto& seg : segments_) {
    if (!ids.insert(seg.id).second) throw ParameterError("map extract: duplicate segment id '" + seg.id + "'");
    if (seg.polyline.size() < 2) throw ParameterError("map extract: segment '" + seg.id + "' has fewer than 2 points");
    if (seg.lane_count < 1) throw ParameterError("map extract: segment '" + seg.id + "' has lane_count < 1");
  }
  // Index every segment under each cell its bounding box touches.
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    double lat_lo = 90, lat_hi = -90, lon_lo = 180, lon_hi = -180;
    for (const auto& pt : segments_[s].polyline) {
      lat_lo = std::min(lat_lo, pt.lat);
      lat_hi = std::max(lat_hi, pt.lat);
      lon_lo = std::min(lon_lo, pt.lon);
      lon_hi = std::max(lon_hi, pt.lon);
    }
    const CellKey lo = cell_of(lat_lo, lon_lo), hi = cell_of(lat_hi, lon_hi);
    for (long long i = lo.lat; i <= hi.lat; ++i)
      for (long long j = lo.lon; j <= hi.lon; ++j) grid_[{i, j}].push_back(s);
  }
}

MapMatch MapExtract::lookup_lane_count(const GeoPoint& position, double radius_m) const {
  if (!(radius_m > 0.0)) throw ParameterError("lookup_lane_count: radius must be positive");

  const double lat_span = radius_m / kMetersPerDegree;
  const double cos_lat = std::max(std::cos(std::min(89.0, std::abs(position.lat) + lat_span) * kDegToRad), 1e-6);
  const double lon_span = radius_m / (kMetersPerDegree * cos_lat);
  const CellKey lo = cell_of(position.lat - lat_span, position.lon - lon_span);
  const CellKey hi = cell_of(position.lat + lat_span, position.lon + lon_span);

  std::vector<std::size_t> candidates;
  const double cells = static_cast<double>(hi.lat - lo.lat + 1) * static_cast<double>(hi.lon - lo.lon + 1);
  if (cells > static_cast<double>(grid_.size())) {
    candidates.resize(segments_.size());
    for (std::size_t s = 0; s < segments_.size(); ++s) candidates[s] = s;
  } else {
    for (long long i = lo.lat; i <= hi.lat; ++i)
      for (long long j = lo.lon; j <= hi.lon; ++j)
        if (const auto it = grid_.find({i, j}); it != grid_.end())
          candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }

  const RoadSegment* best = nullptr;
  double best_d = 0.0;
  for (const std::size_t s : candidates) {
    const auto& seg = segments_[s];
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < seg.polyline.size(); ++k)
      d = std::min(d, point_segment_distance_m(position, seg.polyline[k], seg.polyline[k + 1]));
    if (d > radius_m) continue;
    if (best == nullptr || d < best_d - kTieEpsilonM ||
        (std::abs(d - best_d) <= kTieEpsilonM && seg.id < best->id)) {
      best = &seg;
      best_d = d;
    }
  }
  if (best == nullptr) throw NotFoundError("no road segment within " + format_double(radius_m) + " m");
  return {best->lane_count, best->id, best_d, best->lane_width};
}

MapExtract parse_extract(std::istream& in, const std::string& source_name) {
  std::vector<RoadSegment> segments;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto fields = split(line, '|');
    if (fields.size() != 4) throw ParseError(source_name, line_no, "expected 4 '|'-separated fields");
    RoadSegment seg;
    seg.id = trim(fields[0]);
    if (seg.id.empty()) throw ParseError(source_name, line_no, "empty segment id");
    if (!ids.insert(seg.id).second) throw ParseError(source_name, line_no, "duplicate segment id '" + seg.id + "'");
    try {
      seg.lane_count = static_cast<int>(parse_int(trim(fields[1])));
    } catch (const std::invalid_argument&) {
      throw ParseError(source_name, line_no, "field lane_count: not an integer");
    }
    if (seg.lane_count < 1) throw ParseError(source_name, line_no, "field lane_count: must be >= 1");
    if (const auto w = trim(fields[2]); !w.empty()) {
      try {
        seg.lane_width = parse_double(w);
      } catch (const std::invalid_argument&) {
        throw ParseError(source_name, line_no, "field lane_width_m: not a number");
      }
      if (!(*seg.lane_width > 0.0)) throw ParseError(source_name, line_no, "field lane_width_m: must be positive");
    }
    for (const auto& pt : split(trim(fields[3]), ';')) {
      const auto ll = split(trim(pt), ',');
      if (ll.size() != 2) throw ParseError(source_name, line_no, "field polyline: expected lat,lon pairs");
      try {
        seg.polyline.push_back({parse_double(trim(ll[0])), parse_double(trim(ll[1]))});
      } catch (const std::invalid_argument&) {
        throw ParseError(source_name, line_no, "field polyline: bad coordinate '" + pt + "'");
      }
      const auto& p = seg.polyline.back();
      if (std::abs(p.lat) > 90.0 || std::abs(p.lon) > 180.0)
        throw ParseError(source_name, line_no, "field polyline: coordinate out of range");
    }
    if (seg.polyline.size() < 2) throw ParseError(source_name, line_no, "field polyline: need at least 2 points");
    segments.push_back(std::move(seg));
  }
  return MapExtract(std::move(segments));
}

MapExtract load_extract(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map extract " + path.string());
  return parse_extract(in, path.string());
}

}  // namespace lanehmm
