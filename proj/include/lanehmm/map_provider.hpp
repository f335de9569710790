#ifndef LANEHMM_MAP_PROVIDER_HPP
#define LANEHMM_MAP_PROVIDER_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lanehmm {

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct RoadSegment {
  std::string id;
  int lane_count = 1;
  std::optional<double> lane_width;  // meters
  std::vector<GeoPoint> polyline;
};

struct MapMatch {
  int lane_count = 0;
  std::string segment_id;
  double distance_m = 0.0;
  std::optional<double> lane_width;
};

/// Distance in meters from `p` to the segment [a, b], using an
/// equirectangular projection centered between the query and the segment.
/// Accurate to well under 1% for sub-kilometer distances.
double point_segment_distance_m(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b);

/// Immutable collection of road segments with a uniform lat/lon grid index.
class MapExtract {
 public:
  MapExtract() = default;
  /// Throws ParameterError on duplicate ids or malformed segments.
  explicit MapExtract(std::vector<RoadSegment> segments);

  /// Nearest segment within `radius_m`; ties (within 1e-9 m) go to the
  /// lexicographically smallest id. Throws NotFoundError when nothing is in
  /// range.
  MapMatch lookup_lane_count(const GeoPoint& position, double radius_m) const;

  const std::vector<RoadSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

 private:
  struct CellKey {
    long long lat;
    long long lon;
    friend bool operator==(const CellKey&, const CellKey&) = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
      return std::hash<long long>{}(k.lat * 1000003LL) ^ std::hash<long long>{}(k.lon);
    }
  };

  static CellKey cell_of(double lat, double lon);

  std::vector<RoadSegment> segments_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid_;
};

/// Extract format: one segment per line,
///   id | lane_count | lane_width_m or empty | lat,lon;lat,lon;...
/// `#` starts a comment. Errors carry line numbers.
MapExtract parse_extract(std::istream& in, const std::string& source_name = "<extract>");
MapExtract load_extract(const std::filesystem::path& path);

}  // namespace lanehmm

#endif  // LANEHMM_MAP_PROVIDER_HPP
