#ifndef LANEHMM_DATASET_HPP
#define LANEHMM_DATASET_HPP

// Detector-log sequences and result traces. See docs/format.md.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lanehmm/map_provider.hpp"

namespace lanehmm {

inline constexpr int kFormatVersion = 1;

struct SequenceHeader {
  int n_lanes = 3;
  double lane_width_m = 3.5;
  double fps = 10.0;
  std::string source;

  friend bool operator==(const SequenceHeader&, const SequenceHeader&) = default;
};

struct LineRecord {
  std::string track_id;
  double offset_m = 0.0;
  bool continuous = false;
  bool detected = true;
  // Only present in logs converted from detectors that report their own
  // reliability index.
  std::optional<int> lri;
  std::optional<bool> valid;

  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

struct FrameRecord {
  long long frame_id = 0;
  double timestamp_s = 0.0;
  std::optional<GeoPoint> gnss;
  std::vector<LineRecord> lines;
  std::optional<int> gt_lane;  // 1 = leftmost
  bool crossing = false;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct Sequence {
  SequenceHeader header;
  std::vector<FrameRecord> frames;
};

struct ResultRecord {
  long long frame_id = 0;
  int map_lane = 1;
  std::vector<double> lane_marginal;
  double sensor_ok_prob = 0.0;
  std::vector<double> tentative;
  double wor_frac = 0.0;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

struct ReadOptions {
  // Enforce increasing frame ids and gt_lane in [1, n] while parsing.
  bool strict = true;
};

/// Streaming reader; the header is parsed on construction.
class SequenceReader {
 public:
  explicit SequenceReader(const std::filesystem::path& path, ReadOptions options = {});
  SequenceReader(std::istream& in, std::string source_name, ReadOptions options = {});

  const SequenceHeader& header() const { return header_; }
  /// Next frame, or nullopt at end of input. Throws ParseError.
  std::optional<FrameRecord> next();

 private:
  void read_header();

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  std::string name_;
  ReadOptions options_;
  SequenceHeader header_;
  std::size_t line_no_ = 0;
  std::optional<long long> last_id_;
};

Sequence read_sequence(const std::filesystem::path& path, ReadOptions options = {});
Sequence read_sequence(std::istream& in, const std::string& source_name = "<sequence>", ReadOptions options = {});

void write_sequence(std::ostream& out, const SequenceHeader& header, std::span<const FrameRecord> frames);
void write_sequence(const std::filesystem::path& path, const SequenceHeader& header,
                    std::span<const FrameRecord> frames);

std::string format_frame(const FrameRecord& frame);
std::string format_header(const SequenceHeader& header, const std::string& kind = "sequence");

void write_results(std::ostream& out, const SequenceHeader& header, std::span<const ResultRecord> results);
void write_results(const std::filesystem::path& path, const SequenceHeader& header,
                   std::span<const ResultRecord> results);

struct ResultsFile {
  SequenceHeader header;
  std::vector<ResultRecord> records;
};
ResultsFile read_results(std::istream& in, const std::string& source_name = "<results>");
ResultsFile read_results(const std::filesystem::path& path);

struct ValidationIssue {
  enum class Severity { kWarning, kError };
  Severity severity = Severity::kError;
  std::size_t record = 0;  // 0-based index into the frame list
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  std::size_t frames = 0;
  double crossing_fraction = 0.0;
  double no_detection_fraction = 0.0;
  double annotated_fraction = 0.0;

  bool ok() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_sequence(const SequenceHeader& header, std::span<const FrameRecord> frames);

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double value);
/// Locale-independent parse of a full token; throws std::invalid_argument.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

}  // namespace lanehmm

#endif  // LANEHMM_DATASET_HPP
