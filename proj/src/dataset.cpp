#include "lanehmm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "lanehmm/error.hpp"

namespace lanehmm {

namespace {

constexpr double kMaxOffsetM = 50.0;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool is_blank_or_comment(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

// Splits "key=value" tokens; value may be empty.
std::map<std::string_view, std::string_view> tokens_to_map(const std::vector<std::string_view>& tokens,
                                                           const std::string& where, std::size_t line_no) {
  std::map<std::string_view, std::string_view> kv;
  for (const auto tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ParseError(where, line_no, "expected key=value, got '" + std::string(tok) + "'");
    if (!kv.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second)
      throw ParseError(where, line_no, "duplicate key '" + std::string(tok.substr(0, eq)) + "'");
  }
  return kv;
}

bool parse_flag(std::string_view token) {
  if (token == "1") return true;
  if (token == "0") return false;
  throw std::invalid_argument("expected 0 or 1");
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view token) {
  std::vector<double> out;
  if (token.empty()) return out;
  for (const auto part : split(token, ',')) out.push_back(parse_double(part));
  return out;
}

// Parses the header line "<magic> format=1 n_lanes=.. lane_width_m=.. fps=.. source=<rest of line>".
SequenceHeader parse_header_line(std::string_view line, std::string_view magic, const std::string& where,
                                 std::size_t line_no) {
  std::string_view rest = line;
  std::string source;
  if (const auto pos = rest.find(" source="); pos != std::string_view::npos) {
    source = std::string(rest.substr(pos + 8));
    while (!source.empty() && (source.back() == '\r' || source.back() == ' ')) source.pop_back();
    rest = rest.substr(0, pos);
  }
  auto tokens = split_ws(rest);
  if (tokens.empty() || tokens.front() != magic)
    throw ParseError(where, line_no, "missing header: expected a line starting with '" + std::string(magic) + "'");
  tokens.erase(tokens.begin());
  const auto kv = tokens_to_map(tokens, where, line_no);
  SequenceHeader header;
  header.source = std::move(source);
  bool has_format = false, has_lanes = false;
  try {
    for (const auto& [key, value] : kv) {
      if (key == "format") {
        if (parse_int(value) != kFormatVersion)
          throw ParseError(where, line_no, "unsupported format version '" + std::string(value) + "'");
        has_format = true;
      } else if (key == "n_lanes") {
        header.n_lanes = static_cast<int>(parse_int(value));
        has_lanes = true;
      } else if (key == "lane_width_m") {
        header.lane_width_m = parse_double(value);
      } else if (key == "fps") {
        header.fps = parse_double(value);
      } else {
        throw ParseError(where, line_no, "unknown header key '" + std::string(key) + "'");
      }
    }
  } catch (const std::invalid_argument&) {
    throw ParseError(where, line_no, "malformed header value");
  }
  if (!has_format) throw ParseError(where, line_no, "header lacks format=");
  if (!has_lanes) throw ParseError(where, line_no, "header lacks n_lanes=");
  if (header.n_lanes < 1) throw ParseError(where, line_no, "n_lanes must be >= 1");
  if (!(header.fps > 0.0)) throw ParseError(where, line_no, "fps must be positive");
  if (!(header.lane_width_m > 0.0)) throw ParseError(where, line_no, "lane_width_m must be positive");
  return header;
}

LineRecord parse_line_item(std::string_view item) {
  const auto f = split(item, ',');
  if (f.size() != 4 && f.size() != 6) throw std::invalid_argument("line item needs 4 or 6 fields");
  LineRecord rec;
  rec.track_id = std::string(f[0]);
  if (rec.track_id.empty()) throw std::invalid_argument("empty track id");
  rec.offset_m = parse_double(f[1]);
  rec.continuous = parse_flag(f[2]);
  rec.detected = parse_flag(f[3]);
  if (f.size() == 6) {
    rec.lri = static_cast<int>(parse_int(f[4]));
    rec.valid = parse_flag(f[5]);
  }
  return rec;
}

FrameRecord parse_frame_line(std::string_view line, const std::string& where, std::size_t line_no) {
  const auto kv = tokens_to_map(split_ws(line), where, line_no);
  FrameRecord frame;
  bool has_id = false, has_t = false, has_lines = false;
  std::string_view current;
  try {
    for (const auto& [key, value] : kv) {
      current = key;
      if (key == "frame") {
        frame.frame_id = parse_int(value);
        has_id = true;
      } else if (key == "t") {
        frame.timestamp_s = parse_double(value);
        has_t = true;
      } else if (key == "gnss") {
        if (value != "-") {
          const auto ll = split(value, ',');
          if (ll.size() != 2) throw std::invalid_argument("gnss needs lat,lon");
          frame.gnss = GeoPoint{parse_double(ll[0]), parse_double(ll[1])};
        }
      } else if (key == "gt") {
        if (value != "-") frame.gt_lane = static_cast<int>(parse_int(value));
      } else if (key == "crossing") {
        frame.crossing = parse_flag(value);
      } else if (key == "lines") {
        has_lines = true;
        if (!value.empty())
          for (const auto item : split(value, ';')) frame.lines.push_back(parse_line_item(item));
      } else {
        throw ParseError(where, line_no, "unknown frame key '" + std::string(key) + "'");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(where, line_no, "field '" + std::string(current) + "': " + e.what());
  }
  if (!has_id || !has_t || !has_lines) throw ParseError(where, line_no, "frame record needs frame=, t= and lines=");
  std::set<std::string_view> ids;
  for (const auto& l : frame.lines) {
    if (!ids.insert(l.track_id).second) throw ParseError(where, line_no, "duplicate track id '" + l.track_id + "'");
    if (!std::isfinite(l.offset_m) || std::abs(l.offset_m) >= kMaxOffsetM)
      throw ParseError(where, line_no, "offset of '" + l.track_id + "' outside +-50 m");
  }
  return frame;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) throw std::invalid_argument("empty number");
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite number: '" + std::string(token) + "'");
  return value;
}

long long parse_int(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) throw std::invalid_argument("empty integer");
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  return value;
}

// ---------------------------------------------------------------------------
// Sequences

SequenceReader::SequenceReader(const std::filesystem::path& path, ReadOptions options)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()), name_(path.string()), options_(options) {
  if (!*owned_) throw IoError("cannot open sequence " + name_);
  read_header();
}

SequenceReader::SequenceReader(std::istream& in, std::string source_name, ReadOptions options)
    : in_(&in), name_(std::move(source_name)), options_(options) {
  read_header();
}

void SequenceReader::read_header() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (is_blank_or_comment(line)) continue;
    header_ = parse_header_line(line, "lanehmm-sequence", name_, line_no_);
    return;
  }
  throw ParseError(name_, line_no_, "missing header");
}

std::optional<FrameRecord> SequenceReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (is_blank_or_comment(line)) continue;
    FrameRecord frame = parse_frame_line(line, name_, line_no_);
    if (options_.strict) {
      if (last_id_ && frame.frame_id <= *last_id_)
        throw ParseError(name_, line_no_, "frame id " + std::to_string(frame.frame_id) + " does not increase");
      if (frame.gt_lane && (*frame.gt_lane < 1 || *frame.gt_lane > header_.n_lanes))
        throw ParseError(name_, line_no_, "gt lane " + std::to_string(*frame.gt_lane) + " outside [1, " +
                                              std::to_string(header_.n_lanes) + "]");
    }
    last_id_ = frame.frame_id;
    return frame;
  }
  if (in_->bad()) throw IoError("read error in " + name_);
  return std::nullopt;
}

Sequence read_sequence(const std::filesystem::path& path, ReadOptions options) {
  SequenceReader reader(path, options);
  Sequence seq{reader.header(), {}};
  while (auto frame = reader.next()) seq.frames.push_back(std::move(*frame));
  return seq;
}

Sequence read_sequence(std::istream& in, const std::string& source_name, ReadOptions options) {
  SequenceReader reader(in, source_name, options);
  Sequence seq{reader.header(), {}};
  while (auto frame = reader.next()) seq.frames.push_back(std::move(*frame));
  return seq;
}

std::string format_header(const SequenceHeader& header, const std::string& kind) {
  std::string out = "lanehmm-" + kind + " format=" + std::to_string(kFormatVersion) +
                    " n_lanes=" + std::to_string(header.n_lanes) + " lane_width_m=" + format_double(header.lane_width_m) +
                    " fps=" + format_double(header.fps);
  if (!header.source.empty()) out += " source=" + header.source;
  return out;
}

std::string format_frame(const FrameRecord& frame) {
  std::string out = "frame=" + std::to_string(frame.frame_id) + " t=" + format_double(frame.timestamp_s);
  out += " gnss=";
  out += frame.gnss ? format_double(frame.gnss->lat) + "," + format_double(frame.gnss->lon) : "-";
  out += " gt=";
  out += frame.gt_lane ? std::to_string(*frame.gt_lane) : "-";
  out += frame.crossing ? " crossing=1" : " crossing=0";
  out += " lines=";
  for (std::size_t i = 0; i < frame.lines.size(); ++i) {
    const auto& l = frame.lines[i];
    if (i) out += ';';
    out += l.track_id + "," + format_double(l.offset_m) + (l.continuous ? ",1" : ",0") + (l.detected ? ",1" : ",0");
    if (l.lri) out += "," + std::to_string(*l.lri) + (l.valid.value_or(false) ? ",1" : ",0");
  }
  return out;
}

void write_sequence(std::ostream& out, const SequenceHeader& header, std::span<const FrameRecord> frames) {
  out << format_header(header, "sequence") << '\n';
  for (const auto& f : frames) out << format_frame(f) << '\n';
}

void write_sequence(const std::filesystem::path& path, const SequenceHeader& header,
                    std::span<const FrameRecord> frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write sequence " + path.string());
  write_sequence(out, header, frames);
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Results

void write_results(std::ostream& out, const SequenceHeader& header, std::span<const ResultRecord> results) {
  out << format_header(header, "results") << '\n';
  for (const auto& r : results) {
    out << "frame=" << std::to_string(r.frame_id) << " lane=" << std::to_string(r.map_lane) << " p=" << format_double(r.lane_marginal.empty()
                                                                                         ? 0.0
                                                                                         : r.lane_marginal[r.map_lane - 1])
        << " ok=" << format_double(r.sensor_ok_prob) << " marg=" << join_doubles(r.lane_marginal)
        << " tent=" << join_doubles(r.tentative) << " wor=" << format_double(r.wor_frac) << '\n';
  }
}

void write_results(const std::filesystem::path& path, const SequenceHeader& header,
                   std::span<const ResultRecord> results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write results " + path.string());
  write_results(out, header, results);
  if (!out) throw IoError("write failed for " + path.string());
}

ResultsFile read_results(std::istream& in, const std::string& source_name) {
  ResultsFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    if (!have_header) {
      file.header = parse_header_line(line, "lanehmm-results", source_name, line_no);
      have_header = true;
      continue;
    }
    const auto kv = tokens_to_map(split_ws(line), source_name, line_no);
    ResultRecord r;
    try {
      for (const auto& [key, value] : kv) {
        if (key == "frame") r.frame_id = parse_int(value);
        else if (key == "lane") r.map_lane = static_cast<int>(parse_int(value));
        else if (key == "p") (void)parse_double(value);  // derived from marg
        else if (key == "ok") r.sensor_ok_prob = parse_double(value);
        else if (key == "marg") r.lane_marginal = parse_doubles(value);
        else if (key == "tent") r.tentative = parse_doubles(value);
        else if (key == "wor") r.wor_frac = parse_double(value);
        else throw ParseError(source_name, line_no, "unknown result key '" + std::string(key) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    if (!kv.contains("frame") || !kv.contains("lane") || !kv.contains("marg"))
      throw ParseError(source_name, line_no, "result record needs frame=, lane= and marg=");
    if (static_cast<int>(r.lane_marginal.size()) != file.header.n_lanes)
      throw ParseError(source_name, line_no, "marginal length differs from n_lanes");
    if (r.map_lane < 1 || r.map_lane > file.header.n_lanes)
      throw ParseError(source_name, line_no, "lane outside [1, n_lanes]");
    file.records.push_back(std::move(r));
  }
  if (!have_header) throw ParseError(source_name, line_no, "missing header");
  return file;
}

ResultsFile read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results " + path.string());
  return read_results(in, path.string());
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const {
  for (const auto& issue : issues)
    if (issue.severity == ValidationIssue::Severity::kError) return false;
  return true;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok();
  j["frames"] = frames;
  j["crossing_fraction"] = crossing_fraction;
  j["no_detection_fraction"] = no_detection_fraction;
  j["annotated_fraction"] = annotated_fraction;
  j["issues"] = nlohmann::json::array();
  for (const auto& issue : issues) {
    j["issues"].push_back({{"severity", issue.severity == ValidationIssue::Severity::kError ? "error" : "warning"},
                           {"record", issue.record},
                           {"message", issue.message}});
  }
  return j;
}

ValidationReport validate_sequence(const SequenceHeader& header, std::span<const FrameRecord> frames) {
  using Severity = ValidationIssue::Severity;
  ValidationReport report;
  report.frames = frames.size();
  if (header.n_lanes < 1) report.issues.push_back({Severity::kError, 0, "header: n_lanes must be >= 1"});
  if (!(header.fps > 0.0)) report.issues.push_back({Severity::kError, 0, "header: fps must be positive"});

  std::map<long long, std::size_t> first_seen;
  std::size_t crossing = 0, no_detection = 0, annotated = 0, evaluable = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (const auto [it, inserted] = first_seen.emplace(f.frame_id, i); !inserted) {
      report.issues.push_back({Severity::kError, i,
                               "duplicate frame_id " + std::to_string(f.frame_id) + " at records " +
                                   std::to_string(it->second) + " and " + std::to_string(i)});
    } else if (i > 0 && f.frame_id < frames[i - 1].frame_id) {
      report.issues.push_back({Severity::kError, i,
                               "frame_id " + std::to_string(f.frame_id) + " decreases after " +
                                   std::to_string(frames[i - 1].frame_id)});
    }
    if (f.gt_lane) {
      ++annotated;
      if (*f.gt_lane < 1 || *f.gt_lane > header.n_lanes)
        report.issues.push_back({Severity::kError, i, "gt lane " + std::to_string(*f.gt_lane) + " out of range"});
      if (!f.crossing) ++evaluable;
    }
    if (f.crossing) ++crossing;
    bool any_detected = false;
    std::set<std::string_view> ids;
    for (const auto& l : f.lines) {
      any_detected = any_detected || l.detected;
      if (!ids.insert(l.track_id).second)
        report.issues.push_back({Severity::kError, i, "duplicate track id '" + l.track_id + "'"});
      if (!std::isfinite(l.offset_m) || std::abs(l.offset_m) >= kMaxOffsetM)
        report.issues.push_back({Severity::kError, i, "offset of '" + l.track_id + "' outside +-50 m"});
    }
    if (!any_detected) ++no_detection;
  }
  if (!frames.empty()) {
    const double total = static_cast<double>(frames.size());
    report.crossing_fraction = static_cast<double>(crossing) / total;
    report.no_detection_fraction = static_cast<double>(no_detection) / total;
    report.annotated_fraction = static_cast<double>(annotated) / total;
    if (annotated > 0 && annotated < frames.size())
      report.issues.push_back({Severity::kWarning, 0,
                               std::to_string(frames.size() - annotated) + " frames lack a gt lane"});
    if (evaluable == 0)
      report.issues.push_back({Severity::kWarning, 0, "no annotated non-crossing frame: evaluation would be empty"});
  }
  return report;
}

}  // namespace lanehmm
