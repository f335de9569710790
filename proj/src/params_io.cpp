#include "lanehmm/params_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <locale>
#include <set>
#include <sstream>

#include "lanehmm/dataset.hpp"
#include "lanehmm/error.hpp"

#ifndef LANEHMM_PRESET_DIR_DEFAULT
#define LANEHMM_PRESET_DIR_DEFAULT "presets"
#endif

namespace lanehmm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source_name, line_no, "expected key=value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError(source_name, line_no, "empty key");
    if (value.empty()) throw ParseError(source_name, line_no, "empty value for '" + key + "'");
    if (out.contains(key)) throw ParseError(source_name, line_no, "duplicate key '" + key + "'");
    out.emplace(std::move(key), std::move(value));
  }
  return out;
}

ParamsFile parse_params(std::istream& in, const std::string& source_name) {
  const auto kv = parse_key_values(in, source_name);
  ParamsFile file;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "n") {
        file.params.n = static_cast<int>(parse_int(value));
        file.has_lane_count = true;
      } else if (key == "sigma1") {
        file.params.sigma1 = parse_double(value);
      } else if (key == "sigma2") {
        file.params.sigma2 = parse_double(value);
      } else if (key == "p1") {
        file.params.p1 = parse_double(value);
      } else if (key == "p2") {
        file.params.p2 = parse_double(value);
      } else if (key == "p3") {
        file.params.p3 = parse_double(value);
      } else if (key == "p4") {
        file.params.p4 = parse_double(value);
      } else if (key == "bv") {
        file.params.bv = parse_double(value);
      } else if (key == "lane_width") {
        file.runtime.lane_width = parse_double(value);
      } else if (key == "compat_tolerance") {
        file.runtime.compat_tolerance = parse_double(value);
      } else if (key == "lri_window") {
        file.runtime.lri_window = static_cast<int>(parse_int(value));
      } else if (key == "hysteresis_fraction") {
        file.runtime.hysteresis_fraction = parse_double(value);
      } else {
        throw ParseError(source_name + ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError(source_name + ": bad value '" + value + "' for '" + key + "'");
    }
  }
  file.params.validate();
  file.runtime.validate();
  return file;
}

ParamsFile load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parameter file " + path.string());
  return parse_params(in, path.string());
}

std::string format_params(const HmmParams& p, const RuntimeConfig& r) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "n=" << p.n << '\n'
      << "sigma1=" << format_double(p.sigma1) << '\n'
      << "sigma2=" << format_double(p.sigma2) << '\n'
      << "p1=" << format_double(p.p1) << '\n'
      << "p2=" << format_double(p.p2) << '\n'
      << "p3=" << format_double(p.p3) << '\n'
      << "p4=" << format_double(p.p4) << '\n'
      << "bv=" << format_double(p.bv) << '\n'
      << "lane_width=" << format_double(r.lane_width) << '\n'
      << "compat_tolerance=" << format_double(r.compat_tolerance) << '\n'
      << "lri_window=" << r.lri_window << '\n'
      << "hysteresis_fraction=" << format_double(r.hysteresis_fraction) << '\n';
  return out.str();
}

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = {
      // Italy, 4 lanes
      {"italy-run01", "mono line", {4, 0.336, 0.696, 0.895, 0.894, 0.690, 0.461, 7}},
      {"italy-run02", "stereo line", {4, 0.481, 0.296, 0.160, 0.970, 0.613, 0.975, 9}},
      {"italy-run03", "mono clothoid", {4, 0.407, 0.360, 0.853, 0.993, 0.303, 0.640, 4}},
      {"italy-run04", "stereo clothoid", {4, 0.386, 0.598, 0.906, 0.994, 0.311, 0.595, 7}},
      {"italy-run05", "MLD", {4, 0.324, 0.707, 0.223, 0.963, 0.779, 0.873, 1}},
      // Spain, 3 lanes
      {"spain-run06", "mono line", {3, 0.407, 0.258, 0.692, 0.590, 0.180, 0.459, 9}},
      {"spain-run07", "stereo line", {3, 0.364, 0.460, 0.640, 0.556, 0.409, 0.812, 8}},
      {"spain-run08", "mono clothoid", {3, 0.313, 0.532, 0.092, 0.255, 0.971, 0.605, 7}},
      {"spain-run09", "stereo clothoid", {3, 0.382, 0.483, 0.941, 0.977, 0.885, 0.984, 9}},
      {"spain-run10", "MLD", {3, 0.343, 2.907, 0.283, 0.991, 0.903, 0.060, 5}},
  };
  return presets;
}

std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("LANEHMM_PRESET_DIR"); env != nullptr && *env != '\0') return env;
  return LANEHMM_PRESET_DIR_DEFAULT;
}

ParamsFile load_preset(const std::string& name) {
  const auto file = preset_directory() / (name + ".params");
  if (std::filesystem::is_regular_file(file)) return load_params(file);
  const auto& presets = builtin_presets();
  const auto it = std::find_if(presets.begin(), presets.end(), [&](const Preset& p) { return p.name == name; });
  if (it == presets.end()) throw NotFoundError("unknown preset '" + name + "'");
  ParamsFile out;
  out.params = it->params;
  out.has_lane_count = true;
  return out;
}

std::vector<std::string> list_presets() {
  std::set<std::string> names;
  for (const auto& p : builtin_presets()) names.insert(p.name);
  std::error_code ec;
  const auto dir = preset_directory();
  if (std::filesystem::is_directory(dir, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
      if (entry.path().extension() == ".params") names.insert(entry.path().stem().string());
  }
  return {names.begin(), names.end()};
}

}  // namespace lanehmm
