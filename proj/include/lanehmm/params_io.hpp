#ifndef LANEHMM_PARAMS_IO_HPP
#define LANEHMM_PARAMS_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lanehmm/model.hpp"

namespace lanehmm {

/// Contents of a key-value parameter file. `n` is optional in the file; when
/// absent the caller resolves the lane count elsewhere (map, header, flag).
struct ParamsFile {
  HmmParams params;
  RuntimeConfig runtime;
  bool has_lane_count = false;
};

/// Parses `key=value` lines. Blank lines and `#` comments are ignored;
/// unknown keys are an error. Recognized keys: n, sigma1, sigma2, p1..p4, bv,
/// lane_width, compat_tolerance, lri_window, hysteresis_fraction.
ParamsFile parse_params(std::istream& in, const std::string& source_name = "<params>");
ParamsFile load_params(const std::filesystem::path& path);

/// Inverse of parse_params; values are printed in shortest round-trip form.
std::string format_params(const HmmParams& params, const RuntimeConfig& runtime = {});

/// Generic `key=value` reader shared by the parameter and simulator config
/// files. Duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source_name);

struct Preset {
  std::string name;
  std::string detector;  // detector configuration the values were fitted for
  HmmParams params;
};

/// The ten reference parameterizations (italy-run01..05 with n=4,
/// spain-run06..10 with n=3).
const std::vector<Preset>& builtin_presets();

/// Directory searched for `<name>.params` before the built-in table:
/// $LANEHMM_PRESET_DIR if set, otherwise the install-time preset directory.
std::filesystem::path preset_directory();

/// Resolves a preset by name. A `<name>.params` file in preset_directory()
/// takes precedence over the built-in values. Throws NotFoundError.
ParamsFile load_preset(const std::string& name);

/// Names available either on disk or built in, sorted.
std::vector<std::string> list_presets();

}  // namespace lanehmm

#endif  // LANEHMM_PARAMS_IO_HPP
