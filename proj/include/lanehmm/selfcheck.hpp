#ifndef LANEHMM_SELFCHECK_HPP
#define LANEHMM_SELFCHECK_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lanehmm/simulator.hpp"

namespace lanehmm {

/// The seeded simulation the golden summary is generated from.
SimConfig golden_sim_config();

using Summary = std::vector<std::pair<std::string, std::string>>;

/// Simulates golden_sim_config(), runs default parameters, and returns the
/// metrics plus a content hash of the serialized results, all as text.
Summary end_to_end_summary();

std::string format_summary(const Summary& summary);
Summary parse_summary(const std::string& text);

struct CheckReport {
  bool pass = false;
  std::vector<std::string> divergent_fields;
  std::string message;
};

/// Compares end_to_end_summary() with the golden file field by field.
CheckReport end_to_end_check(const std::filesystem::path& golden_path);

/// Path of the committed golden file (compiled in).
std::filesystem::path default_golden_path();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace lanehmm

#endif  // LANEHMM_SELFCHECK_HPP
