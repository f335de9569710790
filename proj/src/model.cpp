#include "lanehmm/model.hpp"

#include <string>

namespace lanehmm {

namespace {

void require_open_unit(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError(std::string("HmmParams: ") + name + " must lie in the open interval (0, 1)");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string("HmmParams: ") + name + " must be positive and finite");
}

}  // namespace

void HmmParams::validate() const {
  if (n < 1) throw ParameterError("HmmParams: n must be >= 1");
  require_positive(sigma1, "sigma1");
  require_positive(sigma2, "sigma2");
  require_open_unit(p1, "p1");
  require_open_unit(p2, "p2");
  require_open_unit(p3, "p3");
  require_open_unit(p4, "p4");
  if (!(bv >= 0.0) || !std::isfinite(bv)) throw ParameterError("HmmParams: bv must be non-negative");
}

void RuntimeConfig::validate() const {
  if (!(lane_width > 0.0) || !std::isfinite(lane_width))
    throw ParameterError("RuntimeConfig: lane_width must be positive");
  if (!(compat_tolerance > 0.0)) throw ParameterError("RuntimeConfig: compat_tolerance must be positive");
  if (!(lane_width > compat_tolerance))
    throw ParameterError("RuntimeConfig: lane_width must exceed compat_tolerance");
  if (lri_window < 1) throw ParameterError("RuntimeConfig: lri_window must be >= 1");
  if (!(hysteresis_fraction > 0.0 && hysteresis_fraction < 1.0))
    throw ParameterError("RuntimeConfig: hysteresis_fraction must lie in (0, 1)");
}

}  // namespace lanehmm
