#include "sdsp/geometry.hpp"

#include <cmath>
#include <numbers>

#include "sdsp/errors.hpp"

namespace sdsp {

void MicGeometry::validate() const {
  if (!(spacing > 0.0)) throw ConfigError("microphone spacing must be positive");
  if (!(speed_of_sound > 0.0)) throw ConfigError("speed of sound must be positive");
}

double itd_for_angle(double alpha_deg, const MicGeometry& geom) {
  // sin(90 - alpha) is exact at 0, 90 and 180 degrees, unlike cos(alpha).
  return geom.max_itd() * std::sin((90.0 - alpha_deg) * std::numbers::pi / 180.0);
}

}  // namespace sdsp
