#pragma once

namespace sdsp {

/// Two microphones on a line. The direction of arrival alpha is measured in
/// degrees from the channel-1 end of the array axis, covering the frontal
/// half-plane [0, 180].
struct MicGeometry {
  double spacing = 0.5;          // m
  double speed_of_sound = 343.0;  // m/s

  void validate() const;
  /// Largest possible inter-channel delay, spacing / c.
  double max_itd() const { return spacing / speed_of_sound; }

  friend bool operator==(const MicGeometry&, const MicGeometry&) = default;
};

/// Delay of channel 2 relative to channel 1 for a far-field source at alpha:
/// (spacing / c) cos(alpha). Positive when the source is on the channel-1 side.
double itd_for_angle(double alpha_deg, const MicGeometry& geom);

}  // namespace sdsp
