#pragma once

// Direction of arrival from a two-channel recording: GCC-PHAT delay
// estimation, delay-to-angle conversion and median smoothing of per-frame
// estimates.

#include <cstddef>
#include <span>
#include <vector>

#include "sdsp/geometry.hpp"

namespace sdsp {

/// Frames whose correlation peak is less than this multiple of the mean
/// absolute correlation over the search window are flagged low-confidence.
inline constexpr double kLowConfidenceRatio = 4.0;
inline constexpr double kPhatFloor = 0.3;

struct GccPhatResult {
  double itd = 0.0;           // s, positive when x2 lags x1
  double peak_to_mean = 0.0;  // peak / mean |r| over the searched lags
  bool low_confidence = false;
  /// Phase-transform correlation at lags -max_lag..max_lag (samples).
  std::vector<double> correlation;
  long max_lag = 0;
};

/// Generalised cross-correlation with phase-transform weighting. The search
/// covers |lag| <= max_itd * fs and the peak is refined by a parabola through
/// its neighbours. Cross-spectrum magnitudes are floored at kPhatFloor of
/// their maximum before whitening. Throws NoSignalError if either input is silent,
/// ArgumentError on unequal or empty inputs.
GccPhatResult gcc_phat(std::span<const double> x1, std::span<const double> x2, double fs, double max_itd);
double gcc_phat_itd(std::span<const double> x1, std::span<const double> x2, double fs, double max_itd);

struct AngleResult {
  double alpha_deg = 90.0;
  /// The delay exceeded spacing / c by up to 5% and was clamped.
  bool clamped = false;
};

/// alpha = arccos(itd c / spacing). Delays up to 5% beyond the physical
/// limit are clamped and flagged; larger ones throw GeometryError.
AngleResult itd_to_angle(double itd, const MicGeometry& geom);

struct DoAEstimate {
  double alpha_deg = 90.0;
  std::size_t frame_index = 0;
  bool valid = false;
};

/// Centred sliding median over the valid estimates in each window of `order`
/// frames (truncated at the edges). Invalid estimates stay invalid and do not
/// contribute. With an even number of values the two middle ones are
/// averaged. Throws ArgumentError unless order is odd and positive.
std::vector<DoAEstimate> median_filter_estimates(const std::vector<DoAEstimate>& estimates, int order);

}  // namespace sdsp
