#pragma once

#include <span>
#include <vector>

namespace sdsp {

/// Kaiser-windowed sinc interpolation for fractional reads of a sampled
/// signal. Used for fractional delays, Doppler resampling and rate
/// conversion.
class SincInterpolator {
 public:
  explicit SincInterpolator(int half_taps = 24, double kaiser_beta = 9.0);

  /// Band-limited value of `x` at fractional index `pos`. `cutoff` is the
  /// passband edge as a fraction of Nyquist (1 = full band); values below one
  /// low-pass the result when reading faster than real time. Samples outside
  /// the signal are treated as zero.
  double at(std::span<const double> x, double pos, double cutoff = 1.0) const;

  int half_taps() const { return half_taps_; }

 private:
  double window(double u) const;

  int half_taps_;
  std::vector<double> table_;
};

/// Resample `x` from `from_rate` to `to_rate` with a shared interpolator.
std::vector<double> resample(std::span<const double> x, double from_rate, double to_rate);

}  // namespace sdsp
