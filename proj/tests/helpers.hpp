#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <unistd.h>

#include "sdsp/audio.hpp"

namespace testutil {

inline constexpr double kFs = 44100.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fresh scratch directory, removed and recreated on each call.
inline std::filesystem::path scratch(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("sdsp_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline sdsp::Signal tone(double hz, double seconds, double fs = kFs, double amp = 1.0, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * fs));
  sdsp::Signal x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::cos(kTwoPi * hz * static_cast<double>(i) / fs + phase);
  return x;
}

// Direct DTFT magnitude at one frequency.
inline double dtft_mag(std::span<const double> x, double hz, double fs = kFs) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += x[i] * std::polar(1.0, -kTwoPi * hz * static_cast<double>(i) / fs);
  return std::abs(acc);
}

inline double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

// Lag (x2 relative to x1, positive when x2 lags) of the plain cross-correlation peak.
inline long xcorr_peak_lag(std::span<const double> x1, std::span<const double> x2, long max_lag) {
  long best = 0;
  double best_v = -1e300;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (long i = 0; i < static_cast<long>(x1.size()); ++i) {
      const long j = i + lag;
      if (j >= 0 && j < static_cast<long>(x2.size())) s += x1[static_cast<std::size_t>(i)] * x2[static_cast<std::size_t>(j)];
    }
    if (s > best_v) {
      best_v = s;
      best = lag;
    }
  }
  return best;
}

}  // namespace testutil
