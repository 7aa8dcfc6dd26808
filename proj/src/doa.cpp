#include "sdsp/doa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdsp/errors.hpp"
#include "sdsp/fft.hpp"

namespace sdsp {

GccPhatResult gcc_phat(std::span<const double> x1, std::span<const double> x2, double fs, double max_itd) {
  if (x1.size() != x2.size()) throw ArgumentError("gcc_phat: inputs differ in length");
  if (x1.empty()) throw ArgumentError("gcc_phat: inputs are empty");
  if (!(fs > 0.0) || !(max_itd > 0.0)) throw ArgumentError("gcc_phat: rate and max_itd must be positive");
  const auto silent = [](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
  };
  if (silent(x1) || silent(x2)) throw NoSignalError("gcc_phat: a channel carries no signal");

  const std::size_t n = x1.size();
  const std::size_t nfft = next_pow2(2 * n);
  RealFft fft(nfft);
  Spectrum a = fft.forward(x1);
  const Spectrum b = fft.forward(x2);

  double peak_mag = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = b[k] * std::conj(a[k]);
    peak_mag = std::max(peak_mag, std::abs(a[k]));
  }
  if (!(peak_mag > 0.0)) throw NoSignalError("gcc_phat: channels share no spectral content");
  const double floor = kPhatFloor * peak_mag;
  for (auto& v : a) v /= std::max(std::abs(v), floor);

  std::vector<double> r(nfft);
  fft.inverse(a, r);

  GccPhatResult out;
  out.max_lag = std::min(static_cast<long>(std::ceil(max_itd * fs)), static_cast<long>(n) - 1);
  const long L = out.max_lag;
  out.correlation.resize(static_cast<std::size_t>(2 * L + 1));
  for (long lag = -L; lag <= L; ++lag) {
    const std::size_t idx = lag < 0 ? nfft - static_cast<std::size_t>(-lag) : static_cast<std::size_t>(lag);
    out.correlation[static_cast<std::size_t>(lag + L)] = r[idx];
  }

  const auto& c = out.correlation;
  const auto best = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  double offset = 0.0;
  if (best > 0 && best + 1 < c.size()) {
    const double y0 = c[best - 1], y1 = c[best], y2 = c[best + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom < 0.0) offset = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
  }
  out.itd = (static_cast<double>(best) - static_cast<double>(L) + offset) / fs;

  double mean_abs = 0.0;
  for (double v : c) mean_abs += std::abs(v);
  mean_abs /= static_cast<double>(c.size());
  out.peak_to_mean = mean_abs > 0.0 ? c[best] / mean_abs : 0.0;
  out.low_confidence = out.peak_to_mean < kLowConfidenceRatio;
  return out;
}

double gcc_phat_itd(std::span<const double> x1, std::span<const double> x2, double fs, double max_itd) {
  return gcc_phat(x1, x2, fs, max_itd).itd;
}

AngleResult itd_to_angle(double itd, const MicGeometry& geom) {
  geom.validate();
  if (!std::isfinite(itd)) throw GeometryError("ITD is not finite");
  double ratio = itd * geom.speed_of_sound / geom.spacing;
  AngleResult out;
  if (std::abs(ratio) > 1.05) throw GeometryError("ITD exceeds the array's physical limit by more than 5%");
  if (std::abs(ratio) > 1.0) {
    out.clamped = std::abs(ratio) > 1.0 + 1e-12;
    ratio = std::clamp(ratio, -1.0, 1.0);
  }
  out.alpha_deg = std::acos(ratio) * 180.0 / std::numbers::pi;
  return out;
}

std::vector<DoAEstimate> median_filter_estimates(const std::vector<DoAEstimate>& estimates, int order) {
  if (order < 1 || order % 2 == 0) throw ArgumentError("median filter order must be odd and positive");
  const long half = order / 2;
  const long n = static_cast<long>(estimates.size());
  std::vector<DoAEstimate> out = estimates;
  std::vector<double> window;
  for (long i = 0; i < n; ++i) {
    if (!estimates[static_cast<std::size_t>(i)].valid) continue;
    window.clear();
    for (long j = std::max(0L, i - half); j <= std::min(n - 1, i + half); ++j) {
      const auto& e = estimates[static_cast<std::size_t>(j)];
      if (e.valid) window.push_back(e.alpha_deg);
    }
    std::sort(window.begin(), window.end());
    const std::size_t k = window.size();
    out[static_cast<std::size_t>(i)].alpha_deg =
        k % 2 == 1 ? window[k / 2] : 0.5 * (window[k / 2 - 1] + window[k / 2]);
  }
  return out;
}

}  // namespace sdsp
