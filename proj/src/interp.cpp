#include "sdsp/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

constexpr int kTableResolution = 4096;

}  // namespace

SincInterpolator::SincInterpolator(int half_taps, double kaiser_beta) : half_taps_(half_taps) {
  if (half_taps < 1) throw ArgumentError("interpolator needs at least one tap per side");
  const std::size_t n = static_cast<std::size_t>(kTableResolution) + 2;
  table_.resize(n);
  const double norm = std::cyl_bessel_i(0.0, kaiser_beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::min(1.0, static_cast<double>(i) / kTableResolution);
    table_[i] = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(1.0 - u * u)) / norm;
  }
}

double SincInterpolator::window(double u) const {
  // u in [0, 1]
  const double p = u * kTableResolution;
  const auto i = static_cast<std::size_t>(p);
  if (i >= static_cast<std::size_t>(kTableResolution)) return 0.0;
  const double f = p - static_cast<double>(i);
  return table_[i] + f * (table_[i + 1] - table_[i]);
}

double SincInterpolator::at(std::span<const double> x, double pos, double cutoff) const {
  const auto n = static_cast<long>(x.size());
  const double base = std::floor(pos);
  const long ib = static_cast<long>(base);
  if (cutoff >= 1.0 && pos == base) return (ib >= 0 && ib < n) ? x[static_cast<std::size_t>(ib)] : 0.0;

  // Widen the kernel when low-passing so the transition band scales with it.
  const double reach = half_taps_ / std::min(1.0, cutoff);
  const long lo = static_cast<long>(std::ceil(pos - reach));
  const long hi = static_cast<long>(std::floor(pos + reach));
  double acc = 0.0;
  for (long k = std::max(lo, 0L); k <= std::min(hi, n - 1); ++k) {
    const double d = pos - static_cast<double>(k);
    const double u = std::abs(d) / reach;
    if (u >= 1.0) continue;
    const double arg = std::numbers::pi * cutoff * d;
    const double s = (arg == 0.0) ? 1.0 : std::sin(arg) / arg;
    acc += x[static_cast<std::size_t>(k)] * cutoff * s * window(u);
  }
  return acc;
}

std::vector<double> resample(std::span<const double> x, double from_rate, double to_rate) {
  if (!(from_rate > 0.0) || !(to_rate > 0.0)) throw ArgumentError("sample rates must be positive");
  const SincInterpolator interp;
  const double step = from_rate / to_rate;
  const double cutoff = std::min(1.0, to_rate / from_rate);
  const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) / step));
  std::vector<double> y(out_len);
  for (std::size_t i = 0; i < out_len; ++i) y[i] = interp.at(x, static_cast<double>(i) * step, cutoff);
  return y;
}

}  // namespace sdsp
