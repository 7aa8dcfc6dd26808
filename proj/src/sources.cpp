#include "sdsp/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdsp/errors.hpp"
#include "sdsp/geometry.hpp"
#include "sdsp/random.hpp"

namespace sdsp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t length_for(double duration, double fs) {
  if (!(duration > 0.0) || !(fs > 0.0)) throw ArgumentError("generator duration and rate must be positive");
  return static_cast<std::size_t>(std::lround(duration * fs));
}

void normalize_peak(Signal& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (double& v : x) v *= peak / m;
}

// Paul Kellet's economy pink filter, adequate at 44.1 kHz.
class PinkFilter {
 public:
  double operator()(double white) {
    b0_ = 0.99765 * b0_ + white * 0.0990460;
    b1_ = 0.96300 * b1_ + white * 0.2965164;
    b2_ = 0.57000 * b2_ + white * 1.0526913;
    return b0_ + b1_ + b2_ + white * 0.1848;
  }

 private:
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

// Attack/release envelope for a set of on-intervals.
double gate(double t, const std::vector<std::pair<double, double>>& on, double ramp) {
  double g = 0.0;
  for (const auto& [a, b] : on) {
    if (t < a || t > b) continue;
    g = std::max(g, std::min({1.0, (t - a) / ramp, (b - t) / ramp}));
  }
  return g;
}

}  // namespace

Signal synth_siren(SirenKind kind, double duration, double fs, std::uint64_t seed) {
  if (kind == SirenKind::None) throw ArgumentError("siren kind must be set");
  const std::size_t n = length_for(duration, fs);
  Rng rng(mix_seed(seed, 0x5123));
  const double phase0 = rng.uniform(0.0, kTwoPi);
  const double period = kind == SirenKind::Yelp ? rng.uniform(0.22, 0.32) : rng.uniform(3.0, 5.0);
  const double segment = rng.uniform(0.35, 0.45);
  const bool start_high = rng.uniform() < 0.5;

  Signal x(n);
  double phase = rng.uniform(0.0, kTwoPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double f = 0.0;
    switch (kind) {
      case SirenKind::Yelp:
      case SirenKind::Wail:
        f = 1075.0 + 425.0 * std::sin(kTwoPi * t / period + phase0);
        break;
      case SirenKind::HiLow: {
        const bool high = (static_cast<long>(t / segment) % 2 == 0) == start_high;
        f = high ? 960.0 : 770.0;
        break;
      }
      case SirenKind::None:
        break;
    }
    phase += kTwoPi * f / fs;
    // Odd harmonics of a square wave plus weak even distortion products.
    x[i] = std::sin(phase) + std::sin(3.0 * phase) / 3.0 + std::sin(5.0 * phase) / 5.0 +
           0.08 * std::sin(2.0 * phase) + 0.04 * std::sin(4.0 * phase);
  }
  normalize_peak(x, 0.5);
  return x;
}

Signal synth_horn(double duration, double fs, std::uint64_t seed) {
  const std::size_t n = length_for(duration, fs);
  Rng rng(mix_seed(seed, 0x4082));
  const double f1 = rng.uniform(380.0, 440.0);
  const double f2 = f1 * rng.uniform(1.19, 1.27);

  std::vector<std::pair<double, double>> blasts;
  double t = rng.uniform(0.0, 0.05);
  while (t < duration) {
    const double len = rng.uniform(0.8, 2.0);
    blasts.emplace_back(t, std::min(duration, t + len));
    t += len + rng.uniform(0.08, 0.25);
  }

  const auto harmonics = [&](double f) { return std::max(1, static_cast<int>(9000.0 / f)); };
  const int h1 = harmonics(f1), h2 = harmonics(f2);
  std::vector<double> ph1(static_cast<std::size_t>(h1)), ph2(static_cast<std::size_t>(h2));
  for (auto& p : ph1) p = rng.uniform(0.0, kTwoPi);
  for (auto& p : ph2) p = rng.uniform(0.0, kTwoPi);

  Rng noise(mix_seed(seed, 0x4083));
  Signal x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / fs;
    const double g = gate(ti, blasts, 0.01);
    if (g == 0.0) continue;
    double v = 0.0;
    for (int k = 1; k <= h1; ++k) v += std::sin(kTwoPi * k * f1 * ti + ph1[static_cast<std::size_t>(k - 1)]) / k;
    for (int k = 1; k <= h2; ++k) v += std::sin(kTwoPi * k * f2 * ti + ph2[static_cast<std::size_t>(k - 1)]) / k;
    x[i] = g * (v + 0.15 * noise.normal());
  }
  normalize_peak(x, 0.5);
  return x;
}

Signal synth_other(double duration, double fs, std::uint64_t seed) {
  const std::size_t n = length_for(duration, fs);
  Rng rng(mix_seed(seed, 0x07E4));
  const double f0 = rng.uniform(25.0, 60.0);
  const double drift = rng.uniform(-0.15, 0.15) * f0 / std::max(duration, 1.0);
  const double am_rate = rng.uniform(1.0, 3.0);
  std::vector<double> ph(20);
  for (auto& p : ph) p = rng.uniform(0.0, kTwoPi);

  PinkFilter pink;
  Rng noise(mix_seed(seed, 0x07E5));
  double lp = 0.0;
  double phase = 0.0;
  Signal x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    phase += kTwoPi * (f0 + drift * t) / fs;
    double engine = 0.0;
    for (std::size_t k = 1; k <= ph.size(); ++k)
      engine += std::sin(static_cast<double>(k) * phase + ph[k - 1]) / std::pow(static_cast<double>(k), 0.7);
    lp += 0.2 * (pink(noise.normal()) - lp);
    const double am = 0.75 + 0.25 * std::sin(kTwoPi * am_rate * t);
    x[i] = am * (0.3 * engine + lp);
  }
  normalize_peak(x, 0.5);
  return x;
}

AudioBuffer synth_traffic_noise(double duration, double fs, std::uint64_t seed) {
  const std::size_t n = length_for(duration, fs);
  Rng rng(mix_seed(seed, 0x7AF1));
  Signal left(n, 0.0), right(n, 0.0);

  // Diffuse bed: independent, low-tilted pink noise in each channel, plus a
  // rumble below ~100 Hz that is coherent across the array.
  {
    PinkFilter pink_l, pink_r;
    double lp_l = 0.0, lp_r = 0.0, r1 = 0.0, r2 = 0.0;
    const double a_bed = 1.0 - std::exp(-kTwoPi * 800.0 / fs);
    const double a_rum = 1.0 - std::exp(-kTwoPi * 100.0 / fs);
    const double swell_rate = rng.uniform(0.05, 0.3);
    const double swell_phase = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double swell = 1.0 + 0.3 * std::sin(kTwoPi * swell_rate * t + swell_phase);
      const double pl = pink_l(rng.normal()), pr = pink_r(rng.normal());
      lp_l += a_bed * (pl - lp_l);
      lp_r += a_bed * (pr - lp_r);
      r1 += a_rum * (rng.normal() - r1);
      r2 += a_rum * (r1 - r2);
      const double rumble = 12.0 * r2;
      left[i] += swell * (lp_l + 0.3 * pl + rumble);
      right[i] += swell * (lp_r + 0.3 * pr + rumble);
    }
  }

  // Passing vehicles: engine harmonics over tyre noise, each crossing part
  // of the half-plane, rendered with the inter-channel delay of its current
  // direction for the default array.
  const double max_itd = MicGeometry{}.max_itd() * fs;
  const double rate = rng.uniform(0.15, 0.4);  // vehicles per second
  double start = -rng.uniform(0.0, 4.0);
  while (start < duration) {
    const double len = rng.uniform(2.0, 6.0);
    const double gain = rng.uniform(0.4, 2.0);
    const double a0 = rng.uniform(0.0, 180.0);
    const double a1 = std::clamp(a0 + rng.uniform(-60.0, 60.0), 0.0, 180.0);
    const double f0 = rng.uniform(20.0, 50.0);
    const double tyre_cut = 1.0 - std::exp(-kTwoPi * rng.uniform(600.0, 2000.0) / fs);
    std::vector<double> ph(12);
    for (auto& p : ph) p = rng.uniform(0.0, kTwoPi);
    Rng src_rng(rng.next());
    PinkFilter pink;
    double tyre = 0.0, phase = 0.0;

    const auto i0 = static_cast<long>(std::floor(std::max(0.0, start) * fs));
    const auto i1 = std::min(static_cast<long>(n), static_cast<long>(std::ceil((start + len) * fs)));
    for (long i = i0; i < i1; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double u = (t - start) / len;
      const double env = gain * std::sin(std::numbers::pi * u) * std::sin(std::numbers::pi * u);
      phase += kTwoPi * f0 / fs;
      double engine = 0.0;
      for (std::size_t k = 1; k <= ph.size(); ++k)
        engine += std::sin(static_cast<double>(k) * phase + ph[k - 1]) / static_cast<double>(k);
      tyre += tyre_cut * (pink(src_rng.normal()) - tyre);
      const double s = env * (0.3 * engine + tyre);
      // Channel 2 lags by itd; linear interpolation between this and the
      // previous source sample stands in for a fractional delay.
      const double alpha = a0 + (a1 - a0) * u;
      const double itd = max_itd * std::cos(alpha * std::numbers::pi / 180.0);
      const double d1 = 0.5 * (max_itd - itd), d2 = 0.5 * (max_itd + itd);
      const auto put = [&](Signal& ch, double delay) {
        const double pos = static_cast<double>(i) + delay;
        const auto j = static_cast<long>(std::floor(pos));
        const double frac = pos - static_cast<double>(j);
        if (j >= 0 && j < static_cast<long>(n)) ch[static_cast<std::size_t>(j)] += (1.0 - frac) * s;
        if (j + 1 >= 0 && j + 1 < static_cast<long>(n)) ch[static_cast<std::size_t>(j + 1)] += frac * s;
      };
      put(left, d1);
      put(right, d2);
    }
    start += rng.uniform(0.5, 2.0) / rate;
  }

  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max({peak, std::abs(left[i]), std::abs(right[i])});
  if (peak > 0.0)
    for (std::size_t i = 0; i < n; ++i) {
      left[i] *= 0.5 / peak;
      right[i] *= 0.5 / peak;
    }
  return AudioBuffer::stereo(fs, std::move(left), std::move(right));
}

AudioBuffer synth_by_name(const std::string& name, double duration, double fs, std::uint64_t seed) {
  if (name == "siren-yelp") return AudioBuffer::mono(fs, synth_siren(SirenKind::Yelp, duration, fs, seed));
  if (name == "siren-wail") return AudioBuffer::mono(fs, synth_siren(SirenKind::Wail, duration, fs, seed));
  if (name == "siren-hilow") return AudioBuffer::mono(fs, synth_siren(SirenKind::HiLow, duration, fs, seed));
  if (name == "horn") return AudioBuffer::mono(fs, synth_horn(duration, fs, seed));
  if (name == "other") return AudioBuffer::mono(fs, synth_other(duration, fs, seed));
  if (name == "traffic-noise") return synth_traffic_noise(duration, fs, seed);
  throw ValidationError("unknown generator '" + name + "'");
}

}  // namespace sdsp
