#include "sdsp/gammatone.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t seconds_to_samples(double seconds, double fs) {
  return static_cast<std::size_t>(std::lround(seconds * fs));
}

void check_center(double fc, const FilterbankConfig& cfg) {
  const double slack = 1e-9 * cfg.f_high;
  if (!(fc >= cfg.f_low - slack && fc <= cfg.f_high + slack))
    throw DomainError("centre frequency " + std::to_string(fc) + " Hz outside the filterbank band");
}

}  // namespace

void FilterbankConfig::validate() const {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  if (!(f_low > 0.0 && f_low < f_high)) throw ConfigError("filterbank requires 0 < f_low < f_high");
  if (f_high > sample_rate / 2.0) throw ConfigError("f_high must not exceed sample_rate / 2");
  if (n_channels < 2) throw ConfigError("n_channels must be at least 2");
  if (filter_order < 1) throw ConfigError("filter_order must be at least 1");
  if (!(ir_duration > 0.0) || ir_length() < 1) throw ConfigError("ir_duration must cover at least one sample");
}

std::size_t FilterbankConfig::ir_length() const { return seconds_to_samples(ir_duration, sample_rate); }

void GammatonegramConfig::validate() const {
  if (!(hop > 0.0 && hop <= frame_length)) throw ConfigError("gammatonegram requires 0 < hop <= frame_length");
  if (!(window_span > 0.0 && window_span <= frame_length))
    throw ConfigError("window_span must lie in (0, frame_length]");
  if (!std::isfinite(floor_db)) throw ConfigError("floor_db must be finite");
}

std::size_t GammatonegramConfig::frame_samples(double fs) const { return seconds_to_samples(frame_length, fs); }
std::size_t GammatonegramConfig::hop_samples(double fs) const { return seconds_to_samples(hop, fs); }
std::size_t GammatonegramConfig::window_samples(double fs) const { return seconds_to_samples(window_span, fs); }

std::size_t GammatonegramConfig::bins_for(std::size_t n_samples, double fs) const {
  const std::size_t win = window_samples(fs);
  if (n_samples < win) return 0;
  return (n_samples - win) / hop_samples(fs) + 1;
}

double erb_rate(double hz) { return 21.4 * std::log10(0.00437 * hz + 1.0); }

double inverse_erb_rate(double erb) { return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437; }

std::vector<double> erb_center_frequencies(const FilterbankConfig& cfg) {
  cfg.validate();
  const double lo = erb_rate(cfg.f_low);
  const double hi = erb_rate(cfg.f_high);
  const auto n = static_cast<std::size_t>(cfg.n_channels);
  std::vector<double> fc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    fc[i] = inverse_erb_rate(lo + t * (hi - lo));
  }
  fc.front() = cfg.f_low;
  fc.back() = cfg.f_high;
  return fc;
}

double gammatone_bandwidth(double fc) {
  if (!(fc >= 0.0)) throw DomainError("bandwidth requires a non-negative centre frequency");
  return 1.09 * (fc / 9.26449 + 24.7);
}

Signal gammatone_impulse_response(double fc, const FilterbankConfig& cfg) {
  cfg.validate();
  check_center(fc, cfg);
  const double b = gammatone_bandwidth(fc);
  const std::size_t len = cfg.ir_length();
  Signal g(len);
  std::complex<double> response{0.0, 0.0};
  for (std::size_t n = 0; n < len; ++n) {
    const double t = static_cast<double>(n) / cfg.sample_rate;
    g[n] = std::pow(t, cfg.filter_order - 1) * std::exp(-kTwoPi * b * t) * std::cos(kTwoPi * fc * t);
    response += g[n] * std::polar(1.0, -kTwoPi * fc * t);
  }
  const double gain = std::abs(response);
  if (gain > 0.0)
    for (double& v : g) v /= gain;
  return g;
}

Signal filter_channel(std::span<const double> x, double fc, const FilterbankConfig& cfg) {
  if (x.empty()) throw ArgumentError("filter_channel requires a non-empty input");
  const Signal g = gammatone_impulse_response(fc, cfg);
  const std::size_t nfft = next_pow2(x.size() + g.size() - 1);
  RealFft fft(nfft);
  Spectrum X = fft.forward(x);
  const Spectrum G = fft.forward(g);
  for (std::size_t i = 0; i < X.size(); ++i) X[i] *= G[i];
  Signal y(x.size());
  fft.inverse(X, y);
  return y;
}

Signal filter_channel_direct(std::span<const double> x, double fc, const FilterbankConfig& cfg) {
  if (x.empty()) throw ArgumentError("filter_channel requires a non-empty input");
  const Signal g = gammatone_impulse_response(fc, cfg);
  Signal y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t kmax = std::min(n + 1, g.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) acc += g[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

GammatoneFilterbank::GammatoneFilterbank(const FilterbankConfig& cfg)
    : cfg_(cfg), centers_(erb_center_frequencies(cfg)) {
  irs_.reserve(centers_.size());
  for (double fc : centers_) irs_.push_back(gammatone_impulse_response(fc, cfg_));
}

std::size_t GammatoneFilterbank::fft_size(std::size_t n) const {
  return next_pow2(n + cfg_.ir_length() - 1);
}

const std::vector<Spectrum>& GammatoneFilterbank::spectra(std::size_t nfft) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = cache_[nfft];
  if (!slot) {
    auto s = std::make_unique<std::vector<Spectrum>>();
    RealFft fft(nfft);
    for (const auto& g : irs_) s->push_back(fft.forward(g));
    slot = std::move(s);
  }
  return *slot;
}

BandOutputs GammatoneFilterbank::filter(std::span<const double> x) const {
  if (x.empty()) throw ArgumentError("filterbank input is empty");
  const std::size_t nfft = fft_size(x.size());
  const auto& h = spectra(nfft);
  RealFft fft(nfft);
  return kernels::filterbank_parallel(fft.forward(x), h, nfft, x.size());
}

BandOutputs GammatoneFilterbank::filter_serial(std::span<const double> x) const {
  if (x.empty()) throw ArgumentError("filterbank input is empty");
  const std::size_t nfft = fft_size(x.size());
  const auto& h = spectra(nfft);
  RealFft fft(nfft);
  return kernels::filterbank_serial(fft.forward(x), h, nfft, x.size());
}

std::vector<double> analysis_window(const GammatonegramConfig& gg, double fs) {
  const std::size_t n = gg.window_samples(fs);
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n - 1));
  return w;
}

Gammatonegram gammatonegram_from_bands(const BandOutputs& bands, const std::vector<double>& center_freqs,
                                       const GammatonegramConfig& gg, double fs) {
  gg.validate();
  if (bands.empty() || bands.size() != center_freqs.size())
    throw ArgumentError("band outputs do not match the centre frequencies");
  const std::size_t n_bins = gg.bins_for(bands.front().size(), fs);
  if (n_bins == 0) throw ArgumentError("band outputs shorter than one analysis window");
  const auto window = analysis_window(gg, fs);
  MatrixD e = kernels::band_energy_parallel(bands, window, gg.hop_samples(fs), n_bins);
  for (double& v : e.data()) v = v > 0.0 ? std::max(gg.floor_db, 10.0 * std::log10(v)) : gg.floor_db;
  return Gammatonegram{std::move(e), center_freqs, static_cast<double>(gg.hop_samples(fs)) / fs, gg.floor_db};
}

Gammatonegram gammatonegram(std::span<const double> x, const GammatoneFilterbank& fb,
                            const GammatonegramConfig& gg) {
  gg.validate();
  const double fs = fb.config().sample_rate;
  if (x.size() < gg.frame_samples(fs))
    throw ArgumentError("audio is shorter than one gammatonegram frame");
  return gammatonegram_from_bands(fb.filter(x), fb.center_freqs(), gg, fs);
}

Gammatonegram gammatonegram(const AudioBuffer& mono, const FilterbankConfig& fb,
                            const GammatonegramConfig& gg) {
  if (mono.num_channels() != 1) throw ArgumentError("gammatonegram expects a mono buffer");
  if (mono.sample_rate() != fb.sample_rate)
    throw ArgumentError("audio sample rate does not match the filterbank");
  const GammatoneFilterbank bank(fb);
  return gammatonegram(mono.channel(0), bank, gg);
}

}  // namespace sdsp
