#pragma once

// Gammatone filterbank on the ERB scale and the gammatonegram built from it.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "sdsp/audio.hpp"
#include "sdsp/kernels.hpp"
#include "sdsp/matrix.hpp"

namespace sdsp {

struct FilterbankConfig {
  int n_channels = 64;
  double f_low = 50.0;
  double f_high = 22050.0;
  double sample_rate = 44100.0;
  int filter_order = 4;
  /// Truncation length of each impulse response, seconds.
  double ir_duration = 0.025;

  /// Throws ConfigError unless 0 < f_low < f_high <= fs/2, n_channels >= 2,
  /// filter_order >= 1 and the impulse response has at least one sample.
  void validate() const;
  std::size_t ir_length() const;

  friend bool operator==(const FilterbankConfig&, const FilterbankConfig&) = default;
};

enum class AnalysisWindow { Hamming };

struct GammatonegramConfig {
  /// Span of one sample (frame) of audio, seconds.
  double frame_length = 0.5;
  /// Hop between analysis bins, seconds.
  double hop = 0.010;
  /// Length of each windowed energy integration, seconds.
  double window_span = 0.025;
  AnalysisWindow window = AnalysisWindow::Hamming;
  /// Lower clamp for bin energies, dB.
  double floor_db = -80.0;

  void validate() const;

  std::size_t frame_samples(double fs) const;
  std::size_t hop_samples(double fs) const;
  std::size_t window_samples(double fs) const;
  /// Number of analysis bins that fit in `n_samples`.
  std::size_t bins_for(std::size_t n_samples, double fs) const;
  /// Bins per frame: floor((frame_length - window_span) / hop) + 1 in samples.
  std::size_t bins_per_frame(double fs) const { return bins_for(frame_samples(fs), fs); }

  friend bool operator==(const GammatonegramConfig&, const GammatonegramConfig&) = default;
};

/// Band energies in dB, channels x bins, lowest centre frequency first.
struct Gammatonegram {
  MatrixD energies;
  std::vector<double> center_freqs;
  double bin_hop = 0.0;
  double floor_db = -80.0;

  std::size_t channels() const { return energies.rows(); }
  std::size_t bins() const { return energies.cols(); }
};

/// Glasberg-Moore ERB-rate: 21.4 * log10(0.00437 f + 1).
double erb_rate(double hz);
double inverse_erb_rate(double erb);

/// `n_channels` centre frequencies equally spaced in ERB-rate from f_low to
/// f_high inclusive, ascending.
std::vector<double> erb_center_frequencies(const FilterbankConfig& cfg);

/// b = 1.09 (fc / 9.26449 + 24.7). Throws DomainError for negative fc.
double gammatone_bandwidth(double fc);

/// Sampled t^(a-1) e^(-2 pi b t) cos(2 pi fc t), truncated to ir_length()
/// samples and scaled to unit magnitude response at fc.
Signal gammatone_impulse_response(double fc, const FilterbankConfig& cfg);

/// Causal convolution of x with the channel's impulse response, truncated to
/// len(x). Uses FFT convolution.
Signal filter_channel(std::span<const double> x, double fc, const FilterbankConfig& cfg);
/// Same result by direct summation; reference route for the FFT path.
Signal filter_channel_direct(std::span<const double> x, double fc, const FilterbankConfig& cfg);

/// A fixed bank of gammatone filters with cached transfer functions.
class GammatoneFilterbank {
 public:
  explicit GammatoneFilterbank(const FilterbankConfig& cfg);

  const FilterbankConfig& config() const { return cfg_; }
  const std::vector<double>& center_freqs() const { return centers_; }
  const Signal& impulse_response(std::size_t k) const { return irs_.at(k); }
  std::size_t size() const { return centers_.size(); }

  /// Band outputs for every channel, each the same length as x.
  BandOutputs filter(std::span<const double> x) const;
  BandOutputs filter_serial(std::span<const double> x) const;

 private:
  std::size_t fft_size(std::size_t n) const;
  const std::vector<Spectrum>& spectra(std::size_t nfft) const;

  FilterbankConfig cfg_;
  std::vector<double> centers_;
  std::vector<Signal> irs_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::size_t, std::unique_ptr<std::vector<Spectrum>>> cache_;
};

/// Analysis window of the configured kind and length.
std::vector<double> analysis_window(const GammatonegramConfig& gg, double fs);

/// Gammatonegram from precomputed band outputs (length >= one window).
Gammatonegram gammatonegram_from_bands(const BandOutputs& bands, const std::vector<double>& center_freqs,
                                       const GammatonegramConfig& gg, double fs);

/// Gammatonegram of x. Requires at least frame_length seconds of audio; bins
/// cover the whole input, so one frame yields bins_per_frame() bins.
Gammatonegram gammatonegram(std::span<const double> x, const GammatoneFilterbank& fb,
                            const GammatonegramConfig& gg);
Gammatonegram gammatonegram(const AudioBuffer& mono, const FilterbankConfig& fb,
                            const GammatonegramConfig& gg);

}  // namespace sdsp
