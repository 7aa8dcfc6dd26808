#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdsp {

using Signal = std::vector<double>;

/// Sampled waveform, one or more equal-length channels at a common rate.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(double sample_rate, std::size_t channels, std::size_t frames);
  AudioBuffer(double sample_rate, std::vector<Signal> channels);

  static AudioBuffer mono(double sample_rate, Signal samples);
  static AudioBuffer stereo(double sample_rate, Signal left, Signal right);

  double sample_rate() const { return sample_rate_; }
  std::size_t num_channels() const { return channels_.size(); }
  std::size_t num_frames() const { return channels_.empty() ? 0 : channels_.front().size(); }
  double duration() const;
  bool empty() const { return num_frames() == 0; }

  std::span<double> channel(std::size_t c) { return channels_.at(c); }
  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  const std::vector<Signal>& channels() const { return channels_; }

  /// Copy of frames [offset, offset + length); frames past the end read as zero.
  AudioBuffer slice(std::size_t offset, std::size_t length) const;

  /// Mean square over all frames, summed across channels.
  double power() const;
  double peak() const;
  void scale(double gain);

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  double sample_rate_ = 0.0;
  std::vector<Signal> channels_;
};

double mean_square(std::span<const double> x);

}  // namespace sdsp
