#include "sdsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdsp/errors.hpp"

namespace sdsp {

AudioBuffer::AudioBuffer(double sample_rate, std::size_t channels, std::size_t frames)
    : sample_rate_(sample_rate), channels_(channels, Signal(frames, 0.0)) {
  if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
}

AudioBuffer::AudioBuffer(double sample_rate, std::vector<Signal> channels)
    : sample_rate_(sample_rate), channels_(std::move(channels)) {
  if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
  for (const auto& ch : channels_) {
    if (ch.size() != channels_.front().size())
      throw ArgumentError("audio channels must have equal length");
  }
}

AudioBuffer AudioBuffer::mono(double sample_rate, Signal samples) {
  std::vector<Signal> ch;
  ch.push_back(std::move(samples));
  return AudioBuffer(sample_rate, std::move(ch));
}

AudioBuffer AudioBuffer::stereo(double sample_rate, Signal left, Signal right) {
  std::vector<Signal> ch;
  ch.push_back(std::move(left));
  ch.push_back(std::move(right));
  return AudioBuffer(sample_rate, std::move(ch));
}

double AudioBuffer::duration() const {
  return static_cast<double>(num_frames()) / sample_rate_;
}

AudioBuffer AudioBuffer::slice(std::size_t offset, std::size_t length) const {
  AudioBuffer out(sample_rate_, num_channels(), length);
  for (std::size_t c = 0; c < num_channels(); ++c) {
    const auto& src = channels_[c];
    if (offset >= src.size()) continue;
    const std::size_t n = std::min(length, src.size() - offset);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(offset), n, out.channels_[c].begin());
  }
  return out;
}

double AudioBuffer::power() const {
  double p = 0.0;
  for (const auto& ch : channels_) p += mean_square(ch);
  return p;
}

double AudioBuffer::peak() const {
  double m = 0.0;
  for (const auto& ch : channels_)
    for (double v : ch) m = std::max(m, std::abs(v));
  return m;
}

void AudioBuffer::scale(double gain) {
  for (auto& ch : channels_)
    for (double& v : ch) v *= gain;
}

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double s = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return s / static_cast<double>(x.size());
}

}  // namespace sdsp
