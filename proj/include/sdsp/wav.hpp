#pragma once

#include <filesystem>
#include <string>

#include "sdsp/audio.hpp"

namespace sdsp {

inline constexpr double kDefaultSampleRate = 44100.0;

struct WavReadOptions {
  double expected_rate = kDefaultSampleRate;
  /// Convert other rates to `expected_rate` instead of rejecting them.
  bool resample = false;
};

/// Reads 16-bit signed little-endian PCM, mono or stereo. Samples are scaled
/// to [-1, 1) by 1/32768.
AudioBuffer read_wav(const std::filesystem::path& path, const WavReadOptions& opts = {});

/// Writes 16-bit PCM. Samples are rounded to the nearest step of 1/32768 and
/// clipped to the representable range, so a read/write cycle is lossless.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

/// PCM16 quantization applied by write_wav, exposed for in-memory round trips.
AudioBuffer quantize_pcm16(const AudioBuffer& audio);

}  // namespace sdsp
