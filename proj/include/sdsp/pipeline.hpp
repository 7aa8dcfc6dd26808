#pragma once

// Per-frame feature extraction and the oracle-mask GCC-PHAT localiser.

#include <array>
#include <optional>
#include <string>

#include "sdsp/audio.hpp"
#include "sdsp/config.hpp"
#include "sdsp/doa.hpp"
#include "sdsp/gammatone.hpp"
#include "sdsp/masking.hpp"
#include "sdsp/tensor.hpp"

namespace sdsp {

using StereoGrams = std::array<Gammatonegram, 2>;
using StereoMasks = std::array<SegmentationMask, 2>;

struct FrameFeatures {
  StereoGrams mixed;
  std::optional<StereoMasks> masks;
  /// Present when both masks select energy.
  std::optional<std::array<MaskedGammatonegram, 2>> masked;
  std::optional<CrossGammatonegram> cross;
};

struct Localisation {
  bool valid = false;
  double alpha_deg = 0.0;
  double itd = 0.0;
  bool low_confidence = false;
  bool clamped = false;
  std::string reason;  // why the estimate is invalid
};

class FramePipeline {
 public:
  explicit FramePipeline(const RunConfig& cfg);

  const RunConfig& config() const { return cfg_; }
  const GammatoneFilterbank& filterbank() const { return bank_; }
  double sample_rate() const { return cfg_.filterbank.sample_rate; }

  Gammatonegram gram(std::span<const double> x) const;
  StereoGrams grams(const AudioBuffer& stereo) const;

  /// Ideal masks per channel from the clean target and scaled noise.
  StereoMasks oracle_masks(const AudioBuffer& clean, const AudioBuffer& noise, SoundClass target) const;

  /// Mixed-channel gammatonegrams, plus masks, masked gammatonegrams and the
  /// cross-gammatonegram when clean and noise are supplied.
  FrameFeatures features(const AudioBuffer& mixed, const AudioBuffer* clean, const AudioBuffer* noise,
                         SoundClass target) const;

  /// Reconstructs each channel of `mixed` through its mask and runs GCC-PHAT
  /// on the pair. Empty masks, silent reconstructions and impossible delays
  /// give an invalid result.
  Localisation localise(const AudioBuffer& mixed, const StereoMasks& masks) const;

  /// oracle_masks followed by localise.
  Localisation localise_oracle(const AudioBuffer& mixed, const AudioBuffer& clean, const AudioBuffer& noise,
                               SoundClass target) const;

 private:
  RunConfig cfg_;
  GammatoneFilterbank bank_;
};

/// Mask labels stored as class indices (0 siren, 1 horn, 2 other).
Tensor mask_to_tensor(const SegmentationMask& mask);
SegmentationMask mask_from_tensor(const Tensor& t, SoundClass target);

}  // namespace sdsp
