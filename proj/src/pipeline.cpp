#include "sdsp/pipeline.hpp"

#include <cmath>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

void check_stereo(const AudioBuffer& x, double fs, const char* what) {
  if (x.num_channels() != 2) throw ArgumentError(std::string(what) + " must be stereo");
  if (x.sample_rate() != fs) throw ArgumentError(std::string(what) + " sample rate differs from the filterbank");
}

}  // namespace

FramePipeline::FramePipeline(const RunConfig& cfg) : cfg_(cfg), bank_(cfg.filterbank) { cfg_.validate(); }

Gammatonegram FramePipeline::gram(std::span<const double> x) const {
  return gammatonegram(x, bank_, cfg_.gammatonegram);
}

StereoGrams FramePipeline::grams(const AudioBuffer& stereo) const {
  check_stereo(stereo, sample_rate(), "audio");
  return {gram(stereo.channel(0)), gram(stereo.channel(1))};
}

StereoMasks FramePipeline::oracle_masks(const AudioBuffer& clean, const AudioBuffer& noise, SoundClass target) const {
  check_stereo(clean, sample_rate(), "clean audio");
  check_stereo(noise, sample_rate(), "noise audio");
  StereoMasks out;
  for (std::size_t c = 0; c < 2; ++c)
    out[c] = ideal_mask(gram(clean.channel(c)), gram(noise.channel(c)), cfg_.mask_threshold_db, target);
  return out;
}

FrameFeatures FramePipeline::features(const AudioBuffer& mixed, const AudioBuffer* clean, const AudioBuffer* noise,
                                      SoundClass target) const {
  FrameFeatures f;
  f.mixed = grams(mixed);
  if (!clean || !noise) return f;
  f.masks = oracle_masks(*clean, *noise, target);
  if (!is_alerting(target) || (*f.masks)[0].empty() || (*f.masks)[1].empty()) return f;
  try {
    f.masked = std::array<MaskedGammatonegram, 2>{apply_mask(f.mixed[0], (*f.masks)[0]),
                                                  apply_mask(f.mixed[1], (*f.masks)[1])};
  } catch (const EmptyMaskError&) {
    return f;
  }
  f.cross = cross_gammatonegram((*f.masked)[0], (*f.masked)[1]);
  return f;
}

Localisation FramePipeline::localise(const AudioBuffer& mixed, const StereoMasks& masks) const {
  check_stereo(mixed, sample_rate(), "mixed audio");
  Localisation out;
  if (masks[0].empty() || masks[1].empty()) {
    out.reason = "empty mask";
    return out;
  }
  std::array<Signal, 2> recon;
  for (std::size_t c = 0; c < 2; ++c)
    recon[c] = reconstruct_denoised_waveform(bank_.filter(mixed.channel(c)), masks[c], cfg_.gammatonegram,
                                             sample_rate());
  try {
    const auto g = gcc_phat(recon[0], recon[1], sample_rate(), cfg_.geometry.max_itd());
    const auto a = itd_to_angle(g.itd, cfg_.geometry);
    out.valid = true;
    out.itd = g.itd;
    out.alpha_deg = a.alpha_deg;
    out.low_confidence = g.low_confidence;
    out.clamped = a.clamped;
  } catch (const NoSignalError& e) {
    out.reason = e.what();
  } catch (const GeometryError& e) {
    out.reason = e.what();
  }
  return out;
}

Localisation FramePipeline::localise_oracle(const AudioBuffer& mixed, const AudioBuffer& clean,
                                            const AudioBuffer& noise, SoundClass target) const {
  if (!is_alerting(target)) return {false, 0.0, 0.0, false, false, "non-alerting class"};
  return localise(mixed, oracle_masks(clean, noise, target));
}

Tensor mask_to_tensor(const SegmentationMask& mask) {
  Tensor t{{static_cast<std::uint32_t>(mask.rows()), static_cast<std::uint32_t>(mask.cols())}, {}};
  t.data.reserve(mask.labels.size());
  for (auto c : mask.labels.data()) t.data.push_back(static_cast<float>(static_cast<int>(c)));
  return t;
}

SegmentationMask mask_from_tensor(const Tensor& t, SoundClass target) {
  if (t.shape.size() != 2) throw FormatError("mask tensor must be rank 2");
  SegmentationMask m{Matrix<SoundClass>(t.shape[0], t.shape[1], SoundClass::Other), target};
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const float v = t.data[i];
    if (v != 0.0f && v != 1.0f && v != 2.0f) throw FormatError("mask tensor holds a non-class value");
    m.labels.data()[i] = static_cast<SoundClass>(static_cast<int>(v));
  }
  return m;
}

}  // namespace sdsp
