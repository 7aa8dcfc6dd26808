#pragma once

// Time-frequency segmentation masks over gammatonegrams, masked and
// normalised gammatonegrams, their 2-D cross-correlation, and mask-gated
// waveform reconstruction.

#include <utility>
#include <vector>

#include "sdsp/gammatone.hpp"
#include "sdsp/matrix.hpp"
#include "sdsp/scene.hpp"

namespace sdsp {

/// Per-pixel class labels on a gammatonegram grid. The binary view is 1 where
/// the label equals `target`.
struct SegmentationMask {
  Matrix<SoundClass> labels;
  SoundClass target = SoundClass::Siren;

  std::size_t rows() const { return labels.rows(); }
  std::size_t cols() const { return labels.cols(); }
  bool set(std::size_t m, std::size_t n) const { return labels(m, n) == target; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  MatrixD binary() const;

  /// Nonzero entries become `target`, zeros become Other.
  static SegmentationMask from_binary(const MatrixD& binary, SoundClass target);
};

/// Labels a pixel `target` where clean >= noise + threshold_db and the clean
/// energy is above the floor; everything else is Other. Throws ArgumentError
/// on a shape mismatch.
SegmentationMask ideal_mask(const Gammatonegram& clean, const Gammatonegram& scaled_noise,
                            double threshold_db, SoundClass target);

/// Masked gammatonegram in linear energy units, scaled so the maximum is 1.
struct MaskedGammatonegram {
  MatrixD values;
  std::vector<double> center_freqs;
  double bin_hop = 0.0;
};

/// Converts dB bins to linear energy, zeroes unmasked pixels and divides by
/// the maximum. Throws EmptyMaskError when nothing is masked in (or every
/// masked pixel is zero) and ArgumentError on a shape mismatch.
MaskedGammatonegram apply_mask(const Gammatonegram& noisy, const SegmentationMask& mask);
/// Re-masks and re-normalises an already masked gammatonegram.
MaskedGammatonegram apply_mask(const MaskedGammatonegram& masked, const SegmentationMask& mask);

/// values(p + M - 1, l + N - 1) = sum_{m,n} g1(m, n) g2(m - p, n - l).
struct CrossGammatonegram {
  MatrixD values;
  std::size_t m = 0;  // source grid rows
  std::size_t n = 0;  // source grid columns

  double at(long p, long l) const {
    return values(static_cast<std::size_t>(p + static_cast<long>(m) - 1),
                  static_cast<std::size_t>(l + static_cast<long>(n) - 1));
  }
  /// Lag (p, l) of the largest value; first in row-major order on ties.
  std::pair<long, long> argmax_lag() const;
};

/// FFT route (zero-padded 2-D transforms).
CrossGammatonegram cross_gammatonegram(const MatrixD& g1, const MatrixD& g2);
CrossGammatonegram cross_gammatonegram(const MaskedGammatonegram& g1, const MaskedGammatonegram& g2);
/// Direct summation over every lag, parallel across rows of lags.
CrossGammatonegram cross_gammatonegram_direct(const MatrixD& g1, const MatrixD& g2);

/// Gates each band by its mask row and sums the bands. Each sample takes the
/// mask value of the bin whose analysis window centre is nearest; the gate is
/// then smoothed with a 5 ms moving average, giving linear cross-fades at
/// transitions. Throws ArgumentError if the band count or bin count does not
/// match the mask.
Signal reconstruct_denoised_waveform(const BandOutputs& bands, const SegmentationMask& mask,
                                     const GammatonegramConfig& gg, double fs);

}  // namespace sdsp
