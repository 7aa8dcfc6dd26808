#include "sdsp/masking.hpp"

#include <algorithm>
#include <cmath>

#include "sdsp/errors.hpp"
#include "sdsp/fft.hpp"
#include "sdsp/kernels.hpp"

namespace sdsp {
namespace {

constexpr double kCrossfade = 0.005;

void check_shape(const MatrixD& a, std::size_t rows, std::size_t cols, const char* what) {
  if (a.rows() != rows || a.cols() != cols) throw ArgumentError(std::string(what) + ": shape mismatch");
}

MaskedGammatonegram normalize_masked(MatrixD values, const SegmentationMask& mask,
                                     std::vector<double> centers, double hop) {
  check_shape(values, mask.rows(), mask.cols(), "apply_mask");
  double peak = 0.0;
  for (std::size_t m = 0; m < values.rows(); ++m)
    for (std::size_t n = 0; n < values.cols(); ++n) {
      if (!mask.set(m, n)) values(m, n) = 0.0;
      peak = std::max(peak, values(m, n));
    }
  if (!(peak > 0.0)) throw EmptyMaskError("mask selects no energy");
  for (double& v : values.data()) v /= peak;
  return {std::move(values), std::move(centers), hop};
}

}  // namespace

std::size_t SegmentationMask::count() const {
  return static_cast<std::size_t>(
      std::count(labels.data().begin(), labels.data().end(), target));
}

MatrixD SegmentationMask::binary() const {
  MatrixD out(rows(), cols());
  for (std::size_t i = 0; i < labels.size(); ++i) out.data()[i] = labels.data()[i] == target ? 1.0 : 0.0;
  return out;
}

SegmentationMask SegmentationMask::from_binary(const MatrixD& binary, SoundClass target) {
  SegmentationMask mask{Matrix<SoundClass>(binary.rows(), binary.cols(), SoundClass::Other), target};
  for (std::size_t i = 0; i < binary.size(); ++i)
    if (binary.data()[i] != 0.0) mask.labels.data()[i] = target;
  return mask;
}

SegmentationMask ideal_mask(const Gammatonegram& clean, const Gammatonegram& scaled_noise, double threshold_db,
                            SoundClass target) {
  if (!clean.energies.same_shape(scaled_noise.energies))
    throw ArgumentError("ideal_mask: clean and noise gammatonegrams differ in shape");
  SegmentationMask mask{Matrix<SoundClass>(clean.channels(), clean.bins(), SoundClass::Other), target};
  for (std::size_t i = 0; i < clean.energies.size(); ++i) {
    const double c = clean.energies.data()[i];
    if (c > clean.floor_db && c >= scaled_noise.energies.data()[i] + threshold_db) mask.labels.data()[i] = target;
  }
  return mask;
}

MaskedGammatonegram apply_mask(const Gammatonegram& noisy, const SegmentationMask& mask) {
  MatrixD lin(noisy.channels(), noisy.bins());
  for (std::size_t i = 0; i < lin.size(); ++i) lin.data()[i] = std::pow(10.0, noisy.energies.data()[i] / 10.0);
  return normalize_masked(std::move(lin), mask, noisy.center_freqs, noisy.bin_hop);
}

MaskedGammatonegram apply_mask(const MaskedGammatonegram& masked, const SegmentationMask& mask) {
  return normalize_masked(masked.values, mask, masked.center_freqs, masked.bin_hop);
}

std::pair<long, long> CrossGammatonegram::argmax_lag() const {
  const auto it = std::max_element(values.data().begin(), values.data().end());
  const auto idx = static_cast<std::size_t>(it - values.data().begin());
  return {static_cast<long>(idx / values.cols()) - static_cast<long>(m) + 1,
          static_cast<long>(idx % values.cols()) - static_cast<long>(n) + 1};
}

CrossGammatonegram cross_gammatonegram(const MatrixD& g1, const MatrixD& g2) {
  if (!g1.same_shape(g2)) throw ArgumentError("cross_gammatonegram: inputs differ in shape");
  if (g1.empty()) throw ArgumentError("cross_gammatonegram: inputs are empty");
  const std::size_t rows = g1.rows(), cols = g1.cols();
  const std::size_t out_rows = 2 * rows - 1, out_cols = 2 * cols - 1;
  // Any grid at least out_rows x out_cols avoids circular wrap-around.
  const std::size_t fr = std::max<std::size_t>(2, next_pow2(out_rows));
  const std::size_t fc = std::max<std::size_t>(2, next_pow2(out_cols));

  RealFft2d fft(fr, fc);
  Spectrum a, b;
  fft.forward(g1.data(), rows, cols, a);
  fft.forward(g2.data(), rows, cols, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= std::conj(b[i]);
  std::vector<double> circ(fr * fc);
  fft.inverse(a, circ);

  CrossGammatonegram out{MatrixD(out_rows, out_cols), rows, cols};
  for (std::size_t r = 0; r < out_rows; ++r) {
    const long p = static_cast<long>(r) - static_cast<long>(rows) + 1;
    const std::size_t cr = p < 0 ? fr - static_cast<std::size_t>(-p) : static_cast<std::size_t>(p);
    for (std::size_t c = 0; c < out_cols; ++c) {
      const long l = static_cast<long>(c) - static_cast<long>(cols) + 1;
      const std::size_t cc = l < 0 ? fc - static_cast<std::size_t>(-l) : static_cast<std::size_t>(l);
      out.values(r, c) = circ[cr * fc + cc];
    }
  }
  return out;
}

CrossGammatonegram cross_gammatonegram(const MaskedGammatonegram& g1, const MaskedGammatonegram& g2) {
  return cross_gammatonegram(g1.values, g2.values);
}

CrossGammatonegram cross_gammatonegram_direct(const MatrixD& g1, const MatrixD& g2) {
  return {kernels::xcorr2d_parallel(g1, g2), g1.rows(), g1.cols()};
}

Signal reconstruct_denoised_waveform(const BandOutputs& bands, const SegmentationMask& mask,
                                     const GammatonegramConfig& gg, double fs) {
  if (bands.size() != mask.rows()) throw ArgumentError("reconstruct: band count differs from mask rows");
  if (bands.empty()) return {};
  const std::size_t len = bands.front().size();
  for (const auto& b : bands)
    if (b.size() != len) throw ArgumentError("reconstruct: band outputs differ in length");
  const std::size_t n_bins = gg.bins_for(len, fs);
  if (n_bins != mask.cols()) throw ArgumentError("reconstruct: bin count differs from mask columns");

  const double hop = static_cast<double>(gg.hop_samples(fs));
  const double centre0 = 0.5 * static_cast<double>(gg.window_samples(fs));
  std::vector<std::size_t> nearest(len);
  for (std::size_t t = 0; t < len; ++t) {
    const double k = std::round((static_cast<double>(t) - centre0) / hop);
    nearest[t] = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n_bins - 1)));
  }

  const auto fade = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kCrossfade * fs)));
  const long half = static_cast<long>(fade / 2);
  Signal out(len, 0.0);
  std::vector<double> prefix(len + 1);
  for (std::size_t m = 0; m < bands.size(); ++m) {
    prefix[0] = 0.0;
    bool any = false;
    for (std::size_t t = 0; t < len; ++t) {
      const double g = mask.set(m, nearest[t]) ? 1.0 : 0.0;
      any = any || g > 0.0;
      prefix[t + 1] = prefix[t] + g;
    }
    if (!any) continue;
    for (std::size_t t = 0; t < len; ++t) {
      // Centred moving average; the window is truncated at the edges.
      const long lo = std::max(0L, static_cast<long>(t) - half);
      const long hi = std::min(static_cast<long>(len), static_cast<long>(t) - half + static_cast<long>(fade));
      const double g = (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) /
                       static_cast<double>(hi - lo);
      out[t] += g * bands[m][t];
    }
  }
  return out;
}

}  // namespace sdsp
