#pragma once

// Data-parallel inner loops. Each kernel has a plain serial version, kept as
// the reference for tests and benchmarks, and an OpenMP version that must
// produce identical results.

#include <span>
#include <vector>

#include "sdsp/audio.hpp"
#include "sdsp/fft.hpp"
#include "sdsp/matrix.hpp"

namespace sdsp {

/// One filtered signal per filterbank channel.
using BandOutputs = std::vector<Signal>;

namespace kernels {

/// Fast convolution against a bank of filters sharing one input spectrum:
/// out[k] = first `length` samples of IFFT(input * filters[k]).
BandOutputs filterbank_serial(const Spectrum& input, std::span<const Spectrum> filters,
                              std::size_t nfft, std::size_t length);
BandOutputs filterbank_parallel(const Spectrum& input, std::span<const Spectrum> filters,
                                std::size_t nfft, std::size_t length);

/// Windowed mean-square energy per band and analysis bin (linear units):
/// out(m, n) = mean_k (window[k] * bands[m][n*hop + k])^2.
MatrixD band_energy_serial(const BandOutputs& bands, std::span<const double> window,
                           std::size_t hop, std::size_t n_bins);
MatrixD band_energy_parallel(const BandOutputs& bands, std::span<const double> window,
                             std::size_t hop, std::size_t n_bins);

/// Full 2-D cross-correlation by direct summation over every lag:
/// out(p + M - 1, l + N - 1) = sum_{m,n} a(m, n) * b(m - p, n - l).
MatrixD xcorr2d_serial(const MatrixD& a, const MatrixD& b);
MatrixD xcorr2d_parallel(const MatrixD& a, const MatrixD& b);

}  // namespace kernels
}  // namespace sdsp
