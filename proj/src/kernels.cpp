#include "sdsp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <memory>

#include "sdsp/errors.hpp"
#include "sdsp/parallel.hpp"

namespace sdsp::kernels {
namespace {

void check_filters(const Spectrum& input, std::span<const Spectrum> filters, std::size_t nfft) {
  if (input.size() != nfft / 2 + 1) throw ArgumentError("input spectrum does not match FFT size");
  for (const auto& f : filters)
    if (f.size() != input.size()) throw ArgumentError("filter spectrum does not match FFT size");
}

void filter_one(RealFft& fft, const Spectrum& input, const Spectrum& filter, Spectrum& scratch,
                Signal& out) {
  scratch.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) scratch[i] = input[i] * filter[i];
  fft.inverse(scratch, out);
}

double bin_energy(const Signal& band, std::span<const double> window, std::size_t start) {
  double acc = 0.0;
  for (std::size_t k = 0; k < window.size(); ++k) {
    const double v = window[k] * band[start + k];
    acc += v * v;
  }
  return acc / static_cast<double>(window.size());
}

void check_bins(const BandOutputs& bands, std::span<const double> window, std::size_t hop,
                std::size_t n_bins) {
  if (window.empty() || hop == 0) throw ArgumentError("window and hop must be non-empty");
  if (n_bins == 0) return;
  const std::size_t need = (n_bins - 1) * hop + window.size();
  for (const auto& b : bands)
    if (b.size() < need) throw ArgumentError("band output shorter than the analysis span");
}

double xcorr_at(const MatrixD& a, const MatrixD& b, long p, long l) {
  const long rows = static_cast<long>(a.rows());
  const long cols = static_cast<long>(a.cols());
  const long m0 = std::max(0L, p), m1 = std::min(rows, rows + p);
  const long n0 = std::max(0L, l), n1 = std::min(cols, cols + l);
  double acc = 0.0;
  for (long m = m0; m < m1; ++m) {
    const auto ra = a.row(static_cast<std::size_t>(m));
    const auto rb = b.row(static_cast<std::size_t>(m - p));
    for (long n = n0; n < n1; ++n) acc += ra[static_cast<std::size_t>(n)] * rb[static_cast<std::size_t>(n - l)];
  }
  return acc;
}

void check_xcorr(const MatrixD& a, const MatrixD& b) {
  if (!a.same_shape(b)) throw ArgumentError("cross-correlation inputs must have equal shapes");
  if (a.empty()) throw ArgumentError("cross-correlation inputs are empty");
}

}  // namespace

BandOutputs filterbank_serial(const Spectrum& input, std::span<const Spectrum> filters,
                              std::size_t nfft, std::size_t length) {
  check_filters(input, filters, nfft);
  RealFft fft(nfft);
  Spectrum scratch;
  BandOutputs out(filters.size(), Signal(std::min(length, nfft)));
  for (std::size_t k = 0; k < filters.size(); ++k) filter_one(fft, input, filters[k], scratch, out[k]);
  return out;
}

BandOutputs filterbank_parallel(const Spectrum& input, std::span<const Spectrum> filters,
                                std::size_t nfft, std::size_t length) {
  check_filters(input, filters, nfft);
  BandOutputs out(filters.size(), Signal(std::min(length, nfft)));
  const long n = static_cast<long>(filters.size());
#pragma omp parallel num_threads(worker_count())
  {
    RealFft fft(nfft);
    Spectrum scratch;
#pragma omp for schedule(static)
    for (long k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      filter_one(fft, input, filters[i], scratch, out[i]);
    }
  }
  return out;
}

MatrixD band_energy_serial(const BandOutputs& bands, std::span<const double> window, std::size_t hop,
                           std::size_t n_bins) {
  check_bins(bands, window, hop, n_bins);
  MatrixD out(bands.size(), n_bins);
  for (std::size_t m = 0; m < bands.size(); ++m)
    for (std::size_t n = 0; n < n_bins; ++n) out(m, n) = bin_energy(bands[m], window, n * hop);
  return out;
}

MatrixD band_energy_parallel(const BandOutputs& bands, std::span<const double> window,
                             std::size_t hop, std::size_t n_bins) {
  check_bins(bands, window, hop, n_bins);
  MatrixD out(bands.size(), n_bins);
  const long total = static_cast<long>(bands.size() * n_bins);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long i = 0; i < total; ++i) {
    const auto m = static_cast<std::size_t>(i) / n_bins;
    const auto n = static_cast<std::size_t>(i) % n_bins;
    out(m, n) = bin_energy(bands[m], window, n * hop);
  }
  return out;
}

MatrixD xcorr2d_serial(const MatrixD& a, const MatrixD& b) {
  check_xcorr(a, b);
  const long rows = static_cast<long>(a.rows()), cols = static_cast<long>(a.cols());
  MatrixD out(2 * a.rows() - 1, 2 * a.cols() - 1);
  for (long p = -rows + 1; p < rows; ++p)
    for (long l = -cols + 1; l < cols; ++l)
      out(static_cast<std::size_t>(p + rows - 1), static_cast<std::size_t>(l + cols - 1)) = xcorr_at(a, b, p, l);
  return out;
}

MatrixD xcorr2d_parallel(const MatrixD& a, const MatrixD& b) {
  check_xcorr(a, b);
  const long rows = static_cast<long>(a.rows()), cols = static_cast<long>(a.cols());
  MatrixD out(2 * a.rows() - 1, 2 * a.cols() - 1);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long p = -rows + 1; p < rows; ++p)
    for (long l = -cols + 1; l < cols; ++l)
      out(static_cast<std::size_t>(p + rows - 1), static_cast<std::size_t>(l + cols - 1)) = xcorr_at(a, b, p, l);
  return out;
}

}  // namespace sdsp::kernels
