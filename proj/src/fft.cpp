#include "sdsp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(n);
    cplx = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(cplx);
  }
};

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw ArgumentError("FFT size must be at least 2");
  impl_ = std::make_unique<Impl>(n);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> x, Spectrum& out) {
  const std::size_t n = std::min(x.size(), n_);
  std::copy_n(x.begin(), n, impl_->real);
  std::fill(impl_->real + n, impl_->real + n_, 0.0);
  fftw_execute(impl_->fwd);
  out.resize(bins());
  std::memcpy(static_cast<void*>(out.data()), impl_->cplx, bins() * sizeof(fftw_complex));
}

Spectrum RealFft::forward(std::span<const double> x) {
  Spectrum out;
  forward(x, out);
  return out;
}

void RealFft::inverse(std::span<const std::complex<double>> spec, std::span<double> out) {
  if (spec.size() != bins()) throw ArgumentError("spectrum size does not match FFT size");
  std::memcpy(static_cast<void*>(impl_->cplx), spec.data(), bins() * sizeof(fftw_complex));
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(n_);
  const std::size_t n = std::min(out.size(), n_);
  for (std::size_t i = 0; i < n; ++i) out[i] = impl_->real[i] * scale;
}

struct RealFft2d::Impl {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  Impl(std::size_t rows, std::size_t cols) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(rows * cols);
    cplx = fftw_alloc_complex(rows * (cols / 2 + 1));
    fwd = fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols), real, cplx, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols), cplx, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(cplx);
  }
};

RealFft2d::RealFft2d(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), impl_(std::make_unique<Impl>(rows, cols)) {}

RealFft2d::~RealFft2d() = default;

void RealFft2d::forward(std::span<const double> x, std::size_t src_rows, std::size_t src_cols,
                        Spectrum& out) {
  if (src_rows > rows_ || src_cols > cols_ || x.size() != src_rows * src_cols)
    throw ArgumentError("2-D FFT input does not fit the transform grid");
  std::fill(impl_->real, impl_->real + rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < src_rows; ++r)
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(r * src_cols), src_cols, impl_->real + r * cols_);
  fftw_execute(impl_->fwd);
  out.resize(spectrum_size());
  std::memcpy(static_cast<void*>(out.data()), impl_->cplx, spectrum_size() * sizeof(fftw_complex));
}

void RealFft2d::inverse(std::span<const std::complex<double>> spec, std::span<double> out) {
  if (spec.size() != spectrum_size() || out.size() != rows_ * cols_)
    throw ArgumentError("2-D FFT size mismatch");
  std::memcpy(static_cast<void*>(impl_->cplx), spec.data(), spectrum_size() * sizeof(fftw_complex));
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(rows_ * cols_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = impl_->real[i] * scale;
}

}  // namespace sdsp
