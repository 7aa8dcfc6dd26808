#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sdsp {

using Spectrum = std::vector<std::complex<double>>;

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Real-to-complex transform of fixed length backed by FFTW. Each object owns
/// its plan and scratch buffers, so one instance must not be shared between
/// threads; separate instances may run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Forward transform of `x`, zero-padded (or truncated) to size().
  void forward(std::span<const double> x, Spectrum& out);
  Spectrum forward(std::span<const double> x);

  /// Inverse transform including the 1/n scale. `out` receives the first
  /// out.size() samples (at most size()).
  void inverse(std::span<const std::complex<double>> spec, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Two-dimensional real transform over a rows x cols row-major grid.
class RealFft2d {
 public:
  RealFft2d(std::size_t rows, std::size_t cols);
  ~RealFft2d();
  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t spectrum_size() const { return rows_ * (cols_ / 2 + 1); }

  /// `x` is src_rows x src_cols, placed at the origin of a zero grid.
  void forward(std::span<const double> x, std::size_t src_rows, std::size_t src_cols, Spectrum& out);
  /// Inverse with 1/(rows*cols) scale; `out` is rows*cols.
  void inverse(std::span<const std::complex<double>> spec, std::span<double> out);

 private:
  struct Impl;
  std::size_t rows_;
  std::size_t cols_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sdsp
