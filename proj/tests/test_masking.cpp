#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "helpers.hpp"
#include "sdsp/errors.hpp"
#include "sdsp/gammatone.hpp"
#include "sdsp/masking.hpp"

using namespace sdsp;
using testutil::kFs;

namespace {

// values(p + M - 1, l + N - 1) = sum g1(m, n) g2(m - p, n - l), by the definition.
MatrixD brute_xcorr(const MatrixD& g1, const MatrixD& g2) {
  const long M = static_cast<long>(g1.rows()), N = static_cast<long>(g1.cols());
  MatrixD out(static_cast<std::size_t>(2 * M - 1), static_cast<std::size_t>(2 * N - 1), 0.0);
  for (long p = -M + 1; p <= M - 1; ++p)
    for (long l = -N + 1; l <= N - 1; ++l) {
      double s = 0.0;
      for (long m = 0; m < M; ++m)
        for (long n = 0; n < N; ++n) {
          const long i = m - p, j = n - l;
          if (i < 0 || i >= M || j < 0 || j >= N) continue;
          s += g1(static_cast<std::size_t>(m), static_cast<std::size_t>(n)) *
               g2(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
      out(static_cast<std::size_t>(p + M - 1), static_cast<std::size_t>(l + N - 1)) = s;
    }
  return out;
}

MatrixD random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixD m(r, c);
  for (auto& v : m.data()) v = u(gen);
  return m;
}

double max_rel_diff(const MatrixD& a, const MatrixD& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b.data()[i]));
    diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
  }
  return diff / scale;
}

Gammatonegram gram_of(const MatrixD& db) {
  Gammatonegram g;
  g.energies = db;
  g.center_freqs.resize(db.rows());
  for (std::size_t m = 0; m < db.rows(); ++m) g.center_freqs[m] = 100.0 * static_cast<double>(m + 1);
  g.bin_hop = 0.01;
  return g;
}

SegmentationMask mask_where(std::size_t r, std::size_t c, const std::function<bool(std::size_t, std::size_t)>& on) {
  MatrixD b(r, c, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) b(i, j) = on(i, j) ? 1.0 : 0.0;
  return SegmentationMask::from_binary(b, SoundClass::Siren);
}

}  // namespace

TEST_CASE("ideal mask") {
  MatrixD clean(4, 6, -80.0), noise(4, 6, -30.0);
  SUBCASE("clean on the floor") {
    const auto m = ideal_mask(gram_of(clean), gram_of(noise), 0.0, SoundClass::Siren);
    CHECK(m.empty());
  }
  SUBCASE("clean 10 dB above noise everywhere") {
    for (auto& v : clean.data()) v = -20.0;
    const auto m = ideal_mask(gram_of(clean), gram_of(noise), 0.0, SoundClass::Horn);
    CHECK(m.count() == 24);
    CHECK(m.labels(0, 0) == SoundClass::Horn);
  }
  SUBCASE("checkerboard") {
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 6; ++j) clean(i, j) = (i + j) % 2 == 0 ? -25.0 : -35.0;
    const auto m = ideal_mask(gram_of(clean), gram_of(noise), 0.0, SoundClass::Siren);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        CHECK(m.set(i, j) == ((i + j) % 2 == 0));
        CHECK(m.labels(i, j) == ((i + j) % 2 == 0 ? SoundClass::Siren : SoundClass::Other));
      }
  }
  SUBCASE("threshold") {
    for (auto& v : clean.data()) v = -27.0;
    CHECK(ideal_mask(gram_of(clean), gram_of(noise), 0.0, SoundClass::Siren).count() == 24);
    CHECK(ideal_mask(gram_of(clean), gram_of(noise), 5.0, SoundClass::Siren).empty());
  }
  CHECK_THROWS_AS(ideal_mask(gram_of(MatrixD(4, 5)), gram_of(noise), 0.0, SoundClass::Siren), ArgumentError);
}

TEST_CASE("apply_mask") {
  std::mt19937_64 gen(1);
  MatrixD db = random_matrix(8, 10, gen);
  for (auto& v : db.data()) v = -60.0 + 50.0 * v;
  const auto g = gram_of(db);

  SUBCASE("all-ones mask normalises the linear gammatonegram") {
    const auto out = apply_mask(g, mask_where(8, 10, [](auto, auto) { return true; }));
    double peak_lin = 0.0;
    for (double v : db.data()) peak_lin = std::max(peak_lin, std::pow(10.0, v / 10.0));
    for (std::size_t i = 0; i < db.size(); ++i)
      CHECK(out.values.data()[i] == doctest::Approx(std::pow(10.0, db.data()[i] / 10.0) / peak_lin).epsilon(1e-12));
    CHECK(out.values.max() == 1.0);
  }

  SUBCASE("single pixel") {
    const auto out = apply_mask(g, mask_where(8, 10, [](auto i, auto j) { return i == 3 && j == 7; }));
    std::size_t nonzero = 0;
    for (double v : out.values.data()) nonzero += v != 0.0;
    CHECK(nonzero == 1);
    CHECK(out.values(3, 7) == 1.0);
  }

  SUBCASE("max is one and re-masking is idempotent") {
    for (int t = 0; t < 20; ++t) {
      const auto bits = random_matrix(8, 10, gen);
      const auto mask = mask_where(8, 10, [&](auto i, auto j) { return bits(i, j) > 0.6; });
      if (mask.empty()) continue;
      const auto once = apply_mask(g, mask);
      CHECK(once.values.max() == 1.0);
      const auto twice = apply_mask(once, mask);
      for (std::size_t i = 0; i < once.values.size(); ++i)
        CHECK(twice.values.data()[i] == doctest::Approx(once.values.data()[i]).epsilon(1e-15));
    }
  }

  CHECK_THROWS_AS(apply_mask(g, mask_where(8, 10, [](auto, auto) { return false; })), EmptyMaskError);
  CHECK_THROWS_AS(apply_mask(g, mask_where(8, 9, [](auto, auto) { return true; })), ArgumentError);
}

TEST_CASE("cross-gammatonegram") {
  std::mt19937_64 gen(42);

  SUBCASE("FFT route and direct route equal the double sum") {
    for (int t = 0; t < 50; ++t) {
      const auto a = random_matrix(8, 8, gen), b = random_matrix(8, 8, gen);
      const auto ref = brute_xcorr(a, b);
      const auto fast = cross_gammatonegram(a, b);
      const auto direct = cross_gammatonegram_direct(a, b);
      REQUIRE(fast.values.rows() == 15);
      REQUIRE(fast.values.cols() == 15);
      CHECK(max_rel_diff(fast.values, ref) < 1e-6);
      CHECK(max_rel_diff(direct.values, ref) < 1e-12);
    }
    const auto a = random_matrix(64, 48, gen), b = random_matrix(64, 48, gen);
    const auto big = cross_gammatonegram(a, b);
    CHECK(big.values.rows() == 127);
    CHECK(big.values.cols() == 95);
    CHECK(max_rel_diff(big.values, cross_gammatonegram_direct(a, b).values) < 1e-9);
  }

  SUBCASE("delta autocorrelation") {
    MatrixD d(6, 5, 0.0);
    d(2, 3) = 1.0;
    const auto x = cross_gammatonegram(d, d);
    CHECK(x.at(0, 0) == doctest::Approx(1.0));
    double total = 0.0;
    for (double v : x.values.data()) total += std::abs(v);
    CHECK(total == doctest::Approx(1.0));
  }

  SUBCASE("shifted copy peaks at the negated shift") {
    for (auto [dm, dn] : {std::pair{2L, 3L}, {-1L, 4L}, {3L, -2L}, {0L, -5L}}) {
      MatrixD g1(12, 14, 0.0), g2(12, 14, 0.0);
      for (std::size_t i = 3; i < 9; ++i)
        for (std::size_t j = 5; j < 9; ++j) g1(i, j) = std::uniform_real_distribution<double>(0.1, 1.0)(gen);
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 14; ++j) {
          const long si = static_cast<long>(i) - dm, sj = static_cast<long>(j) - dn;
          if (si >= 0 && si < 12 && sj >= 0 && sj < 14) g2(i, j) = g1(static_cast<std::size_t>(si), static_cast<std::size_t>(sj));
        }
      const auto x = cross_gammatonegram(g1, g2);
      const auto ref = brute_xcorr(g1, g2);
      CHECK(max_rel_diff(x.values, ref) < 1e-6);
      const auto [p, l] = x.argmax_lag();
      CHECK(p == -dm);
      CHECK(l == -dn);
    }
  }

  SUBCASE("swapping the inputs mirrors the lags") {
    for (int t = 0; t < 10; ++t) {
      const auto a = random_matrix(7, 9, gen), b = random_matrix(7, 9, gen);
      const auto ab = cross_gammatonegram(a, b), ba = cross_gammatonegram(b, a);
      for (long p = -6; p <= 6; ++p)
        for (long l = -8; l <= 8; ++l) CHECK(ab.at(p, l) == doctest::Approx(ba.at(-p, -l)).epsilon(1e-9));
    }
  }

  SUBCASE("autocorrelation peaks at zero lag with the energy") {
    const auto a = random_matrix(9, 11, gen);
    const auto x = cross_gammatonegram(a, a);
    double energy = 0.0;
    for (double v : a.data()) energy += v * v;
    CHECK(x.at(0, 0) == doctest::Approx(energy).epsilon(1e-9));
    CHECK(x.values.max() == doctest::Approx(x.at(0, 0)).epsilon(1e-12));
  }

  SUBCASE("enlarging a mask never lowers the zero-lag autocorrelation") {
    MatrixD db = random_matrix(10, 12, gen);
    for (auto& v : db.data()) v = -50.0 + 40.0 * v;
    const auto g = gram_of(db);
    const auto bits = random_matrix(10, 12, gen);
    double prev = 0.0;
    for (double thr : {0.9, 0.7, 0.5, 0.3, 0.0}) {
      const auto mask = mask_where(10, 12, [&](auto i, auto j) { return bits(i, j) >= thr; });
      if (mask.empty()) continue;
      // Zero lag of the unnormalised masked energies.
      MatrixD lin(10, 12, 0.0);
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 12; ++j)
          if (mask.set(i, j)) lin(i, j) = std::pow(10.0, db(i, j) / 10.0);
      const double v = cross_gammatonegram(lin, lin).at(0, 0);
      CHECK(v >= prev);
      prev = v;
    }
  }

  CHECK_THROWS_AS(cross_gammatonegram(MatrixD(3, 4), MatrixD(4, 3)), ArgumentError);
}

TEST_CASE("reconstruction") {
  const FilterbankConfig fb;
  const GammatonegramConfig gg;
  const GammatoneFilterbank bank(fb);
  std::mt19937_64 gen(12);
  std::normal_distribution<double> nd;
  Signal x(22050);
  for (auto& v : x) v = nd(gen);
  const auto bands = bank.filter(x);

  SUBCASE("all-ones mask sums every band") {
    const auto mask = mask_where(64, 48, [](auto, auto) { return true; });
    const auto y = reconstruct_denoised_waveform(bands, mask, gg, kFs);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < y.size(); i += 37) {
      double s = 0.0;
      for (const auto& b : bands) s += b[i];
      CHECK(y[i] == doctest::Approx(s).epsilon(1e-9).scale(1.0));
    }
  }

  SUBCASE("all-zeros mask is silent") {
    const auto mask = mask_where(64, 48, [](auto, auto) { return false; });
    for (double v : reconstruct_denoised_waveform(bands, mask, gg, kFs)) CHECK(v == 0.0);
  }

  SUBCASE("tone in noise at +10 dB band SNR gains at least 10 dB") {
    const auto clean = testutil::tone(1000.0, 0.5, kFs, 0.1);
    Signal noise(22050);
    for (auto& v : noise) v = nd(gen);
    const auto& fc = bank.center_freqs();
    std::size_t k = 0;
    for (std::size_t m = 1; m < fc.size(); ++m)
      if (std::abs(fc[m] - 1000.0) < std::abs(fc[k] - 1000.0)) k = m;
    const auto cb = bank.filter(clean), nb = bank.filter(noise);
    const double band_snr = 10.0 * std::log10(mean_square(cb[k]) / mean_square(nb[k]));
    const double scale = std::pow(10.0, (band_snr - 10.0) / 20.0);
    Signal mixed(22050);
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      noise[i] *= scale;
      mixed[i] = clean[i] + noise[i];
    }
    const auto mask = ideal_mask(gammatonegram(clean, bank, gg), gammatonegram(noise, bank, gg), 0.0,
                                 SoundClass::Siren);
    REQUIRE_FALSE(mask.empty());
    // Gating is linear for a fixed mask, so the output splits into a clean
    // part (the reference) and a residual noise part.
    const auto out = reconstruct_denoised_waveform(bank.filter(mixed), mask, gg, kFs);
    const auto ref = reconstruct_denoised_waveform(cb, mask, gg, kFs);
    double err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) err += (out[i] - ref[i]) * (out[i] - ref[i]);
    const double snr_in = 10.0 * std::log10(mean_square(clean) / mean_square(noise));
    const double snr_out = 10.0 * std::log10(mean_square(ref) / (err / static_cast<double>(out.size())));
    CHECK(snr_out >= snr_in + 10.0);
  }

  SUBCASE("grid mismatch") {
    CHECK_THROWS_AS(reconstruct_denoised_waveform(bands, mask_where(63, 48, [](auto, auto) { return true; }), gg, kFs),
                    ArgumentError);
    CHECK_THROWS_AS(reconstruct_denoised_waveform(bands, mask_where(64, 47, [](auto, auto) { return true; }), gg, kFs),
                    ArgumentError);
  }
}
