#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sdsp/errors.hpp"
#include "sdsp/gammatone.hpp"

using namespace sdsp;
using testutil::kFs;

namespace {

// Written out independently of the library.
double ref_erb(double f) { return 21.4 * std::log10(0.00437 * f + 1.0); }
double ref_inv_erb(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

}  // namespace

TEST_CASE("ERB centre frequencies") {
  FilterbankConfig cfg;
  cfg.n_channels = 2;
  auto f = erb_center_frequencies(cfg);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(22050.0).epsilon(1e-12));

  cfg.n_channels = 3;
  f = erb_center_frequencies(cfg);
  CHECK(f[1] == doctest::Approx(ref_inv_erb(0.5 * (ref_erb(50.0) + ref_erb(22050.0)))).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(2263.570056776055).epsilon(1e-10));

  SUBCASE("uniform ERB spacing with defaults") {
    const auto fc = erb_center_frequencies(FilterbankConfig{});
    REQUIRE(fc.size() == 64);
    const double step = ref_erb(fc[1]) - ref_erb(fc[0]);
    for (std::size_t k = 1; k < fc.size(); ++k) {
      CHECK(fc[k] > fc[k - 1]);
      CHECK(std::abs((ref_erb(fc[k]) - ref_erb(fc[k - 1])) - step) <= 1e-9 * step);
    }
  }

  SUBCASE("invalid range") {
    FilterbankConfig bad;
    bad.f_low = 3000;
    bad.f_high = 2000;
    CHECK_THROWS_AS(erb_center_frequencies(bad), ConfigError);
    bad = FilterbankConfig{};
    bad.f_high = 30000;
    CHECK_THROWS_AS(erb_center_frequencies(bad), ConfigError);
  }
}

TEST_CASE("ERB rate helpers invert each other") {
  for (double f : {0.0, 50.0, 440.0, 1000.0, 8000.0, 22050.0}) {
    CHECK(erb_rate(f) == doctest::Approx(ref_erb(f)).epsilon(1e-14));
    CHECK(inverse_erb_rate(erb_rate(f)) == doctest::Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("bandwidth law") {
  CHECK(gammatone_bandwidth(0.0) == doctest::Approx(26.923).epsilon(1e-12));
  CHECK(gammatone_bandwidth(1000.0) == doctest::Approx(144.58).epsilon(1e-4));
  CHECK_THROWS_AS(gammatone_bandwidth(-1.0), DomainError);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 22050.0);
  double prev_fc = 0.0, prev_b = gammatone_bandwidth(0.0);
  for (int i = 0; i < 1000; ++i) {
    const double fc = u(gen);
    const double expect = 1.09 * (fc / 9.26449 + 24.7);
    CHECK(std::abs(gammatone_bandwidth(fc) - expect) <= 4 * std::numeric_limits<double>::epsilon() * expect);
    if (fc > prev_fc) CHECK(gammatone_bandwidth(fc) > prev_b);
    prev_fc = fc;
    prev_b = gammatone_bandwidth(fc);
  }
}

TEST_CASE("impulse response") {
  const FilterbankConfig cfg;
  CHECK(cfg.ir_length() == 1103);

  SUBCASE("starts at zero") {
    for (double fc : {100.0, 1000.0, 10000.0}) CHECK(gammatone_impulse_response(fc, cfg)[0] == 0.0);
  }

  SUBCASE("envelope peak at 3 / (2 pi b)") {
    for (double fc : {1000.0, 2000.0, 4000.0, 8000.0}) {
      const auto g = gammatone_impulse_response(fc, cfg);
      std::size_t arg = 0;
      for (std::size_t i = 1; i < g.size(); ++i)
        if (std::abs(g[i]) > std::abs(g[arg])) arg = i;
      const double t_peak = 3.0 / (testutil::kTwoPi * gammatone_bandwidth(fc));
      CHECK(std::abs(static_cast<double>(arg) / kFs - t_peak) <= 1.0 / fc);
    }
  }

  SUBCASE("magnitude response peaks at fc with unit gain") {
    for (double fc : {200.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0}) {
      const auto g = gammatone_impulse_response(fc, cfg);
      double best_f = 0.0, best = -1.0;
      for (int k = -400; k <= 400; ++k) {
        const double f = fc * (1.0 + 0.0005 * k);
        const double m = testutil::dtft_mag(g, f);
        if (m > best) {
          best = m;
          best_f = f;
        }
      }
      CHECK(std::abs(best_f - fc) <= 0.02 * fc);
      CHECK(testutil::dtft_mag(g, fc) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("out of band") {
    CHECK_THROWS_AS(gammatone_impulse_response(20.0, cfg), DomainError);
    CHECK_THROWS_AS(gammatone_impulse_response(30000.0, cfg), DomainError);
  }
}

TEST_CASE("filter_channel") {
  const FilterbankConfig cfg;

  SUBCASE("impulse gives the impulse response") {
    Signal x(4000, 0.0);
    x[0] = 1.0;
    const auto y = filter_channel(x, 1000.0, cfg);
    const auto g = gammatone_impulse_response(1000.0, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(y[i] == doctest::Approx(g[i]).epsilon(1e-9).scale(1.0));
    for (std::size_t i = g.size(); i < y.size(); ++i) CHECK(std::abs(y[i]) < 1e-12);
  }

  SUBCASE("on-centre tone passes, 4 fc is rejected") {
    for (double fc : {250.0, 1000.0, 4000.0}) {
      const auto x = testutil::tone(fc, 1.0);
      const double on = testutil::rms(filter_channel(x, fc, cfg)) / testutil::rms(x);
      CHECK(on == doctest::Approx(1.0).epsilon(0.05));
      const auto z = testutil::tone(4.0 * fc, 1.0);
      const double off = testutil::rms(filter_channel(z, fc, cfg)) / testutil::rms(z);
      CHECK(20.0 * std::log10(off / on) <= -20.0);
    }
  }

  SUBCASE("FFT route matches direct convolution") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    Signal x(5000);
    for (auto& v : x) v = nd(gen);
    for (double fc : {60.0, 900.0, 15000.0}) {
      const auto a = filter_channel(x, fc, cfg);
      const auto b = filter_channel_direct(x, fc, cfg);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
      }
      CHECK(std::sqrt(num / den) < 1e-6);
    }
  }

  SUBCASE("linearity") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    Signal x(3000), z(3000), mix(3000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = nd(gen);
      z[i] = nd(gen);
      mix[i] = 2.5 * x[i] - 0.7 * z[i];
    }
    const auto fx = filter_channel(x, 700.0, cfg), fz = filter_channel(z, 700.0, cfg);
    const auto fm = filter_channel(mix, 700.0, cfg);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fm.size(); ++i) {
      const double e = 2.5 * fx[i] - 0.7 * fz[i];
      num += (fm[i] - e) * (fm[i] - e);
      den += e * e;
    }
    CHECK(std::sqrt(num / den) < 1e-6);
  }

  CHECK_THROWS_AS(filter_channel(Signal{}, 1000.0, cfg), ArgumentError);
}

TEST_CASE("filterbank serial and parallel outputs agree") {
  const GammatoneFilterbank bank(FilterbankConfig{});
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  Signal x(22050);
  for (auto& v : x) v = nd(gen);
  CHECK(bank.filter(x) == bank.filter_serial(x));
}

TEST_CASE("gammatonegram") {
  const FilterbankConfig fb;
  const GammatonegramConfig gg;
  const GammatoneFilterbank bank(fb);
  CHECK(gg.window_samples(kFs) == 1103);
  CHECK(gg.hop_samples(kFs) == 441);
  CHECK(gg.bins_per_frame(kFs) == 48);

  SUBCASE("silence sits on the floor") {
    const auto g = gammatonegram(Signal(22050, 0.0), bank, gg);
    CHECK(g.channels() == 64);
    CHECK(g.bins() == 48);
    for (double v : g.energies.data()) CHECK(v == gg.floor_db);
  }

  SUBCASE("tone at each centre frequency lands in its channel") {
    const auto& fc = bank.center_freqs();
    int hits = 0;
    for (std::size_t k = 0; k < fc.size(); ++k) {
      const auto g = gammatonegram(testutil::tone(fc[k], 0.5, kFs, 0.5, 0.3), bank, gg);
      std::size_t best = 0;
      double best_v = -1e300;
      for (std::size_t m = 0; m < g.channels(); ++m) {
        double s = 0.0;
        for (double v : g.energies.row(m)) s += v;
        if (s > best_v) {
          best_v = s;
          best = m;
        }
      }
      hits += best == k;
      CHECK_MESSAGE(best == k, "channel ", k, " fc ", fc[k]);
    }
    CHECK(hits == 64);
  }

  SUBCASE("scaling by 10 adds 20 dB") {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    Signal x(22050), y(22050);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = 0.01 * nd(gen);
      y[i] = 10.0 * x[i];
    }
    const auto a = gammatonegram(x, bank, gg), b = gammatonegram(y, bank, gg);
    for (std::size_t i = 0; i < a.energies.size(); ++i) {
      const double va = a.energies.data()[i], vb = b.energies.data()[i];
      if (va > gg.floor_db + 1.0) CHECK(std::abs(vb - va - 20.0) < 1e-9);
      CHECK(vb >= gg.floor_db);
    }
  }

  SUBCASE("adding in-band power never lowers a bin") {
    const auto a = testutil::tone(1000.0, 0.5, kFs, 0.3);
    const auto b = testutil::tone(3000.0, 0.5, kFs, 0.2, 1.0);
    Signal ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] + b[i];
    const auto ga = gammatonegram(a, bank, gg), gab = gammatonegram(ab, bank, gg);
    const auto& fc = bank.center_freqs();
    for (std::size_t m = 0; m < fc.size(); ++m) {
      if (std::abs(fc[m] - 3000.0) > gammatone_bandwidth(3000.0)) continue;
      for (std::size_t n = 0; n < ga.bins(); ++n) CHECK(gab.energies(m, n) >= ga.energies(m, n) - 1e-9);
    }
  }

  SUBCASE("same shape for every frame of a long clip") {
    const auto x = testutil::tone(500.0, 3.0);
    for (std::size_t f = 0; f < 6; ++f) {
      const auto g = gammatonegram(std::span<const double>(x).subspan(f * 22050, 22050), bank, gg);
      CHECK(g.channels() == 64);
      CHECK(g.bins() == 48);
    }
  }

  SUBCASE("too short") { CHECK_THROWS_AS(gammatonegram(Signal(1000, 0.1), bank, gg), ArgumentError); }
}
