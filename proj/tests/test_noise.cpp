#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "spinbench/common.hpp"
#include "spinbench/noise.hpp"

using namespace spinbench;
using namespace spinbench::noise;

namespace {

// 2 int S df by the trapezoid rule on a log grid.
double variance_quadrature(const NoiseModel& m, double lo, double hi) {
  const int n = 200000;
  const double a = std::log(lo);
  const double b = std::log(hi);
  const double h = (b - a) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double f = std::exp(a + k * h);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    s += w * m.psd(f) * f;
  }
  return 2.0 * s * h;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Psd, ModelValuesAndChiScaling) {
  NoiseModel m;
  EXPECT_NEAR(m.psd(1.0), 1e7 * 1.25, 1e-3);
  EXPECT_NEAR(m.psd(100.0), 1e7 * (0.25 * std::pow(100.0, -1.3) + 0.01), 1e-6);
  NoiseModel m2 = m;
  m2.chi = 2.0;
  for (double f : {1e-3, 1.0, 1e4}) EXPECT_NEAR(m2.psd(f) / m.psd(f), 2.0, 1e-12);
  EXPECT_THROW(m.psd(0.0), std::invalid_argument);
}

TEST(Psd, BandVarianceMatchesQuadrature) {
  NoiseModel m;
  for (auto [lo, hi] : {std::pair{1e-3, 1.0}, {0.5, 300.0}, {1e3, 5e7}}) {
    EXPECT_NEAR(m.band_variance(lo, hi) / variance_quadrature(m, lo, hi), 1.0, 1e-6);
  }
  EXPECT_EQ(m.band_variance(2.0, 1.0), 0.0);
}

TEST(Psd, ValidateRejectsBadModels) {
  NoiseModel m;
  m.chi = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = {};
  m.psd_coeff_a = 0.0;
  m.psd_coeff_b = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = {};
  m.f_lf_max = 10.0;
  m.f_if_max = 5.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Welch, WhiteNoiseLevel) {
  // Two-sided density of white noise of variance s^2 sampled every dt is s^2 dt.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 3.0);
  const double dt = 1e-3;
  std::vector<double> x(1 << 17);
  for (double& v : x) v = g(rng);
  const auto p = verify_psd(x, dt);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 2; k + 2 < p.psd.size(); ++k) {
    s += p.psd[k];
    ++n;
  }
  EXPECT_NEAR(s / static_cast<double>(n), 9.0 * dt, 0.03 * 9.0 * dt);
  EXPECT_NEAR(p.freq_hz.back(), 0.5 / dt, 1e-9);
}

TEST(Welch, SineLandsInItsBin) {
  const double dt = 1e-3;
  const double f0 = 62.5;
  std::vector<double> x(1 << 16);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(kTwoPi * f0 * dt * static_cast<double>(i));
  const auto p = verify_psd(x, dt, 4096);
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.psd.size(); ++k) {
    if (p.psd[k] > p.psd[best]) best = k;
  }
  EXPECT_NEAR(p.freq_hz[best], f0, 1.0 / (4096 * dt));
  // Power: sum over both signs equals the variance 1/2.
  double total = 0.0;
  for (std::size_t k = 1; k < p.psd.size(); ++k) total += 2.0 * p.psd[k] / (4096 * dt);
  EXPECT_NEAR(total, 0.5, 0.01);
}

TEST(Welch, RejectsShortAndFlagsDegenerate) {
  std::vector<double> shortx(1000, 0.0);
  EXPECT_THROW(verify_psd(shortx, 1e-3), std::invalid_argument);
  std::vector<double> zeros(1 << 16, 0.0);
  EXPECT_TRUE(verify_psd(zeros, 1e-3).degenerate);
}

TEST(Synthesis, BandVarianceReproduced) {
  NoiseModel m;
  const double lo = 10.0;
  const double hi = 1000.0;
  const double step = 1e-4;
  std::mt19937_64 rng(2);
  double acc = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    auto x = synthesize_band(m, lo, hi, step, 4096, rng);
    acc += variance(x);
  }
  EXPECT_NEAR(acc / reps / m.band_variance(lo, hi), 1.0, 0.05);
}

TEST(Synthesis, SpectrumFollowsModel) {
  NoiseModel m;
  std::mt19937_64 rng(4);
  const double dt = 1e-3;
  const auto x = synthesize_band(m, 1e-3, 0.5 / dt, dt, 1 << 18, rng);
  const auto bins = log_bin(verify_psd(x, dt, 1 << 14), 0.5, 400.0, 3);
  ASSERT_GE(bins.freq_hz.size(), 8u);
  for (std::size_t k = 0; k < bins.freq_hz.size(); ++k) {
    const double db = 10.0 * std::log10(bins.psd[k] / m.psd(bins.freq_hz[k]));
    EXPECT_LT(std::abs(db), 3.0) << bins.freq_hz[k];
  }
}

TEST(Synthesis, ChiZeroIsSilent) {
  NoiseModel m;
  m.chi = 0.0;
  std::mt19937_64 rng(1);
  for (double v : synthesize_band(m, 1.0, 10.0, 1e-3, 100, rng)) EXPECT_EQ(v, 0.0);
}

TEST(Synthesizer, DeterministicAndOrderIndependent) {
  NoiseModel m;
  m.seed = 42;
  ExperimentSchedule sch;
  for (std::size_t n : {10u, 50u, 200u}) sch.add_sequence(n, 125.0, 350);
  sch.add_dead_time(300.0);
  const NoiseSynthesizer a(m, sch);
  const NoiseSynthesizer b(m, sch);
  const auto last_first = b.sequence(2);
  const auto first = b.sequence(0);
  EXPECT_EQ(a.sequence(2).if_mhz, last_first.if_mhz);
  EXPECT_EQ(a.sequence(0).hf_mhz, first.hf_mhz);
  EXPECT_EQ(a.lf_mhz(1), b.lf_mhz(1));
  EXPECT_EQ(first.if_mhz.size(), 10u);
  EXPECT_EQ(first.hf_mhz.size(), 10u * first.hf_per_gate);
  EXPECT_NEAR(a.edges().f_min, 1.0 / sch.total_span_s, 1e-15);
  m.seed = 43;
  EXPECT_NE(NoiseSynthesizer(m, sch).sequence(0).if_mhz, first.if_mhz);
}

TEST(Synthesizer, BandsCanBeDisabled) {
  NoiseModel m;
  m.lf_enabled = false;
  m.hf_enabled = false;
  ExperimentSchedule sch;
  sch.add_sequence(20, 83.0, 100);
  const NoiseSynthesizer s(m, sch);
  EXPECT_EQ(s.lf_mhz(0), 0.0);
  EXPECT_TRUE(s.sequence(0).hf_mhz.empty());
  EXPECT_EQ(s.sequence(0).if_mhz.size(), 20u);
  EXPECT_THROW(NoiseSynthesizer(m, ExperimentSchedule{}), std::invalid_argument);
}

TEST(QuasiStatic, RamseyDecayTimeFromSigma) {
  // exp(-(2 pi sigma t)^2 / 2) = 1/e at t = sqrt(2) / (2 pi sigma).
  const double sigma = 0.02;
  const double t = t2_star_from_sigma_us(sigma);
  EXPECT_NEAR(std::exp(-0.5 * std::pow(kTwoPi * sigma * t, 2)), std::exp(-1.0), 1e-12);
  EXPECT_TRUE(std::isinf(t2_star_from_sigma_us(0.0)));
}

TEST(QuasiStatic, ShotSpreadMatchesBand) {
  NoiseModel m;
  const std::size_t shots = 4096;
  const double cycle = 1e-3;
  const double upper = 1e5;
  double acc = 0.0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) acc += variance(quasi_static_shots(m, shots, cycle, upper, r));
  const double expected = m.band_variance(1.0 / (shots * cycle), upper) * 1e-12;
  EXPECT_NEAR(acc / reps / expected, 1.0, 0.1);
}

TEST(LogBin, AveragesWithinBands) {
  Periodogram p;
  for (int k = 0; k <= 1000; ++k) {
    p.freq_hz.push_back(k * 1.0);
    p.psd.push_back(2.0);
  }
  const auto b = log_bin(p, 1.0, 1000.0, 2);
  EXPECT_EQ(b.freq_hz.size(), 6u);
  for (double v : b.psd) EXPECT_DOUBLE_EQ(v, 2.0);
  EXPECT_THROW(log_bin(p, 0.0, 10.0, 2), std::invalid_argument);
}
