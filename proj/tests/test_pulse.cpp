#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "spinbench/common.hpp"
#include "spinbench/pulse.hpp"

using namespace spinbench;
using namespace spinbench::pulse;

namespace {

// I0(x) = (1/pi) int_0^pi exp(x cos t) dt, composite Simpson.
double i0_integral(double x) {
  const int n = 2000;
  const double h = std::numbers::pi / n;
  double s = std::exp(x) + std::exp(-x);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * std::exp(x * std::cos(k * h));
  return s * h / 3.0 / std::numbers::pi;
}

}  // namespace

TEST(Bessel, MatchesIntegralRepresentation) {
  for (double x : {0.0, 0.5, 1.0, 3.0, 8.0, 12.0}) {
    EXPECT_NEAR(bessel_i0(x) / i0_integral(x), 1.0, 1e-10) << x;
  }
  EXPECT_DOUBLE_EQ(bessel_i0(0.0), 1.0);
}

TEST(Kaiser, WindowFormulaAndSampling) {
  const double tg = 83.0;
  const double beta = 8.0;
  const auto env = make_kaiser(tg, beta, 0.5);
  ASSERT_EQ(env.step_count(), 166u);
  EXPECT_NEAR(env.peak(), 1.0, 1e-12);
  const auto s = env.samples();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = 0.5 * static_cast<double>(k);
    const double r = 2.0 * t / tg - 1.0;
    const double expected = i0_integral(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_integral(beta);
    EXPECT_NEAR(s[k], expected, 1e-9) << k;
  }
  EXPECT_NEAR(s.front(), 1.0 / i0_integral(beta), 1e-9);
}

TEST(Kaiser, AreaIsTrapezoidIntegral) {
  const auto env = make_kaiser(125.0, 8.0, 0.5);
  const auto s = env.samples();
  double a = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) a += 0.25 * (s[k] + s[k + 1]);
  EXPECT_NEAR(env.area(), a, 1e-12);
  double steps = 0.0;
  for (double v : env.step_values()) steps += v * 0.5;
  EXPECT_NEAR(steps, env.area(), 1e-12);
}

TEST(Kaiser, AreaNormalizationMatchesRectangle) {
  const auto unit = make_kaiser(83.0, 8.0);
  const auto env = normalize_area(unit, 0.4, 83.0);
  EXPECT_NEAR(env.area(), 0.4 * 83.0, 1e-9);
  EXPECT_THROW(normalize_area(unit, 0.4, 41.5), std::invalid_argument);
  EXPECT_GT(env.peak(), 0.4);
}

TEST(Shapes, RoundTripNamesAndRejectUnknown) {
  for (auto s : {Shape::Rectangular, Shape::Kaiser, Shape::Sech, Shape::Gaussian, Shape::GaussianSquare}) {
    EXPECT_EQ(shape_from_string(to_string(s)), s);
  }
  EXPECT_THROW(shape_from_string("hann"), std::invalid_argument);
}

TEST(Shapes, AllAreSymmetricUnitPeak) {
  for (auto s : {Shape::Rectangular, Shape::Kaiser, Shape::Sech, Shape::Gaussian, Shape::GaussianSquare}) {
    const auto env = make_shape(s, 100.0, default_shape_param(s));
    const auto v = env.samples();
    EXPECT_NEAR(env.peak(), 1.0, 1e-12);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], v[v.size() - 1 - k], 1e-12);
  }
}

TEST(Shapes, RejectBadGateTimes) {
  EXPECT_THROW(make_kaiser(0.0, 8.0), std::invalid_argument);
  EXPECT_THROW(make_kaiser(83.0, -1.0), std::invalid_argument);
  EXPECT_THROW(make_kaiser(83.0, 8.0, 0.0), std::invalid_argument);
}

TEST(Spectrum, RectangularFirstSidelobeIsSinc) {
  const double tg = 100.0;
  const auto env = make_shape(Shape::Rectangular, tg, 0.0, 0.5);
  const auto table = spectrum(env, 0.0, 0.01);
  const auto lobes = analyze_sidelobes(table);
  // N + 1 unit samples act as a rectangle of width (N + 1) dt.
  const double width = static_cast<double>(env.samples().size()) * env.sample_step_ns();
  // |sinc|^2 first sidelobe: maximum of (sin x / x)^2 near x = 4.4934.
  double x = 4.4934;
  for (int i = 0; i < 20; ++i) x -= (std::tan(x) - x) / (1.0 / std::pow(std::cos(x), 2) - 1.0);
  const double oracle_db = 20.0 * std::log10(std::abs(std::sin(x) / x));
  EXPECT_NEAR(lobes.first_sidelobe_db, oracle_db, 0.3);
  EXPECT_NEAR(oracle_db, -13.26, 0.01);
  EXPECT_NEAR(std::abs(lobes.first_sidelobe_offset_mhz), x / std::numbers::pi / (width * kMhzNs), 0.02);
}

TEST(Spectrum, KaiserSidelobesBelow55dB) {
  const auto env = make_kaiser(100.0, 8.0, 0.5);
  const auto lobes = analyze_sidelobes(spectrum(env, 0.0, 0.01));
  EXPECT_LT(lobes.max_sidelobe_db, -55.0);
}

TEST(Spectrum, CarrierShiftsPeak) {
  const auto env = make_kaiser(100.0, 8.0, 0.5);
  const auto table = spectrum(env, 20.0, 0.01);
  auto best = table.front();
  for (const auto& p : table) {
    if (p.power_db > best.power_db) best = p;
  }
  EXPECT_NEAR(best.freq_mhz, 20.0, 0.011);
  EXPECT_NEAR(best.power_db, 0.0, 1e-9);
}
