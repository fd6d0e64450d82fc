#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spinbench/optimize.hpp"

using namespace spinbench::optimize;

TEST(NelderMead, ReachesThresholdOnBowl) {
  auto f = [](const std::vector<double>& x) {
    return std::abs(x[0] - 1.0) + std::abs(x[1] - 2.0) + std::abs(x[2] - 0.5);
  };
  NelderMeadOptions o;
  o.initial_step = 0.1;
  o.threshold = 1e-3;
  o.max_iterations = 500;
  const auto r = nelder_mead(f, {1.2, 1.8, 0.6}, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.value, 1e-3);
  EXPECT_EQ(r.trace.back().value, r.value);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].value, r.trace[k - 1].value + 1e-15);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions o;
  o.initial_step = 0.5;
  o.threshold = 1e-8;
  o.max_iterations = 2000;
  const auto r = nelder_mead(f, {-1.2, 1.0}, o);
  EXPECT_NEAR(r.best[0], 1.0, 1e-3);
  EXPECT_NEAR(r.best[1], 1.0, 2e-3);
}

TEST(NelderMead, StopsAtIterationCap) {
  auto f = [](const std::vector<double>& x) { return 1.0 + x[0] * x[0]; };
  NelderMeadOptions o;
  o.threshold = 0.5;
  o.max_iterations = 7;
  const auto r = nelder_mead(f, {3.0}, o);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 7u);
}

TEST(NelderMead, SurvivesNoisyObjective) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.002);
  auto f = [&](const std::vector<double>& x) {
    return 28.0 * (std::abs(x[0] / 1.3 - 1.0) + std::abs(x[1] / 0.7 - 1.0)) + std::abs(g(rng));
  };
  NelderMeadOptions o;
  o.threshold = 0.01;
  o.max_iterations = 200;
  const auto r = nelder_mead(f, {1.32, 0.69}, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.best[0], 1.3, 1.3 * 5e-4);
}

TEST(NelderMead, RejectsEmptyStart) {
  auto f = [](const std::vector<double>&) { return 0.0; };
  EXPECT_THROW(nelder_mead(f, {}), std::invalid_argument);
}
