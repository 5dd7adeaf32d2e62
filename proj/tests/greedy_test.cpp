// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sopot_fbmc/greedy.hpp"

using namespace sopot;

namespace {

double norm2(const std::vector<double>& r) {
  double s = 0;
  for (double x : r) s += x * x;
  return s;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

} // namespace

TEST(NearestPow2Depth, Examples) {
  EXPECT_EQ(nearest_pow2_depth(0.7, 1), 1);
  EXPECT_EQ(nearest_pow2_depth(0.09375, 1), 3);
  EXPECT_EQ(nearest_pow2_depth(1.0, 2), 1);
}

TEST(NearestPow2Depth, Errors) {
  EXPECT_THROW(nearest_pow2_depth(0.0), invalid_input);
  EXPECT_THROW(nearest_pow2_depth(-0.5), invalid_input);
}

TEST(NearestPow2Depth, PropertyBoundingRegion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t p = 1 + rng() % 30;
    const double mag = std::ldexp(u(rng), -static_cast<int>(rng() % 30)) * static_cast<double>(p);
    if (mag == 0.0) continue;
    const int k = nearest_pow2_depth(mag, p);
    const long double mean = static_cast<long double>(mag) / p;
    ASSERT_LE(0.75L * std::ldexp(1.0L, -k), mean);
    ASSERT_LT(mean, 0.75L * std::ldexp(1.0L, -k + 1));
  }
  // lower edge is inclusive, upper edge exclusive
  for (int k = -3; k < 30; ++k) {
    EXPECT_EQ(nearest_pow2_depth(0.75 * std::ldexp(1.0, -k)), k);
    EXPECT_EQ(nearest_pow2_depth(1.5 * std::ldexp(1.0, -k)), k - 1);
  }
}

TEST(Sdl, ExactDyadicStopsEarly) {
  const auto res = sdl_approximate(std::vector<double>{0.5, 0.0}, {4, 10});
  ASSERT_EQ(res.approx.terms().size(), 1u);
  EXPECT_EQ(res.approx.terms()[0], (SptTerm{0, 1, 1}));
  EXPECT_EQ(res.trace.iterations.back().residue_inf_norm, 0.0);
}

TEST(Sdl, ScalarHandExecution) {
  const auto res = sdl_approximate(std::vector<double>{0.7}, {3, 10});
  ASSERT_EQ(res.approx.terms().size(), 3u);
  EXPECT_EQ(res.approx.terms()[0], (SptTerm{0, 1, 1}));
  EXPECT_EQ(res.approx.terms()[1], (SptTerm{0, 2, 1}));
  EXPECT_EQ(res.approx.terms()[2], (SptTerm{0, 4, -1}));
  EXPECT_EQ(reconstruct(res.approx)[0], 0.6875);
  EXPECT_NEAR(res.trace.iterations[0].residue_inf_norm, 0.2, 1e-15);
  EXPECT_NEAR(res.trace.iterations[1].residue_inf_norm, 0.05, 1e-15);
  EXPECT_NEAR(res.trace.iterations[2].residue_inf_norm, 0.0125, 1e-15);
}

TEST(Sdl, TwoElementVector) {
  const auto res = sdl_approximate(std::vector<double>{0.7, -0.3}, {2, 10});
  EXPECT_EQ(reconstruct(res.approx), (std::vector<double>{0.5, -0.25}));
  EXPECT_EQ(res.approx.terms()[1], (SptTerm{1, 2, -1}));
}

TEST(Sdl, DepthLimitStopsOnFirstOverDeepRequest) {
  const auto res = sdl_approximate(std::vector<double>{0.7}, {10, 3});
  // 0.7 -> k=1, r=0.2 -> k=2, r=-0.05 -> k=4 > 3: stop
  EXPECT_EQ(res.approx.terms().size(), 2u);
  for (const auto& t : res.approx.terms()) EXPECT_LE(t.depth, 3);
}

TEST(Sdl, Errors) {
  EXPECT_THROW(sdl_approximate(std::vector<double>{}, {4, 10}), invalid_input);
  EXPECT_THROW(sdl_approximate(std::vector<double>{1.5}, {4, 10}), invalid_input);
  EXPECT_THROW(sdl_approximate(std::vector<double>{0.5}, {0, 10}), invalid_input);
}

TEST(Sdl, TiesPickFirstIndex) {
  const auto res = sdl_approximate(std::vector<double>{0.3, -0.3, 0.3}, {1, 10});
  EXPECT_EQ(res.approx.terms()[0].position, 0u);
}

TEST(Sdl, PropertyContractionOnScalars) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100000; ++trial) {
    double r = u(rng);
    const auto res = sdl_approximate(std::vector<double>{r}, {8, 40});
    for (const auto& t : res.approx.terms()) {
      const double next = r - t.sign * std::ldexp(1.0, -t.depth);
      ASSERT_LE(3.0L * std::abs(static_cast<long double>(next)), std::abs(static_cast<long double>(r))) << "trial " << trial;
      r = next;
    }
  }
}

TEST(Sdl, PropertyInfNormMonotoneAndExactBudget) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = random_vector(rng, 1 + rng() % 200);
    const std::size_t budget = 1 + rng() % (4 * v.size()); // depth 40 never binds at this density
    const auto res = sdl_approximate(v, {budget, 40});
    EXPECT_EQ(spt_count(res.approx), budget);
    double prev = 0;
    for (double x : v) prev = std::max(prev, std::abs(x));
    for (const auto& step : res.trace.iterations) {
      EXPECT_LE(step.residue_inf_norm, prev);
      prev = step.residue_inf_norm;
    }
  }
}

TEST(Sdl, Deterministic) {
  std::mt19937_64 rng(1);
  const auto v = random_vector(rng, 64);
  const auto a = sdl_approximate(v, {100, 20});
  const auto b = sdl_approximate(v, {100, 20});
  EXPECT_EQ(a.approx, b.approx);
}

TEST(Mpgbp, SingleIterationExact) {
  const auto res = mpgbp_approximate(std::vector<double>{0.5, -0.5, 0.0, 0.0}, {4, 10});
  ASSERT_EQ(res.trace.iterations.size(), 1u);
  EXPECT_EQ(res.trace.iterations[0].depth, 1);
  EXPECT_EQ(res.trace.iterations[0].signs, (std::vector<int>{1, -1}));
  EXPECT_EQ(reconstruct(res.approx), (std::vector<double>{0.5, -0.5, 0.0, 0.0}));
}

TEST(Mpgbp, ScalarMatchesSdl) {
  const auto m = mpgbp_approximate(std::vector<double>{0.7}, {3, 10});
  const auto s = sdl_approximate(std::vector<double>{0.7}, {3, 10});
  EXPECT_EQ(m.approx, s.approx);
}

TEST(Mpgbp, ZeroVector) {
  const auto res = mpgbp_approximate(std::vector<double>(9, 0.0), {10, 10});
  EXPECT_TRUE(res.approx.terms().empty());
  EXPECT_TRUE(res.trace.iterations.empty());
}

TEST(Mpgbp, Errors) {
  EXPECT_THROW(mpgbp_approximate(std::vector<double>{}, {4, 10}), invalid_input);
  EXPECT_THROW(mpgbp_approximate(std::vector<double>{-1.01}, {4, 10}), invalid_input);
}

TEST(Mpgbp, CodewordWeight) {
  EXPECT_EQ(mpgbp_codeword_weight(1), 1u);
  EXPECT_EQ(mpgbp_codeword_weight(4), 2u);
  EXPECT_EQ(mpgbp_codeword_weight(8), 2u);
  EXPECT_EQ(mpgbp_codeword_weight(512), 22u);
}

TEST(Mpgbp, PropertyEnergyDecreasesAndBudget) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 4 + rng() % 509;
    const auto v = random_vector(rng, n);
    const std::size_t p = mpgbp_codeword_weight(n);
    const std::size_t budget = 1 + rng() % (3 * n);
    const auto res = mpgbp_approximate(v, {budget, 40});

    std::vector<double> r = v;
    double energy = norm2(r);
    for (const auto& step : res.trace.iterations) {
      for (std::size_t j = 0; j < step.positions.size(); ++j) r[step.positions[j]] -= step.signs[j] * std::ldexp(1.0, -step.depth);
      const double next = norm2(r);
      ASSERT_LT(next, energy) << "trial " << trial;
      energy = next;
    }
    EXPECT_LE(spt_count(res.approx), budget + p - 1);
    EXPECT_EQ(spt_count(res.approx), (budget + p - 1) / p * p); // depth 40 never binds here
  }
}
