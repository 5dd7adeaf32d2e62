// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sopot_fbmc/csd.hpp"
#include "sopot_fbmc/experiments.hpp"
#include "sopot_fbmc/fbmc.hpp"

using namespace sopot;

namespace {

std::vector<int> digit_string(const SopotApprox& a, int B) {
  std::vector<int> d(static_cast<std::size_t>(B) + 1, 0);
  for (const auto& t : a.terms()) d[static_cast<std::size_t>(t.depth)] += t.sign;
  return d;
}

bool is_naf(const SopotApprox& a) {
  std::vector<int> depths;
  for (const auto& t : a.terms()) depths.push_back(t.depth);
  std::sort(depths.begin(), depths.end());
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] - depths[i - 1] < 2) return false;
  return true;
}

} // namespace

TEST(QuantizeFixedPoint, Examples) {
  const auto w = quantize_fixed_point(0.4375, 5);
  EXPECT_EQ(w.value(), 0.4375);
  EXPECT_EQ(std::vector<int>(w.bits().begin(), w.bits().end()), (std::vector<int>{0, 0, 1, 1, 1}));
  EXPECT_EQ(quantize_fixed_point(0.7, 3).value(), 0.75);
  EXPECT_EQ(quantize_fixed_point(-1.2, 4).value(), -1.0);
}

TEST(QuantizeFixedPoint, TiesToEvenAndSaturation) {
  // 0.125 on a 0.25 grid sits between 0 and 0.25; even LSB wins
  EXPECT_EQ(quantize_fixed_point(0.125, 3).value(), 0.0);
  EXPECT_EQ(quantize_fixed_point(0.375, 3).value(), 0.5);
  EXPECT_EQ(quantize_fixed_point(0.99, 3).value(), 0.75);
  EXPECT_EQ(quantize_fixed_point(5.0, 6).value(), 1.0 - 1.0 / 32);
}

TEST(QuantizeFixedPoint, Errors) {
  EXPECT_THROW(quantize_fixed_point(std::nan(""), 4), invalid_input);
  EXPECT_THROW(quantize_fixed_point(0.5, 1), invalid_input);
}

TEST(CsdRecode, Examples) {
  const auto a = csd_recode(quantize_fixed_point(0.4375, 5));
  EXPECT_EQ(digit_string(a, 5), (std::vector<int>{0, 1, 0, 0, -1, 0}));
  EXPECT_EQ(reconstruct(a)[0], 0.4375);

  EXPECT_TRUE(csd_recode(quantize_fixed_point(0.0, 6)).terms().empty());

  const auto b = csd_recode(quantize_fixed_point(0.625, 4));
  EXPECT_EQ(digit_string(b, 4), (std::vector<int>{0, 1, 0, 1, 0}));
}

TEST(CsdRecode, NegativeAndExtremeWords) {
  EXPECT_EQ(reconstruct(csd_recode(FixedPointWord::from_integer(3, -4)))[0], -1.0);
  const auto near_one = csd_recode(quantize_fixed_point(0.875, 4)); // 1 - 1/8
  EXPECT_EQ(spt_count(near_one), 2u);
  EXPECT_EQ(reconstruct(near_one)[0], 0.875);
}

TEST(CsdRecode, ExhaustiveExactnessAndNafUpTo12Bits) {
  for (int B = 2; B <= 12; ++B) {
    const std::int64_t half = std::int64_t{1} << (B - 1);
    for (std::int64_t q = -half; q < half; ++q) {
      const auto w = FixedPointWord::from_integer(B, q);
      const auto c = csd_recode(w);
      ASSERT_EQ(reconstruct(c)[0], w.value()) << "B=" << B << " q=" << q;
      ASSERT_TRUE(is_naf(c)) << "B=" << B << " q=" << q;
      ASSERT_EQ(static_cast<int>(spt_count(c)), oracle::naf_weight(q)) << "B=" << B << " q=" << q;
    }
  }
}

TEST(CsdRecode, MinimalWeightAgainstBruteForceUpTo8Bits) {
  for (int B = 2; B <= 8; ++B) {
    const auto best = oracle::min_signed_digit_weights(B);
    const std::int64_t half = std::int64_t{1} << (B - 1);
    for (std::int64_t q = -half; q < half; ++q) {
      const auto c = csd_recode(FixedPointWord::from_integer(B, q));
      ASSERT_EQ(static_cast<int>(spt_count(c)), best.at(2 * q)) << "B=" << B << " q=" << q;
    }
  }
}

TEST(CsdRecode, DensityApproachesOneThird) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int B = 16;
  double total = 0.0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) total += static_cast<double>(spt_count(csd_recode(quantize_fixed_point(u(rng), B))));
  const double fraction = total / samples / B;
  EXPECT_NEAR(fraction, 1.0 / 3.0, 0.03 / 3.0);
}

TEST(CsdVector, ZeroVectorAndPrecondition) {
  EXPECT_EQ(spt_count(csd_vector(std::vector<double>(10, 0.0), 6)), 0u);
  EXPECT_THROW(csd_vector(std::vector<double>{1.5}, 6), invalid_input);
}

TEST(CsdVector, HeadroomKeepsGridStep) {
  const std::vector<double> v{3.3, -0.2};
  const auto a = csd_vector_headroom(v, 4); // step 2^-3
  EXPECT_EQ(a.scale_exponent(), 2);
  EXPECT_EQ(reconstruct(a), (std::vector<double>{3.25, -0.25}));
}

TEST(CsdVector, PhydyasDensity) {
  const auto g = fbmc::phydyas_prototype(128, 4);
  const auto b4 = sim::approximate_filter(g, {sim::Method::csd, 4});
  const auto b8 = sim::approximate_filter(g, {sim::Method::csd, 8});
  EXPECT_NEAR(b4.raw_spt_per_coeff(), 1.8, 0.15);
  EXPECT_NEAR(b8.raw_spt_per_coeff(), 3.1, 0.15);
}
