// SPDX-License-Identifier: Apache-2.0
#pragma once

// Element-by-element SOPOT: two's complement quantization followed by
// canonical signed digit (CSD) recoding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/sopot.hpp"

namespace sopot {

inline constexpr int max_wordlength = 62;

// B-bit two's complement fraction: value = -bit(0) + sum_{b>=1} bit(b) 2^-b.
class FixedPointWord {
public:
  FixedPointWord(int wordlength, std::vector<std::uint8_t> bits) : wordlength_(wordlength), bits_(std::move(bits)) {
    if (wordlength_ < 2 || wordlength_ > max_wordlength)
      throw invalid_input("wordlength must lie in [2, " + std::to_string(max_wordlength) + "]");
    if (bits_.size() != static_cast<std::size_t>(wordlength_)) throw invalid_input("bit vector length differs from wordlength");
    for (auto b : bits_)
      if (b > 1) throw invalid_input("bits must be 0 or 1");
  }

  // From the integer q in [-2^(B-1), 2^(B-1)) with value q * 2^-(B-1).
  static FixedPointWord from_integer(int wordlength, std::int64_t q) {
    if (wordlength < 2 || wordlength > max_wordlength) throw invalid_input("wordlength out of range");
    const std::int64_t half = std::int64_t{1} << (wordlength - 1);
    if (q < -half || q >= half) throw invalid_input("integer does not fit the wordlength");
    const auto u = static_cast<std::uint64_t>(q < 0 ? q + 2 * half : q);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(wordlength));
    for (int b = 0; b < wordlength; ++b) bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((u >> (wordlength - 1 - b)) & 1u);
    return FixedPointWord(wordlength, std::move(bits));
  }

  int wordlength() const noexcept { return wordlength_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  int bit(int b) const { return bits_[static_cast<std::size_t>(b)]; }

  std::int64_t to_integer() const {
    std::int64_t q = -static_cast<std::int64_t>(bits_[0]);
    for (int b = 1; b < wordlength_; ++b) q = 2 * q + bits_[static_cast<std::size_t>(b)];
    return q;
  }

  double value() const { return std::ldexp(static_cast<double>(to_integer()), -(wordlength_ - 1)); }

  friend bool operator==(const FixedPointWord&, const FixedPointWord&) = default;

private:
  int wordlength_;
  std::vector<std::uint8_t> bits_;
};

// Round to nearest (ties to even LSB), saturating to [-1, 1 - 2^-(B-1)].
inline FixedPointWord quantize_fixed_point(double v, int wordlength) {
  if (!std::isfinite(v)) throw invalid_input("cannot quantize a non-finite value");
  if (wordlength < 2 || wordlength > max_wordlength) throw invalid_input("wordlength must lie in [2, 62]");
  const double half = std::ldexp(1.0, wordlength - 1);
  double q = std::nearbyint(std::ldexp(v, wordlength - 1));
  q = std::clamp(q, -half, half - 1.0);
  return FixedPointWord::from_integer(wordlength, static_cast<std::int64_t>(q));
}

// Canonical signed digit recoding of a two's complement word.
//
// Digits are produced from the LSB side: theta(i) flags a bit change between
// positions i and i+1, delta(i) = !delta(i+1) & theta(i) suppresses a digit
// next to one already placed, and the digit sign comes from the more
// significant neighbour (sign-extended at i = 0). Position i carries 2^-i, so
// the result lives on depths 0..B with no two adjacent nonzero digits.
inline SopotApprox csd_recode(const FixedPointWord& word) {
  const int B = word.wordlength();
  auto bit = [&](int i) -> int {
    if (i < 0) return word.bit(0);
    if (i >= B) return 0;
    return word.bit(i);
  };

  std::vector<SptTerm> digits;
  int delta_below = 0; // delta(i+1)
  for (int i = B; i >= 0; --i) {
    const int theta = bit(i) ^ bit(i + 1);
    const int delta = (1 - delta_below) * theta;
    if (delta != 0) digits.push_back({0, i, 1 - 2 * bit(i - 1)});
    delta_below = delta;
  }
  std::reverse(digits.begin(), digits.end());
  return SopotApprox(1, B, std::move(digits));
}

// Per-element CSD of a vector with max|v| <= 1, all words of length B.
inline SopotApprox csd_vector(std::span<const double> v, int wordlength) {
  std::vector<SptTerm> terms;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw invalid_input("non-finite value in input vector");
    if (std::abs(v[i]) > 1.0) throw invalid_input("csd_vector requires max|v| <= 1; rescale with unit_inf_scale first");
    const auto digits = csd_recode(quantize_fixed_point(v[i], wordlength));
    for (const auto& d : digits.terms()) terms.push_back({i, d.depth, d.sign});
  }
  return SopotApprox(v.size(), wordlength, std::move(terms));
}

// CSD with integer headroom: the vector is brought into [-1, 1] by 2^-s and
// quantized on B + s bit words, so the grid step stays 2^-(B-1) in the
// original units. B counts the sign bit and the fractional bits.
inline SopotApprox csd_vector_headroom(std::span<const double> v, int wordlength) {
  const auto scaled = unit_inf_scale(v);
  const auto approx = csd_vector(scaled.values, wordlength + scaled.exponent);
  return approx.with_scale_exponent(scaled.exponent);
}

inline double spt_per_coefficient(const SopotApprox& a) {
  return a.length() == 0 ? 0.0 : static_cast<double>(spt_count(a)) / static_cast<double>(a.length());
}

} // namespace sopot
