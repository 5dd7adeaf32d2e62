// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sum-of-signed-powers-of-two (SOPOT) representation of a real vector.
//
// An approximation is a flat list of signed-power-of-two terms (SPTs)
//
//     v_hat = 2^s * sum_i sign_i * 2^(-depth_i) * e(position_i)
//
// stored in the order the producing algorithm emitted them. The dense
// N x (B_max + 1) allocation matrix is a derived view (to_matrix).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sopot_fbmc/errors.hpp"

namespace sopot {

inline constexpr int default_depth_limit = 24;

struct SptTerm {
  std::size_t position = 0;
  int depth = 0;
  int sign = 1;

  friend bool operator==(const SptTerm&, const SptTerm&) = default;
};

class SopotApprox {
public:
  SopotApprox() = default;

  SopotApprox(std::size_t length, int depth_limit, std::vector<SptTerm> terms = {},
              int scale_exponent = 0)
      : length_(length), depth_limit_(depth_limit), scale_exponent_(scale_exponent),
        terms_(std::move(terms)) {
    if (depth_limit_ < 0) throw invalid_input("depth limit must be non-negative");
    for (const auto& t : terms_) {
      if (t.sign != 1 && t.sign != -1) throw invalid_input("SPT sign must be +1 or -1");
      if (t.depth < 0 || t.depth > depth_limit_)
        throw invalid_input("SPT depth " + std::to_string(t.depth) + " outside [0, " +
                            std::to_string(depth_limit_) + "]");
      if (t.position >= length_)
        throw invalid_input("SPT position " + std::to_string(t.position) + " outside vector of length " +
                            std::to_string(length_));
    }
  }

  std::size_t length() const noexcept { return length_; }
  int depth_limit() const noexcept { return depth_limit_; }
  int scale_exponent() const noexcept { return scale_exponent_; }
  std::span<const SptTerm> terms() const noexcept { return terms_; }

  // Same terms, global factor 2^s replaced. Used to fold power-of-two gains.
  SopotApprox with_scale_exponent(int s) const {
    SopotApprox out = *this;
    out.scale_exponent_ = s;
    return out;
  }

  friend bool operator==(const SopotApprox&, const SopotApprox&) = default;

private:
  std::size_t length_ = 0;
  int depth_limit_ = default_depth_limit;
  int scale_exponent_ = 0;
  std::vector<SptTerm> terms_;
};

// Dense ternary view: entry (m, n) is the sign allocated to position m at depth n.
class AllocationMatrix {
public:
  AllocationMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int at(std::size_t m, std::size_t n) const { return entries_[m * cols_ + n]; }
  void set(std::size_t m, std::size_t n, int value) { entries_[m * cols_ + n] = static_cast<std::int8_t>(value); }

  // C * p with p = [2^0, 2^-1, ..., 2^-(cols-1)].
  std::vector<double> times_basis() const {
    std::vector<double> out(rows_, 0.0);
    for (std::size_t m = 0; m < rows_; ++m)
      for (std::size_t n = 0; n < cols_; ++n)
        if (const int c = at(m, n); c != 0) out[m] += std::ldexp(static_cast<double>(c), -static_cast<int>(n));
    return out;
  }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](std::int8_t e) { return e != 0; }));
  }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::int8_t> entries_;
};

struct ScaledVector {
  std::vector<double> values;
  int exponent = 0;
};

// Smallest non-negative e with max|v / 2^e| <= 1. Exact: only the exponent changes.
inline int unit_inf_exponent(std::span<const double> v) {
  double peak = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw invalid_input("non-finite value in input vector");
    peak = std::max(peak, std::abs(x));
  }
  if (peak <= 1.0) return 0;
  int e = 0;
  const double frac = std::frexp(peak, &e); // peak = frac * 2^e, frac in [0.5, 1)
  return frac == 0.5 ? e - 1 : e;
}

inline ScaledVector unit_inf_scale(std::span<const double> v) {
  ScaledVector out;
  out.exponent = unit_inf_exponent(v);
  out.values.reserve(v.size());
  for (double x : v) out.values.push_back(std::ldexp(x, -out.exponent));
  return out;
}

inline std::vector<double> reconstruct(const SopotApprox& a) {
  std::vector<double> out(a.length(), 0.0);
  for (const auto& t : a.terms()) out[t.position] += std::ldexp(static_cast<double>(t.sign), -t.depth);
  if (a.scale_exponent() != 0)
    for (double& x : out) x = std::ldexp(x, a.scale_exponent());
  return out;
}

inline std::size_t spt_count(const SopotApprox& a) noexcept { return a.terms().size(); }

inline bool is_canonical(const SopotApprox& a) {
  std::vector<std::pair<std::size_t, int>> cells;
  cells.reserve(a.terms().size());
  for (const auto& t : a.terms()) cells.emplace_back(t.position, t.depth);
  std::sort(cells.begin(), cells.end());
  return std::adjacent_find(cells.begin(), cells.end()) == cells.end();
}

// Value-preserving reduction to at most one term per (position, depth) cell.
//
// Per position the signed counts are summed per depth and resolved from the
// deepest plane upward: an even count carries half of itself one plane up, an
// odd count keeps one digit of matching sign and carries the rest. A carry
// past depth 0 raises the scale exponent and pushes every depth one plane
// deeper (depth limit included), so depths stay non-negative.
inline SopotApprox merge_canonical(const SopotApprox& a) {
  if (is_canonical(a)) return a;

  std::map<std::size_t, std::map<int, std::int64_t>> counts;
  for (const auto& t : a.terms()) counts[t.position][t.depth] += t.sign;

  std::vector<SptTerm> resolved;
  int min_depth = 0;
  for (auto& [position, planes] : counts) {
    std::int64_t carry = 0;
    int depth = planes.empty() ? 0 : planes.rbegin()->first;
    auto next = planes.rbegin();
    while (true) {
      std::int64_t n = carry;
      if (next != planes.rend() && next->first == depth) {
        n += next->second;
        ++next;
      }
      if (n % 2 != 0) {
        const int digit = n > 0 ? 1 : -1;
        resolved.push_back({position, depth, digit});
        min_depth = std::min(min_depth, depth);
        n -= digit;
      }
      carry = n / 2;
      if (carry == 0 && next == planes.rend()) break;
      --depth;
    }
  }

  const int shift = -min_depth;
  for (auto& t : resolved) t.depth += shift;
  std::sort(resolved.begin(), resolved.end(), [](const SptTerm& x, const SptTerm& y) {
    return x.position != y.position ? x.position < y.position : x.depth < y.depth;
  });
  return SopotApprox(a.length(), a.depth_limit() + shift, std::move(resolved), a.scale_exponent() + shift);
}

inline AllocationMatrix to_matrix(const SopotApprox& a) {
  if (!is_canonical(a)) throw not_canonical();
  AllocationMatrix c(a.length(), static_cast<std::size_t>(a.depth_limit()) + 1);
  for (const auto& t : a.terms()) c.set(t.position, static_cast<std::size_t>(t.depth), t.sign);
  return c;
}

} // namespace sopot
