// SPDX-License-Identifier: Apache-2.0
#pragma once

// Greedy vector SOPOT approximation: Signed Digit Loading (one SPT per step on
// the largest residue) and Matching Pursuits with Generalized Bit Planes (P
// SPTs per step on the P largest residues, P = floor(sqrt(N))).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/sopot.hpp"

namespace sopot {

struct QuantizerBudget {
  std::size_t max_spts = 1; // M_max, total over the vector
  int max_depth = default_depth_limit; // B_max, deepest plane an SPT may use

  void validate() const {
    if (max_spts < 1) throw invalid_input("SPT budget must be at least 1");
    if (max_depth < 0) throw invalid_input("maximum depth must be non-negative");
  }
};

struct PursuitStep {
  std::size_t iteration = 0;
  std::vector<std::size_t> positions;
  std::vector<int> signs;
  int depth = 0;
  double residue_inf_norm = 0.0; // after the update
};

struct PursuitTrace {
  std::vector<PursuitStep> iterations;
};

struct PursuitResult {
  SopotApprox approx;
  PursuitTrace trace;
};

// Depth k of the power of two nearest to magnitude / P on the 3/4 midpoint
// grid: (3/4) 2^-k <= magnitude / P < (3/4) 2^-(k-1). Boundaries are decided
// exactly (all compared quantities are dyadic scalings of the inputs).
inline int nearest_pow2_depth(double magnitude, std::size_t p = 1) {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude))
    throw invalid_input("nearest_pow2_depth needs a finite positive magnitude");
  if (p == 0) throw invalid_input("codeword weight must be positive");
  const double lhs = std::ldexp(magnitude, 2); // 4 * magnitude
  const double three_p = 3.0 * static_cast<double>(p);
  int k = static_cast<int>(std::ceil(-std::log2(lhs / three_p)));
  while (lhs < std::ldexp(three_p, -k)) ++k;
  while (lhs >= std::ldexp(three_p, -k + 1)) --k;
  return k;
}

namespace detail {

inline void check_greedy_input(std::span<const double> v) {
  if (v.empty()) throw invalid_input("cannot approximate an empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) throw invalid_input("non-finite value in input vector");
    if (std::abs(x) > 1.0) throw invalid_input("greedy approximation requires max|v| <= 1; rescale with unit_inf_scale first");
  }
}

inline double inf_norm(std::span<const double> r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

} // namespace detail

// Signed Digit Loading.
//
// Each step takes the first position of the largest |residue|, allocates
// sign(r) * 2^-k with k = nearest_pow2_depth(|r|) and subtracts it. Stops at
// the SPT budget, on the first depth deeper than max_depth, or on an exactly
// zero residue.
inline PursuitResult sdl_approximate(std::span<const double> v, const QuantizerBudget& budget) {
  budget.validate();
  detail::check_greedy_input(v);

  std::vector<double> residue(v.begin(), v.end());
  std::vector<SptTerm> terms;
  PursuitTrace trace;

  for (std::size_t i = 0; terms.size() < budget.max_spts; ++i) {
    const auto it = std::max_element(residue.begin(), residue.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    const auto p = static_cast<std::size_t>(it - residue.begin());
    const double r = residue[p];
    if (r == 0.0) break;

    const int sign = r > 0.0 ? 1 : -1;
    const int k = nearest_pow2_depth(std::abs(r));
    if (k > budget.max_depth) break;

    residue[p] = r - std::ldexp(static_cast<double>(sign), -k);
    terms.push_back({p, k, sign});
    trace.iterations.push_back({i, {p}, {sign}, k, detail::inf_norm(residue)});
  }

  return {SopotApprox(v.size(), budget.max_depth, std::move(terms)), std::move(trace)};
}

inline std::size_t mpgbp_codeword_weight(std::size_t n) noexcept {
  std::size_t p = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (p * p > n) --p;
  while ((p + 1) * (p + 1) <= n) ++p;
  return std::max<std::size_t>(p, 1);
}

// Matching Pursuits with Generalized Bit Planes.
//
// The codeword holds the signs of the P largest |residue| entries (ties broken
// by lower index); entries whose residue is exactly zero are left out, and the
// depth rule divides by the number of entries actually used. The residue is
// updated by the new codeword only: r <- r - 2^-k c. Iterates while the raw
// SPT count is below the budget, so the final count is ceil(M_max / P) * P
// when depth is not binding. Raw terms may repeat a (position, depth) cell.
inline PursuitResult mpgbp_approximate(std::span<const double> v, const QuantizerBudget& budget) {
  budget.validate();
  detail::check_greedy_input(v);

  const std::size_t n = v.size();
  const std::size_t p_max = mpgbp_codeword_weight(n);
  std::vector<double> residue(v.begin(), v.end());
  std::vector<std::size_t> order(n);
  std::vector<SptTerm> terms;
  PursuitTrace trace;

  for (std::size_t i = 0; terms.size() < budget.max_spts; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p_max), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double ra = std::abs(residue[a]), rb = std::abs(residue[b]);
                        return ra != rb ? ra > rb : a < b;
                      });

    PursuitStep step;
    step.iteration = i;
    double magnitude = 0.0;
    for (std::size_t j = 0; j < p_max; ++j) {
      const std::size_t pos = order[j];
      if (residue[pos] == 0.0) continue;
      step.positions.push_back(pos);
      step.signs.push_back(residue[pos] > 0.0 ? 1 : -1);
      magnitude += std::abs(residue[pos]);
    }
    if (step.positions.empty()) break;

    const int k = nearest_pow2_depth(magnitude, step.positions.size());
    // k < 0 would need a residue entry above 1.5; the energy decrease makes
    // that unreachable for max|v| <= 1 in practice, but it is not representable.
    if (k > budget.max_depth || k < 0) break;

    const double step_size = std::ldexp(1.0, -k);
    for (std::size_t j = 0; j < step.positions.size(); ++j) {
      residue[step.positions[j]] -= step.signs[j] * step_size;
      terms.push_back({step.positions[j], k, step.signs[j]});
    }
    step.depth = k;
    step.residue_inf_norm = detail::inf_norm(residue);
    trace.iterations.push_back(std::move(step));
  }

  return {SopotApprox(n, budget.max_depth, std::move(terms)), std::move(trace)};
}

} // namespace sopot
