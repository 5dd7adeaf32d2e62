// SPDX-License-Identifier: Apache-2.0
//
// Approximates the 512-tap PHYDYAS prototype with each method at roughly the
// density of a 4-bit CSD word and prints SPT counts, MSE and interference.

#include <cstdio>

#include "sopot_fbmc/sopot_fbmc.hpp"

int main() {
  using namespace sopot;
  const auto g = fbmc::phydyas_prototype(128, 4);
  std::printf("reference         sigma_I^2 %7.2f dB\n", sim::to_db(fbmc::interference_variance(g)));

  const auto csd = sim::approximate_filter(g, {sim::Method::csd, 4});
  const double density = csd.raw_spt_per_coeff();

  for (const auto method : {sim::Method::csd, sim::Method::sdl, sim::Method::mpgbp}) {
    const auto a = method == sim::Method::csd ? csd : sim::approximate_filter(g, {method, 0, density});
    std::printf("%-6s %5zu SPTs (%4zu merged)  MSE %7.2f dB  sigma_I^2 %7.2f dB\n", sim::to_string(method).c_str(), a.raw_spts,
                a.merged_spts, sim::approximation_mse(g.coefficients(), a.filter.coefficients()),
                sim::to_db(fbmc::interference_variance(a.filter)));
  }
}
