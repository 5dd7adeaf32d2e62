// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace sopot {

// splitmix64 finalizer; derives independent stream seeds from counters.
inline std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(master ^ mix_seed(a)) ^ b) ^ c);
}

// Noise for an Eb/N0 defined per information bit at the QAM level.
//
// A QAM symbol of energy `symbol_energy` (the transmit filter energy for a
// unit-energy constellation) carries `bits_per_symbol` bits, so the complex
// noise variance per sample is E_s / (bps * Eb/N0). After the receiver
// divides by the filter energy, the QAM-domain noise is 1 / (bps * Eb/N0).
struct NoiseSpec {
  double ebn0_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  unsigned bits_per_symbol = 2;
  double symbol_energy = 1.0;

  double variance() const {
    if (std::isinf(ebn0_db) && ebn0_db > 0) return 0.0;
    return symbol_energy / (bits_per_symbol * std::pow(10.0, ebn0_db / 10.0));
  }
};

// Adds circularly symmetric complex Gaussian noise with E|w|^2 = variance.
inline void awgn_apply(std::span<std::complex<double>> signal, double variance, std::uint64_t seed) {
  if (!(variance > 0.0)) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  for (auto& x : signal) {
    const double re = normal(rng);
    const double im = normal(rng);
    x += std::complex<double>(re, im);
  }
}

inline void awgn_apply(std::span<std::complex<double>> signal, const NoiseSpec& noise) {
  awgn_apply(signal, noise.variance(), noise.seed);
}

} // namespace sopot
