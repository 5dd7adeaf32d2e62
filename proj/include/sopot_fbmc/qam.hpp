// SPDX-License-Identifier: Apache-2.0
#pragma once

// Gray-mapped square QAM with unit average energy. The first half of each
// symbol's bits selects the in-phase level, the second half the quadrature.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sopot_fbmc/errors.hpp"

namespace sopot {

class QamConstellation {
public:
  explicit QamConstellation(unsigned order) : order_(order) {
    if (order != 4 && order != 16 && order != 64)
      throw invalid_input("unsupported QAM order " + std::to_string(order) + " (use 4, 16 or 64)");
    bits_per_axis_ = order == 4 ? 1 : order == 16 ? 2 : 3;
    levels_ = 1u << bits_per_axis_;
    // Mean energy of the odd-integer grid {+-1, +-3, ...} on both axes: 2 (L^2 - 1) / 3.
    scale_ = 1.0 / std::sqrt(2.0 * (static_cast<double>(levels_) * levels_ - 1.0) / 3.0);
  }

  unsigned order() const noexcept { return order_; }
  unsigned bits_per_symbol() const noexcept { return 2 * bits_per_axis_; }

  std::complex<double> map(std::span<const std::uint8_t> bits) const {
    return {level(bits.subspan(0, bits_per_axis_)), level(bits.subspan(bits_per_axis_, bits_per_axis_))};
  }

  // Nearest-neighbour hard decision.
  void demap(std::complex<double> symbol, std::span<std::uint8_t> bits) const {
    slice(symbol.real(), bits.subspan(0, bits_per_axis_));
    slice(symbol.imag(), bits.subspan(bits_per_axis_, bits_per_axis_));
  }

  double scale() const noexcept { return scale_; }

private:
  double level(std::span<const std::uint8_t> gray) const {
    unsigned g = 0;
    for (auto b : gray) g = (g << 1) | (b & 1u);
    unsigned idx = g; // Gray -> binary
    for (unsigned shift = g >> 1; shift != 0; shift >>= 1) idx ^= shift;
    return (2.0 * idx - (levels_ - 1.0)) * scale_;
  }

  void slice(double x, std::span<std::uint8_t> bits) const {
    const double pos = std::round((x / scale_ + (levels_ - 1.0)) / 2.0);
    const auto idx = static_cast<unsigned>(std::clamp(pos, 0.0, levels_ - 1.0));
    const unsigned g = idx ^ (idx >> 1);
    for (unsigned b = 0; b < bits_per_axis_; ++b) bits[b] = static_cast<std::uint8_t>((g >> (bits_per_axis_ - 1 - b)) & 1u);
  }

  unsigned order_;
  unsigned bits_per_axis_;
  unsigned levels_;
  double scale_;
};

inline std::vector<std::complex<double>> qam_modulate(std::span<const std::uint8_t> bits, unsigned order) {
  const QamConstellation q(order);
  const std::size_t bps = q.bits_per_symbol();
  if (bits.size() % bps != 0) throw invalid_input("bit count is not a multiple of bits per symbol");
  std::vector<std::complex<double>> out(bits.size() / bps);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.map(bits.subspan(i * bps, bps));
  return out;
}

inline std::vector<std::uint8_t> qam_demodulate(std::span<const std::complex<double>> symbols, unsigned order) {
  const QamConstellation q(order);
  const std::size_t bps = q.bits_per_symbol();
  std::vector<std::uint8_t> out(symbols.size() * bps);
  for (std::size_t i = 0; i < symbols.size(); ++i) q.demap(symbols[i], std::span(out).subspan(i * bps, bps));
  return out;
}

} // namespace sopot
