// SPDX-License-Identifier: Apache-2.0
#pragma once

// OQAM-FBMC transceiver chain.
//
// Notation: M subcarriers, overlap factor K_ov, prototype length L = K_ov * M,
// PAM instants spaced M/2 samples apart. Subcarrier k at PAM instant n uses
//
//     g_{k,n}[m] = g[m - n M/2] exp(j 2 pi k m / M) exp(j phi_{k,n}),
//     phi_{k,n}  = (pi/2)(k + n) - pi k n.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/fft.hpp"
#include "sopot_fbmc/grid.hpp"

namespace sopot::fbmc {

using cplx = std::complex<double>;
using QamGrid = Grid<cplx>;      // M x N_blk
using PamGrid = Grid<double>;    // M x 2 N_blk
using FbmcSignal = std::vector<cplx>;

struct FbmcConfig {
  std::size_t subcarriers = 128;
  std::size_t overlap = 4;
  std::size_t blocks = 64;
  std::vector<bool> active_mask; // empty means every subcarrier is active

  void validate() const {
    if (subcarriers < 2 || subcarriers % 2 != 0) throw invalid_input("subcarrier count must be even and >= 2");
    if (overlap < 1) throw invalid_input("overlap factor must be >= 1");
    if (blocks < 1) throw invalid_input("block count must be >= 1");
    if (!active_mask.empty() && active_mask.size() != subcarriers)
      throw invalid_input("active mask length differs from subcarrier count");
  }

  std::size_t filter_length() const noexcept { return overlap * subcarriers; }
  std::size_t pam_instants() const noexcept { return 2 * blocks; }
  std::size_t signal_length() const noexcept { return filter_length() + (pam_instants() - 1) * subcarriers / 2; }
  bool is_active(std::size_t k) const { return active_mask.empty() || active_mask[k]; }

  std::size_t active_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < subcarriers; ++k) n += is_active(k) ? 1 : 0;
    return n;
  }
};

// The `count` subcarriers closest to DC (k and k - M treated as the same
// baseband frequency), i.e. the band centred in a [-1/2, 1/2) spectrum plot.
inline std::vector<bool> central_mask(std::size_t subcarriers, std::size_t count) {
  if (count > subcarriers) throw invalid_input("more active subcarriers than subcarriers");
  std::vector<bool> mask(subcarriers, false);
  const std::size_t half = subcarriers / 2;
  for (std::size_t k = 0; k < subcarriers; ++k) {
    const std::size_t centred = (k + half) % subcarriers; // 0 <-> frequency -1/2
    mask[k] = centred >= half - count / 2 && centred < half - count / 2 + count;
  }
  return mask;
}

class PrototypeFilter {
public:
  PrototypeFilter() = default;
  PrototypeFilter(std::vector<double> coefficients, std::size_t subcarriers, std::size_t overlap)
      : coefficients_(std::move(coefficients)), subcarriers_(subcarriers), overlap_(overlap) {
    if (subcarriers_ < 2 || subcarriers_ % 2 != 0) throw invalid_input("subcarrier count must be even and >= 2");
    if (overlap_ < 1) throw invalid_input("overlap factor must be >= 1");
    if (coefficients_.size() != subcarriers_ * overlap_)
      throw invalid_input("filter length " + std::to_string(coefficients_.size()) + " differs from overlap * subcarriers = " +
                          std::to_string(subcarriers_ * overlap_));
    for (double c : coefficients_) {
      if (!std::isfinite(c)) throw invalid_input("non-finite filter coefficient");
      energy_ += c * c;
    }
    if (!(energy_ > 0.0)) throw invalid_input("filter has zero energy");
  }

  std::span<const double> coefficients() const noexcept { return coefficients_; }
  std::size_t length() const noexcept { return coefficients_.size(); }
  std::size_t subcarriers() const noexcept { return subcarriers_; }
  std::size_t overlap() const noexcept { return overlap_; }
  double energy() const noexcept { return energy_; }
  double operator[](std::size_t m) const { return coefficients_[m]; }

  FbmcConfig config(std::size_t blocks) const { return {subcarriers_, overlap_, blocks, {}}; }

private:
  std::vector<double> coefficients_;
  std::size_t subcarriers_ = 0;
  std::size_t overlap_ = 0;
  double energy_ = 0.0;
};

// PHYDYAS frequency-sampling coefficients for K_ov = 4.
inline constexpr double phydyas_h1 = 0.971960;
inline constexpr double phydyas_h2 = 0.70710678118654752440; // sqrt(2)/2
inline constexpr double phydyas_h3 = 0.235147;

// g[m] = 1 + 2 sum_q (-1)^q H_q cos(2 pi q m / L), m = 0..L-1, scaled to unit
// energy. g[0] is the (near-zero) sample shared by both ends, so g[m] = g[L-m].
inline PrototypeFilter phydyas_prototype(std::size_t subcarriers, std::size_t overlap = 4) {
  if (overlap != 4) throw unsupported_config("PHYDYAS prototype is only defined here for overlap 4");
  if (subcarriers < 2 || subcarriers % 2 != 0) throw invalid_input("subcarrier count must be even and >= 2");
  const std::size_t len = subcarriers * overlap;
  const double h[] = {1.0, phydyas_h1, phydyas_h2, phydyas_h3};
  std::vector<double> g(len);
  double energy = 0.0;
  for (std::size_t m = 0; m < len; ++m) {
    double acc = h[0];
    for (std::size_t q = 1; q < overlap; ++q) {
      const double sign = (q % 2 == 0) ? 1.0 : -1.0;
      acc += 2.0 * sign * h[q] * std::cos(2.0 * std::numbers::pi * static_cast<double>(q * m) / static_cast<double>(len));
    }
    g[m] = acc;
    energy += acc * acc;
  }
  const double norm = std::sqrt(energy);
  for (double& x : g) x /= norm;
  return PrototypeFilter(std::move(g), subcarriers, overlap);
}

// exp(j phi_{k,n}); phi is always a multiple of pi/2, so this is exact.
inline cplx oqam_phase(std::int64_t k, std::int64_t n) {
  const std::int64_t quarter_turns = (((k + n - 2 * k * n) % 4) + 4) % 4;
  switch (quarter_turns) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Real part on the even PAM instant, imaginary part on the odd one.
inline PamGrid oqam_map(const QamGrid& qam) {
  PamGrid pam(qam.rows(), 2 * qam.cols());
  for (std::size_t k = 0; k < qam.rows(); ++k)
    for (std::size_t n = 0; n < qam.cols(); ++n) {
      pam(k, 2 * n) = qam(k, n).real();
      pam(k, 2 * n + 1) = qam(k, n).imag();
    }
  return pam;
}

inline QamGrid oqam_demap(const PamGrid& pam) {
  if (pam.cols() % 2 != 0) throw invalid_input("PAM grid needs an even number of instants");
  QamGrid qam(pam.rows(), pam.cols() / 2);
  for (std::size_t k = 0; k < qam.rows(); ++k)
    for (std::size_t n = 0; n < qam.cols(); ++n) qam(k, n) = {pam(k, 2 * n), pam(k, 2 * n + 1)};
  return qam;
}

namespace detail {

inline void check_pam_against_filter(const PamGrid& pam, const PrototypeFilter& filter) {
  if (pam.rows() != filter.subcarriers())
    throw invalid_input("PAM grid has " + std::to_string(pam.rows()) + " subcarriers, filter expects " +
                        std::to_string(filter.subcarriers()));
  if (pam.cols() == 0) throw invalid_input("PAM grid has no time instants");
}

inline std::size_t signal_length(const PrototypeFilter& filter, std::size_t pam_instants) {
  return filter.length() + (pam_instants - 1) * filter.subcarriers() / 2;
}

inline std::size_t pam_instants_for(const FbmcSignal& signal, const PrototypeFilter& filter) {
  const std::size_t half = filter.subcarriers() / 2;
  if (signal.size() < filter.length() || (signal.size() - filter.length()) % half != 0)
    throw invalid_input("signal length " + std::to_string(signal.size()) + " is not L + n M/2 for this filter");
  return (signal.size() - filter.length()) / half + 1;
}

} // namespace detail

// Direct evaluation of s[m] = sum_k sum_n a_{k,n} g_{k,n}[m]. O(M * 2N * L).
inline FbmcSignal synthesize_direct(const PamGrid& pam, const PrototypeFilter& filter) {
  detail::check_pam_against_filter(pam, filter);
  const std::size_t M = filter.subcarriers();
  const std::size_t L = filter.length();
  FbmcSignal s(detail::signal_length(filter, pam.cols()), cplx{});
  for (std::size_t n = 0; n < pam.cols(); ++n) {
    const std::size_t start = n * M / 2;
    for (std::size_t k = 0; k < M; ++k) {
      const double a = pam(k, n);
      if (a == 0.0) continue;
      const cplx coeff = a * oqam_phase(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n));
      for (std::size_t mm = 0; mm < L; ++mm) {
        const std::size_t m = start + mm;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * m) % M) / static_cast<double>(M);
        s[m] += coeff * filter[mm] * std::polar(1.0, angle);
      }
    }
  }
  return s;
}

// IFFT + polyphase network. For each PAM instant the subcarrier sum is
// M-periodic in m, so one length-M IFFT per instant feeds an L-tap weighting.
inline FbmcSignal synthesize(const PamGrid& pam, const PrototypeFilter& filter) {
  detail::check_pam_against_filter(pam, filter);
  const std::size_t M = filter.subcarriers();
  const std::size_t L = filter.length();
  FbmcSignal s(detail::signal_length(filter, pam.cols()), cplx{});
  std::vector<cplx> x(M);
  for (std::size_t n = 0; n < pam.cols(); ++n) {
    bool any = false;
    for (std::size_t k = 0; k < M; ++k) {
      x[k] = pam(k, n) * oqam_phase(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n));
      any = any || pam(k, n) != 0.0;
    }
    if (!any) continue;
    sopot::detail::fft_backward(x);
    const std::size_t start = n * M / 2;
    for (std::size_t mm = 0; mm < L; ++mm) s[start + mm] += filter[mm] * x[(start + mm) % M];
  }
  return s;
}

// r_{k,n} = <s, g_{k,n}> = sum_m s[m] conj(g_{k,n}[m]); adjoint of synthesize.
inline Grid<cplx> analyze_complex(const FbmcSignal& signal, const PrototypeFilter& filter) {
  const std::size_t instants = detail::pam_instants_for(signal, filter);
  const std::size_t M = filter.subcarriers();
  const std::size_t L = filter.length();
  Grid<cplx> out(M, instants);
  std::vector<cplx> z(M);
  for (std::size_t n = 0; n < instants; ++n) {
    std::fill(z.begin(), z.end(), cplx{});
    const std::size_t start = n * M / 2;
    for (std::size_t mm = 0; mm < L; ++mm) z[(start + mm) % M] += signal[start + mm] * filter[mm];
    sopot::detail::fft_forward(z);
    for (std::size_t k = 0; k < M; ++k)
      out(k, n) = z[k] * std::conj(oqam_phase(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n)));
  }
  return out;
}

// PAM estimates: Re{r_{k,n}} divided by the filter energy, so a filter that
// was quantized without re-normalization still gives unit gain.
inline PamGrid analyze(const FbmcSignal& signal, const PrototypeFilter& filter) {
  const auto r = analyze_complex(signal, filter);
  PamGrid out(r.rows(), r.cols());
  const double inv_energy = 1.0 / filter.energy();
  for (std::size_t i = 0; i < r.size(); ++i) out.data()[i] = r.data()[i].real() * inv_energy;
  return out;
}

// Residual interference power of the real-domain recovery,
//
//     sigma_I^2 = sum_{(k,n) != (0,0)} | Re{ <g_{0,0}, g_{k,n}> } / E |^2,
//
// with k over all M subcarriers and |n| <= 2 K_ov - 1 (the only shifts with
// overlapping support). E = g^T g; for a unit-energy filter this is the plain
// inner-product form.
inline double interference_variance(const PrototypeFilter& filter) {
  const std::size_t M = filter.subcarriers();
  const auto L = static_cast<std::int64_t>(filter.length());
  const auto half = static_cast<std::int64_t>(M / 2);
  const auto n_max = static_cast<std::int64_t>(2 * filter.overlap()) - 1;
  const double inv_energy = 1.0 / filter.energy();
  std::vector<cplx> z(M);
  double total = 0.0;
  for (std::int64_t n = -n_max; n <= n_max; ++n) {
    std::fill(z.begin(), z.end(), cplx{});
    const std::int64_t shift = n * half;
    const std::int64_t lo = std::max<std::int64_t>(0, shift);
    const std::int64_t hi = std::min<std::int64_t>(L, L + shift);
    for (std::int64_t m = lo; m < hi; ++m)
      z[static_cast<std::size_t>(m) % M] +=
          filter[static_cast<std::size_t>(m)] * filter[static_cast<std::size_t>(m - shift)];
    sopot::detail::fft_forward(z);
    for (std::size_t k = 0; k < M; ++k) {
      if (n == 0 && k == 0) continue;
      const double re = (z[k] * std::conj(oqam_phase(static_cast<std::int64_t>(k), n))).real() * inv_energy;
      total += re * re;
    }
  }
  return total;
}

} // namespace sopot::fbmc
