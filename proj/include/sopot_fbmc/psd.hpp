// SPDX-License-Identifier: Apache-2.0
#pragma once

// Welch power spectral density estimate with a periodic Hann window.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/fft.hpp"

namespace sopot {

struct PsdEstimate {
  std::vector<double> frequencies; // cycles/sample, ascending over [-1/2, 1/2)
  std::vector<double> power;       // linear, per bin; mean over bins = signal power
  std::vector<double> psd_db;      // 10 log10(power)
};

// Accumulates Welch periodograms over any number of signals (frames).
class WelchAccumulator {
public:
  explicit WelchAccumulator(std::size_t segment_length = 512, double overlap_fraction = 0.5)
      : segment_(segment_length), window_(segment_length), sum_(segment_length, 0.0) {
    if (segment_length < 2) throw invalid_input("segment length must be >= 2");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) throw invalid_input("overlap fraction must lie in [0, 1)");
    hop_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(segment_length * (1.0 - overlap_fraction))));
    for (std::size_t i = 0; i < segment_; ++i) {
      window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment_));
      window_power_ += window_[i] * window_[i];
    }
  }

  void add(std::span<const std::complex<double>> x) {
    if (x.size() < segment_) throw invalid_input("signal shorter than the Welch segment");
    std::vector<std::complex<double>> buf(segment_);
    for (std::size_t start = 0; start + segment_ <= x.size(); start += hop_) {
      for (std::size_t i = 0; i < segment_; ++i) buf[i] = x[start + i] * window_[i];
      detail::fft_forward(buf);
      for (std::size_t i = 0; i < segment_; ++i) sum_[i] += std::norm(buf[i]) / window_power_;
      ++segments_;
    }
  }

  // Merge another accumulator built with the same parameters.
  void merge(const WelchAccumulator& other) {
    for (std::size_t i = 0; i < segment_; ++i) sum_[i] += other.sum_[i];
    segments_ += other.segments_;
  }

  std::size_t segments() const noexcept { return segments_; }

  PsdEstimate estimate() const {
    if (segments_ == 0) throw invalid_input("no segments accumulated");
    PsdEstimate out;
    const std::size_t half = segment_ / 2;
    for (std::size_t j = 0; j < segment_; ++j) {
      const std::size_t bin = (j + segment_ - half) % segment_; // fftshift
      out.frequencies.push_back((static_cast<double>(j) - static_cast<double>(half)) / static_cast<double>(segment_));
      const double p = sum_[bin] / static_cast<double>(segments_);
      out.power.push_back(p);
      out.psd_db.push_back(10.0 * std::log10(p));
    }
    return out;
  }

private:
  std::size_t segment_;
  std::size_t hop_ = 1;
  std::vector<double> window_;
  double window_power_ = 0.0;
  std::vector<double> sum_;
  std::size_t segments_ = 0;
};

inline PsdEstimate estimate_psd(std::span<const std::complex<double>> signal, std::size_t segment_length = 512,
                                double overlap_fraction = 0.5) {
  if (signal.size() <= segment_length) throw invalid_input("signal must be longer than the segment length");
  WelchAccumulator acc(segment_length, overlap_fraction);
  acc.add(signal);
  return acc.estimate();
}

} // namespace sopot
