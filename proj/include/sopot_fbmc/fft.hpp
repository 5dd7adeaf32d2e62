// SPDX-License-Identifier: Apache-2.0
#pragma once

// Thin FFTW wrapper. Plans are created once per (size, direction) under a
// lock; execution uses the new-array interface, which is thread safe.

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace sopot::detail {

class FftPlanCache {
public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan plan(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

// X[k] = sum_m x[m] exp(-j 2 pi k m / n), in place, unnormalized.
inline void fft_forward(std::span<std::complex<double>> x) {
  if (x.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(FftPlanCache::instance().plan(x.size(), FFTW_FORWARD), buf, buf);
}

// x[m] = sum_k X[k] exp(+j 2 pi k m / n), in place, unnormalized.
inline void fft_backward(std::span<std::complex<double>> x) {
  if (x.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(FftPlanCache::instance().plan(x.size(), FFTW_BACKWARD), buf, buf);
}

} // namespace sopot::detail
