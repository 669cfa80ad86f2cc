#pragma once

// Thin FFTW wrapper. Plans are created once per (shape, direction) under a lock and
// executed with the new-array interface, which FFTW documents as thread-safe.

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "modnls/common.hpp"

namespace modnls::fft {

enum class Direction : int { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rows, int cols, Direction dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, static_cast<int>(dir));
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1 ? fftw_plan_dft_1d(cols, p, p, static_cast<int>(dir), flags)
                               : fftw_plan_dft_2d(rows, cols, p, p, static_cast<int>(dir), flags);
    if (!plan) throw std::runtime_error("fft: FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized in-place 1-D transform: X_k = sum_j x_j e^{-+2 pi i jk/n}.
inline void transform(std::vector<cplx>& data, Direction dir) {
  if (data.empty()) return;
  auto plan = detail::PlanCache::instance().get(1, static_cast<int>(data.size()), dir);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

/// Unnormalized in-place 2-D transform of a row-major rows x cols array.
inline void transform2d(std::vector<cplx>& data, int rows, int cols, Direction dir) {
  if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("transform2d: size mismatch");
  auto plan = detail::PlanCache::instance().get(rows, cols, dir);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

/// Smallest n >= lo whose only prime factors are 2, 3 and 5.
inline int good_size(int lo) {
  for (int n = std::max(lo, 1);; ++n) {
    int m = n;
    for (int p : {2, 3, 5})
      while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

}  // namespace modnls::fft
