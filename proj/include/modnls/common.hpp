#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace modnls {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Integer lattice point in Z^2.
struct Vec2 {
  long x = 0;
  long y = 0;

  constexpr long norm2() const { return x * x + y * y; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(long s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
  friend constexpr auto operator<=>(Vec2, Vec2) = default;
};

/// Japanese bracket <k> = (1 + |k|^2)^{1/2}.
inline double japanese(Vec2 k) { return std::sqrt(1.0 + static_cast<double>(k.norm2())); }

// splitmix64 finalizer; used to derive independent per-trial seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed domains keep data streams and path streams disjoint.
enum class SeedDomain : std::uint64_t { path = 0x50415448, data = 0x44415441, misc = 0x4d495343 };

inline constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                                           std::uint64_t index) {
  return mix64(mix64(master ^ static_cast<std::uint64_t>(domain)) + mix64(index));
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be written
/// to per-index slots by the caller so that the outcome does not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned count = std::min<unsigned>(workers, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(count);
  pool.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += count) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace modnls

template <>
struct std::hash<modnls::Vec2> {
  std::size_t operator()(modnls::Vec2 v) const noexcept {
    return static_cast<std::size_t>(
        modnls::mix64(static_cast<std::uint64_t>(v.x) * 0x1f1f1f1fULL ^ static_cast<std::uint64_t>(v.y)));
  }
};
