#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace lavlab {

// Integer power by repeated squaring. Exact for the polynomial exponents
// used throughout the catalog; avoids std::pow in hot sweeps.
inline double ipow(double base, int exp) {
  if (exp < 0) return 1.0 / ipow(base, -exp);
  double acc = 1.0;
  double b = base;
  while (exp > 0) {
    if (exp & 1) acc *= b;
    b *= b;
    exp >>= 1;
  }
  return acc;
}

// pow with fast paths for integer and half-integer exponents.
inline double fpow(double base, double exp) {
  double ri = std::nearbyint(exp);
  if (ri == exp && std::fabs(exp) <= 64.0) return ipow(base, static_cast<int>(ri));
  double rh = std::nearbyint(2.0 * exp);
  if (rh == 2.0 * exp && base >= 0.0 && std::fabs(exp) <= 64.0)
    return ipow(std::sqrt(base), static_cast<int>(rh));
  return std::pow(base, exp);
}

// Low-discrepancy points on [0,1) via the golden-ratio sequence.
// Deterministic, stratifies well for small counts.
inline double golden_point(std::size_t index) {
  constexpr double phi_frac = 0.6180339887498949;
  double v = 0.5 + phi_frac * static_cast<double>(index + 1);
  return v - std::floor(v);
}

// Deterministic seed mix for independent substreams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (stream + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n). With threads > 1 the index space is split into
// contiguous blocks; results must be written to disjoint slots so that the
// outcome is identical to the serial order.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace lavlab
