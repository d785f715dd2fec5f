#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace gdn {

// splitmix64 finalizer; used for seed derivation and engine bootstrapping.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a list of salts.
// Streams keyed on distinct salt tuples never share draws, so parallel
// consumers stay reproducible regardless of scheduling.
template <class... Salts>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Salts... salts) {
  ((seed = splitmix64(seed ^ static_cast<std::uint64_t>(salts))), ...);
  return splitmix64(seed);
}

// Seeded generator with hand-rolled distributions. std::mt19937_64 has a
// standard-specified output sequence, and the distributions below avoid the
// implementation-defined ones in <random>, so every draw is reproducible
// across platforms and toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

  // Uniform integer on [lo, hi], unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct elements drawn uniformly from pool (partial Fisher-Yates).
  template <class T>
  std::vector<T> sample(const std::vector<T>& pool, std::size_t k) {
    if (k > pool.size())
      throw std::invalid_argument("sample: k exceeds pool size");
    std::vector<T> work = pool;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(static_cast<std::int64_t>(i),
                      static_cast<std::int64_t>(work.size()) - 1));
      std::swap(work[i], work[j]);
    }
    work.resize(k);
    return work;
  }

  template <class T>
  std::vector<T> sample_with_replacement(const std::vector<T>& pool,
                                         std::size_t k) {
    if (pool.empty())
      throw std::invalid_argument("sample_with_replacement: empty pool");
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      out.push_back(pool[static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gdn
