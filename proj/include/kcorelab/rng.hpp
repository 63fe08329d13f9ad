#pragma once

#include <cmath>
#include <cstdint>

namespace kcl {

// Counter-based splittable RNG. Every draw is a pure function of
// (key, stream, counter), so independent streams can be consumed in any
// order by any number of workers with identical results.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_at(std::uint64_t key, std::uint64_t stream,
                             std::uint64_t counter) {
  return mix64(key ^ mix64(stream ^ mix64(counter)));
}

// Uniform in (0,1); never returns 0 so log() is safe.
inline double u64_to_unit(std::uint64_t x) {
  double u = static_cast<double>(x >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t stream)
      : key_(key), stream_(stream) {}

  std::uint64_t next_u64() { return hash_at(key_, stream_, counter_++); }
  double next_unit() { return u64_to_unit(next_u64()); }

  // Exact Poisson sampling, seed-deterministic across platforms:
  // inversion by sequential search for small means, additive splitting
  // (Poi(m) = Poi(m/2) + Poi(m/2)) above.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    long half = poisson(mean * 0.5);
    return half + poisson(mean * 0.5);
  }

 private:
  long poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = next_unit();
    long n = 0;
    while (u > cdf && n < 10000) {
      ++n;
      p *= mean / static_cast<double>(n);
      cdf += p;
    }
    return n;
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace kcl
