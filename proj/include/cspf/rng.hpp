#pragma once

#include <cstdint>

namespace cspf::rng {

// Small deterministic generator; identical streams on every platform.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// Combines seed material into a derived stream seed.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  SplitMix64 s(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return s.next();
}

inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g.next() >> 11) * 0x1.0p-53;
}

inline double uniform(SplitMix64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Unbiased index in [0, n) via 128-bit multiply.
inline std::size_t index(SplitMix64& g, std::size_t n) {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(g.next()) * n) >> 64);
}

// Standard normal via Box-Muller; one draw per call.
double normal(SplitMix64& g);

}  // namespace cspf::rng
