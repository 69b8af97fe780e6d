#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace srde::rng {

// SplitMix64 finalizer: full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based addressing: the value at (key, a, b) never depends on how many
// draws happened before it, so paired runs consume identical noise.
constexpr std::uint64_t hash_at(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t h = mix64(key ^ 0x243f6a8885a308d3ull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return h;
}

constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) noexcept {
  return hash_at(mix64(master), cell, trial);
}

// uniform in (0,1]: 53-bit mantissa shifted away from zero so log() stays finite
inline double to_unit(std::uint64_t h) noexcept {
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  return to_unit(hash_at(key, a, b));
}

// standard normal at counter (key, a, b), Box-Muller cosine branch
inline double normal(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  const double u1 = to_unit(hash_at(key, a, 2 * b));
  const double u2 = to_unit(hash_at(key, a, 2 * b + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace srde::rng
