#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pfl {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent child seed for a named stream; stable across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return mix64(base ^ mix64(fnv1a(tag)));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v;
  do v = u(rng);
  while (v <= 0.0);
  return v;
}

}  // namespace pfl
