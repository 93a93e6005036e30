#pragma once

// Named seed streams: a base seed plus a stream name and index give an
// independent, reproducible 64-bit seed.

#include <cstdint>
#include <string_view>

namespace lobgen::util {

inline constexpr std::uint64_t fnv1a64(std::string_view s,
                                       std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                                           std::uint64_t index = 0) {
  std::uint64_t h = fnv1a64(stream);
  return splitmix64(base ^ splitmix64(h ^ splitmix64(index)));
}

}  // namespace lobgen::util
