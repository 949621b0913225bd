#pragma once

#include <cstdint>
#include <random>

namespace wvcal {

/// Independent RNG stream keyed by (seed, key, sub). Output depends only on
/// the three keys, never on scheduling.
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t key,
                                     std::uint64_t sub = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(key), hi(key), lo(sub), hi(sub)};
  return std::mt19937_64(seq);
}

}  // namespace wvcal
