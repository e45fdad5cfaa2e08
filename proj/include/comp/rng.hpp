#pragma once

#include <bit>
#include <cstdint>
#include <span>

namespace comp::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a parent seed and a label
/// (user index, curve index, ...).
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t label) noexcept {
  return mix64(mix64(seed) ^ mix64(label + kGolden));
}

/// Counter-based draw: the value at position `counter` of stream `key`.
/// Any worker can compute any position, so results never depend on how
/// work is split.
constexpr std::uint64_t at(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGolden);
}

/// Maps 64 random bits to the open interval (0, 1).
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Order-sensitive hash of a sequence of doubles (bit patterns).
inline std::uint64_t hash_values(std::uint64_t h, std::span<const double> values) noexcept {
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v)) + kGolden;
  return h;
}

}  // namespace comp::rng
