#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mssf {

using Rng = std::mt19937_64;

/// Seed for a named, indexed sub-stream of `root`. Independent of call order,
/// so replicate i always sees the same stream whatever the scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits, shifted by half an ulp so neither endpoint is reachable
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

}  // namespace mssf
