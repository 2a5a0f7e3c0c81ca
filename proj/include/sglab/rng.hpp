#pragma once

#include <cstdint>
#include <random>

namespace sglab {

/// Every random stream in the library is a 64-bit Mersenne Twister
/// (period 2^19937 - 1, full 64-bit draws).
using Rng = std::mt19937_64;

/// Stream tags for seed derivation. Values are part of the reproducibility
/// contract: changing one changes every downstream result.
enum class StreamTag : std::uint64_t {
  instance = 0x01,
  flip = 0x02,
  swap = 0x03,
  init = 0x04,
  gauge = 0x05,
  perturb = 0x06,
  attempt = 0x07,
  pairs = 0x08,
  round = 0x09,
  cycle = 0x0a,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `tag`, item `index`, under a master seed:
///   splitmix64(splitmix64(master ^ splitmix64(tag)) + index)
/// Distinct (tag, index) pairs give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t index);

inline Rng make_rng(std::uint64_t master, StreamTag tag, std::uint64_t index) {
  return Rng(derive_seed(master, tag, index));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sglab
