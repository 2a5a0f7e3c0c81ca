#pragma once

#include <cstdint>
#include <vector>

namespace sglab {

/// Temperature random walk of one PT copy: indices[t] is the 1-based ladder
/// index the copy occupied after recorded sample t.
struct WalkTrace {
  std::uint32_t copy = 0;
  std::uint32_t n_temps = 0;
  /// Full-lattice Metropolis sweeps between consecutive samples
  /// (sweeps_per_step * trace stride).
  std::uint64_t sweeps_per_sample = 1;
  std::vector<std::uint8_t> indices;

  std::size_t length() const { return indices.size(); }

  friend bool operator==(const WalkTrace&, const WalkTrace&) = default;
};

}  // namespace sglab
