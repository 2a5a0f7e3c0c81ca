#pragma once

// Exact ground states: exhaustive enumeration for small instances and a
// column-transfer dynamic program over Chimera cell columns.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sglab/chimera.hpp"

namespace sglab::exact {

using chimera::Instance;
using chimera::SpinConfig;

struct ExactResult {
  Energy e0;
  /// Number of ground states; nullopt when not computed.
  std::optional<std::uint64_t> degeneracy;
  /// True when the count hit 2^64 - 1 and stopped growing.
  bool degeneracy_saturated = false;
  SpinConfig witness;
};

enum class BruteForceMethod {
  automatic,  // full for N <= 24, bipartite otherwise
  full,       // Gray-code walk over all 2^N configurations (2^(N-1) when h = 0)
  bipartite,  // enumerate the smaller bipartition class; the other class is
              // conditionally independent and minimized spin by spin
};

/// Throws sglab::Error when N > 32 (or N > 30 for the full walk).
ExactResult brute_force(const Instance& instance, BruteForceMethod method = BruteForceMethod::automatic);

struct ColumnDpOptions {
  /// Largest interface (rows * k bits) accepted.
  unsigned max_state_bits = 32;
  bool count_degeneracy = true;
};

/// Sweeps cell columns left to right. The state is the half-1 (horizontally
/// coupled) spins of the current column; dead vertices are pinned out of
/// the state space. Throws sglab::Error when rows * k exceeds the limit.
ExactResult column_dp(const Instance& instance, const ColumnDpOptions& options = {});

enum class StateLabel { ground, excited, other };

/// GS when E = E0, ES when E = E0 + 2. ES labeling applies only to +-1,
/// h = 0 instances; otherwise such states are "other".
std::vector<StateLabel> excitation_gap_states(const Instance& instance, std::span<const SpinConfig> configs,
                                              Energy e0);
std::string_view label_name(StateLabel label);

/// `id E0 degeneracy` rows with a header. Missing degeneracy prints "-";
/// a saturated count prints ">=18446744073709551615".
std::string serialize_results(std::span<const std::pair<std::string, ExactResult>> results);

}  // namespace sglab::exact
