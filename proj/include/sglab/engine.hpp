#pragma once

// Metropolis + parallel tempering engine.
//
// Two paths share one contract:
//  * the scalar path keeps one int8 configuration per copy and moves
//    temperatures between copies;
//  * the packed path stores one bit per (spin, lane) in machine words, so a
//    word holds the same spin of up to 64 (or 256) independent instances
//    that sit at the same temperature slot. Configurations move between
//    slots on a swap; copy identities travel with them.
//
// Random streams (the splitting rule lives in rng.hpp):
//   flip stream   derive_seed(seed, flip, lane / lanes_per_word), one 64-bit
//                 draw per spin update, shared by every lane of a word;
//   swap stream   derive_seed(seed, swap, lane), one draw per attempted pair;
//   init stream   derive_seed(seed, init, lane), one draw per initial spin.
// With the same seeds the two paths produce bitwise identical runs.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sglab/chimera.hpp"
#include "sglab/trace.hpp"

namespace sglab::engine {

using chimera::Instance;
using chimera::SpinConfig;

class TemperatureLadder {
 public:
  /// Strictly increasing, positive, at most 255 entries.
  explicit TemperatureLadder(std::vector<double> temperatures);
  static TemperatureLadder evenly_spaced(double lo, double hi, std::size_t count);

  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }
  const std::vector<double>& temperatures() const { return t_; }

  friend bool operator==(const TemperatureLadder&, const TemperatureLadder&) = default;

 private:
  std::vector<double> t_;
};

/// 30 temperatures: 12 evenly spaced on [0.045, 0.2] followed by 18 evenly
/// spaced on [0.21, 1.632].
TemperatureLadder default_ladder();

/// Decision rule for a 64-bit uniform draw: accept iff `always` or
/// draw < threshold, where threshold = floor(p * 2^64).
struct Acceptance {
  bool always = false;
  std::uint64_t threshold = 0;
  bool accepts(std::uint64_t draw) const { return always || draw < threshold; }
};
/// min(1, exp(-delta_e / T)).
Acceptance metropolis_acceptance(double delta_e, double temperature);
/// min(1, exp(log_ratio)).
Acceptance exp_acceptance(double log_ratio);

struct LaneSeeds {
  std::uint64_t swap = 0;
  std::uint64_t init = 0;
};
LaneSeeds lane_seeds(std::uint64_t seed, std::uint64_t lane);
std::uint64_t flip_seed(std::uint64_t seed, std::uint64_t lane, std::uint32_t lanes_per_word);

/// Scalar replica set. Copy c belongs to replica c / n_temps and starts at
/// slot c % n_temps.
struct ReplicaSet {
  std::uint32_t replicas = 0;
  std::uint32_t n_temps = 0;
  std::vector<SpinConfig> configs;          // by copy
  std::vector<Energy> energies;             // by copy, maintained incrementally
  std::vector<std::uint32_t> temp_of_copy;  // 0-based slot of each copy
  std::vector<std::uint32_t> copy_at;       // [replica * n_temps + slot] -> copy

  std::size_t copy_count() const { return configs.size(); }
  /// True when temp_of_copy restricted to every replica is a permutation and
  /// copy_at is its inverse.
  bool is_consistent() const;

  friend bool operator==(const ReplicaSet&, const ReplicaSet&) = default;
};

/// i.i.d. uniform spins, drawn in (replica, slot, spin) order.
ReplicaSet init_replicas(const Instance& instance, std::uint32_t replicas, std::uint32_t n_temps, Rng& init);

/// Precomputed acceptance tables and adjacency for one (instance, ladder).
class ScalarEngine {
 public:
  ScalarEngine(const Instance& instance, const TemperatureLadder& ladder);

  /// One full-lattice sweep of every copy: copies are visited in
  /// (replica, slot) order; each copy updates bipartition class 0, then
  /// class 1, one flip-stream draw per spin.
  void sweep(ReplicaSet& set, Rng& flip) const;
  /// One swap round: adjacent slot pairs (k, k+1) with k % 2 == parity,
  /// one swap-stream draw per pair, replicas in order.
  void swap(ReplicaSet& set, Rng& swap, unsigned parity) const;

  const Instance& instance() const { return *instance_; }
  const TemperatureLadder& ladder() const { return *ladder_; }

  // Visitor form used by the heuristic solver: on_flip(copy, set) after each
  // accepted flip; returning true stops the sweep early.
  template <class OnFlip>
  bool sweep_visit(ReplicaSet& set, Rng& flip, OnFlip&& on_flip) const;

 private:
  Acceptance acceptance(std::uint32_t slot, std::int64_t delta_raw) const;

  const Instance* instance_;
  const TemperatureLadder* ladder_;
  std::vector<std::uint32_t> order_;  // class 0 indices, then class 1
  std::int64_t table_span_ = -1;      // |dE| range covered by table_, in units of J
  std::vector<Acceptance> table_;     // [slot * (2*span+1) + dE + span]
};

void metropolis_sweep(ReplicaSet& set, const Instance& instance, const TemperatureLadder& ladder, Rng& flip);
void pt_swap(ReplicaSet& set, const TemperatureLadder& ladder, Rng& swap, unsigned parity);

// ---------------------------------------------------------------------------
// Packed representation

struct Word256 {
  using V = std::uint64_t __attribute__((vector_size(32)));
  V v;
};

template <class W>
struct WordTraits;

template <>
struct WordTraits<std::uint64_t> {
  static constexpr unsigned kLanes = 64;
};
template <>
struct WordTraits<Word256> {
  static constexpr unsigned kLanes = 256;
};

template <class W>
struct PackedReplicaSet {
  std::uint32_t lanes = 0;
  std::uint32_t replicas = 0;
  std::uint32_t n_temps = 0;
  std::uint32_t n_spins = 0;
  /// [(replica * n_temps + slot) * n_spins + spin]; bit set <=> spin is -1.
  std::vector<W> spins;
  /// Per lane, [lane][replica][slot]: energy of the configuration at the slot.
  std::vector<Energy> energies;
  /// Per lane, [lane][replica][slot] -> copy id.
  std::vector<std::uint32_t> copy_at;
  /// Per lane, [lane][copy] -> slot.
  std::vector<std::uint32_t> temp_of_copy;
};

/// All lanes must share replicas/n_temps/spin count; at most
/// WordTraits<W>::kLanes lanes.
template <class W>
PackedReplicaSet<W> pack(std::span<const ReplicaSet> lanes);
template <class W>
std::vector<ReplicaSet> unpack(const PackedReplicaSet<W>& packed);

/// Multi-spin coded engine for lanes of +-J, h = 0 instances on one graph.
template <class W>
class PackedEngine {
 public:
  PackedEngine(std::span<const Instance> lanes, const TemperatureLadder& ladder);

  void sweep(PackedReplicaSet<W>& set, Rng& flip) const;
  /// Recomputes every lane's energy at every slot from the spins.
  void compute_energies(PackedReplicaSet<W>& set) const;
  /// swap_streams[lane] is that lane's swap stream.
  void swap(PackedReplicaSet<W>& set, std::span<Rng> swap_streams, unsigned parity) const;

  std::uint32_t lanes() const { return lanes_; }

 private:
  struct Site {
    std::uint32_t begin;  // into nbr_
    std::uint32_t degree;
  };
  std::uint32_t lanes_;
  std::uint32_t n_spins_;
  std::uint32_t n_edges_;
  const TemperatureLadder* ladder_;
  std::vector<std::uint32_t> order_;
  std::vector<Site> sites_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> nbr_;  // (neighbor, edge)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
  std::vector<W> jneg_;                    // per edge: lanes with J = -1
  W lane_mask_;
  std::uint32_t max_degree_;
  std::vector<Acceptance> table_;          // [(slot * (max_degree+1) + degree) * (max_degree+1) + n_pos]
};

// ---------------------------------------------------------------------------
// Runs

enum class EnginePath { automatic, scalar, packed };

struct RunConfig {
  std::uint64_t steps = 0;
  std::uint32_t sweeps_per_step = 10;
  std::uint32_t replicas = 4;
  /// Evenly spaced snapshot points when store_configs is set; steps must be
  /// divisible by checkpoints.
  std::uint32_t checkpoints = 0;
  bool store_configs = false;
  bool record_traces = true;
  bool record_energies = true;
  std::uint32_t trace_stride = 1;
  std::uint64_t seed = 0;
  /// Lanes per packed word: 1..64 use 64-bit words, 65..256 use 256-bit words.
  std::uint32_t lanes_per_word = 64;
  EnginePath path = EnginePath::automatic;

  void validate() const;
};

struct Snapshot {
  std::uint32_t checkpoint = 0;
  std::uint64_t step = 0;
  std::uint32_t replica = 0;
  std::uint32_t slot = 0;
  std::uint32_t copy = 0;
  Energy energy;
  SpinConfig config;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct RunOutput {
  std::string instance_id;
  std::uint64_t seed = 0;
  std::vector<double> ladder;
  std::uint32_t replicas = 0;
  std::uint64_t steps = 0;
  std::uint32_t sweeps_per_step = 0;
  std::uint32_t trace_stride = 1;
  /// One per copy (replicas * n_temps), empty when traces are not recorded.
  std::vector<WalkTrace> traces;
  /// [slot][sample]: energy at the slot averaged over replicas.
  std::vector<std::vector<double>> energy_series;
  std::vector<Snapshot> snapshots;
  /// Lowest energy seen at any copy, evaluated after each step's sweeps.
  Energy min_energy;
  SpinConfig min_config;
  ReplicaSet final_state;

  std::size_t samples() const { return traces.empty() ? 0 : traces.front().length(); }
  std::uint64_t sweeps_per_sample() const { return std::uint64_t{sweeps_per_step} * trace_stride; }

  friend bool operator==(const RunOutput&, const RunOutput&) = default;
};

/// Runs every instance. The packed path is used when all instances are +-J,
/// h = 0 on a common graph (or when forced); otherwise the scalar path.
std::vector<RunOutput> run(std::span<const Instance> instances, const TemperatureLadder& ladder,
                           const RunConfig& config);
RunOutput run(const Instance& instance, const TemperatureLadder& ladder, const RunConfig& config);

// ---------------------------------------------------------------------------
// Heuristic solver mode

struct HeuristicConfig {
  std::uint64_t max_steps = 1000;
  std::uint32_t sweeps_per_step = 10;
  std::uint32_t replicas = 1;
  std::uint64_t seed = 0;
};

inline constexpr Energy kInfiniteEnergy = Fixed::from_raw(std::numeric_limits<std::int64_t>::max());

/// Full-lattice sweeps elapsed when any copy first reaches energy <= target
/// (0 if an initial configuration already does), or nullopt after
/// max_steps elementary steps.
std::optional<std::uint64_t> run_heuristic(const Instance& instance, const TemperatureLadder& ladder,
                                           Energy target, const HeuristicConfig& config);

/// Lowest-energy configuration visited during a full budget.
struct BestFound {
  Energy energy;
  SpinConfig config;
  std::uint64_t sweeps_to_best = 0;
};
BestFound solve_best(const Instance& instance, const TemperatureLadder& ladder, const HeuristicConfig& config);

}  // namespace sglab::engine
