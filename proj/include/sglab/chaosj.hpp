#pragma once

// Coupling-noise (J-chaos) laboratory: Gaussian perturbations, ground-state
// shifts, simulated programming cycles and success-probability percentiles.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sglab/engine.hpp"
#include "sglab/exact.hpp"

namespace sglab::chaosj {

using chimera::Instance;

struct PerturbationSpec {
  double delta_j = 0.05;  // standard deviation, units of J
  std::optional<std::pair<double, double>> clamp;
  std::uint64_t seed = 0;
  /// Optional systematic term added to the coupling of edge (u, v), in
  /// active-index space. Unset means i.i.d. noise only.
  std::function<double(std::uint32_t u, std::uint32_t v)> bias;

  void validate() const;
};

/// J' = J + R with R ~ N(0, delta_j) drawn per edge in edge order (rounded to
/// the fixed-point grid). Fields are untouched.
Instance perturb(const Instance& instance, const PerturbationSpec& spec);

using ExactSolver = std::function<exact::ExactResult(const Instance&)>;
/// Brute force up to 32 spins, column DP beyond.
exact::ExactResult default_solver(const Instance& instance);

struct GsShift {
  std::vector<double> abs_q;  // |q| between original and perturbed witnesses
  /// Fraction of trials whose perturbed ground state is not a ground state
  /// of the original instance.
  double changed_fraction = 0;
  std::size_t changed = 0;
};

/// Trial t uses seed derive_seed(spec.seed, perturb, t).
GsShift gs_shift(const Instance& instance, const PerturbationSpec& spec, std::size_t trials,
                 const ExactSolver& solver = default_solver);

struct CycleResult {
  std::string instance_id;
  std::uint64_t cycle = 0;
  std::uint64_t gauge_seed = 0;
  std::uint64_t perturb_seed = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  double p() const { return x == 0 ? 0.0 : static_cast<double>(y) / static_cast<double>(x); }
};

struct CycleConfig {
  std::size_t cycles = 10;
  std::uint64_t attempts = 10;               // X per cycle
  engine::HeuristicConfig budget;            // one attempt = one bounded solve
  std::uint64_t seed = 0;                    // master seed
};

/// Per cycle: random gauge, perturb the gauged instance, X bounded solves;
/// a hit is an attempt whose best configuration, mapped back through the
/// gauge, has the original instance's ground energy e0.
std::vector<CycleResult> simulate_cycles(const Instance& instance, const PerturbationSpec& spec, Energy e0,
                                         const engine::TemperatureLadder& ladder, const CycleConfig& config);

/// Type-7 quantile of p. Throws sglab::Error with fewer than min_count values.
double percentile(std::span<const double> p, double q, std::size_t min_count = 10);
/// I_0.8 / I_0.9; nullopt when I_0.9 = 0.
std::optional<double> ratio_89(double i80, double i90);
std::optional<double> ratio_89(std::span<const double> p, std::size_t min_count = 10);

/// `instance_id cycle gauge_seed perturb_seed X Y p`
std::string serialize_cycles(std::span<const CycleResult> cycles);
std::vector<CycleResult> parse_cycles(std::string_view text);
/// `id n_cycles I50 I80 I90 R89` (R89 "undefined" when I90 = 0).
std::string percentile_report(std::span<const CycleResult> cycles);

}  // namespace sglab::chaosj
