#pragma once

// Thermal energy curves, zero-temperature extrapolation, temperature-chaos
// detection and spin-overlap distributions.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sglab/engine.hpp"
#include "sglab/exact.hpp"

namespace sglab::landscape {

using chimera::SpinConfig;

struct EnergyCurve {
  std::vector<double> temperatures;
  std::vector<double> values;  // <E>(T) - E0
  std::vector<double> errors;  // jackknife over blocks of samples
  double e0 = 0;
  double tau = 0;              // sweeps; 0 when unknown
  double run_sweeps = 0;
  std::size_t burn_in_samples = 0;
  std::size_t used_samples = 0;
  bool equilibrated = false;   // run_sweeps >= 10 tau
};

struct CurveOptions {
  double tau = 0;             // mixing time in sweeps
  double burn_in_taus = 3;    // samples with t <= burn_in_taus * tau are dropped
  std::size_t blocks = 20;    // jackknife blocks
  bool require_equilibrated = true;
};

/// series[slot][sample] holds energies recorded every sweeps_per_sample
/// sweeps (sample n at time (n + 1) * sweeps_per_sample). Throws
/// sglab::Error when fewer than two samples survive the burn-in, or when
/// require_equilibrated is set and the run is shorter than 10 tau.
EnergyCurve energy_curve(std::span<const double> temperatures, const std::vector<std::vector<double>>& series,
                         std::uint64_t sweeps_per_sample, double e0, const CurveOptions& options = {});
EnergyCurve energy_curve(const engine::RunOutput& run, Energy e0, const CurveOptions& options = {});

struct Extrapolation {
  double e_extrap = 0;  // total energy at T = 0
  double error = 0;     // e_extrap - E0
  std::size_t low = 0;  // ladder indices used
  std::size_t high = 0;
  double t_low = 0;
  double t_high = 0;
};

/// Straight line in x = exp(-delta / T) through the ladder points nearest
/// t_a and t_b, evaluated at x = 0.
Extrapolation extrapolate_zero_T(const EnergyCurve& curve, double delta = 2.0, double t_a = 0.2, double t_b = 0.3);

struct TcOptions {
  double error_multiple = 5;   // increment must exceed this many errors
  double median_multiple = 5;  // and this many local median increments
  double min_step = 1.0;       // and this absolute size
  std::size_t window = 3;      // neighbors on each side for the local median
};

/// Midpoint temperatures of increments <E>(T_{i+1}) - <E>(T_i) that pass all
/// thresholds. Empty when no temperature-chaos drop is found.
std::vector<double> detect_tc(const EnergyCurve& curve, const TcOptions& options = {});

/// q = 1 - 2 d / N with d the Hamming distance. Throws on size mismatch.
double overlap(const SpinConfig& a, const SpinConfig& b);

struct OverlapDistribution {
  std::string kind;  // "GS-GS" or "GS-ES"
  double bin_width = 0.02;
  std::vector<double> mass;  // probability per bin on [0, 1]
  std::size_t samples = 0;
  double median = 0;         // of the raw |q| samples
};

struct OverlapOptions {
  std::size_t pairs = 100000;
  double bin_width = 0.02;
  std::uint64_t seed = 0;
};

struct OverlapResult {
  bool sufficient = false;
  std::string reason;  // set when insufficient
  OverlapDistribution gs_gs;
  OverlapDistribution gs_es;
};

/// Distributions of |q| over GS-GS pairs (distinct snapshots) and GS-ES
/// pairs. All pairs are used when there are at most `pairs` of them;
/// otherwise pairs are drawn uniformly with replacement.
OverlapResult overlap_distributions(std::span<const SpinConfig> configs, std::span<const exact::StateLabel> labels,
                                    const OverlapOptions& options = {});

struct InstanceOverlap {
  std::optional<int> generation;
  double median_gs_gs = 0;
  double median_gs_es = 0;
};

struct TypicalOverlap {
  double gs_gs = 0;
  double gs_es = 0;
  std::size_t instances = 0;
};

/// Median over instances of the per-instance medians, per generation.
/// Instances without a generation are skipped.
std::map<int, TypicalOverlap> typical_overlap(std::span<const InstanceOverlap> instances);

/// Header metadata lines ("# key value") followed by T, E_minus_E0, error.
std::string serialize_curve(const EnergyCurve& curve, const std::vector<std::pair<std::string, std::string>>& meta);
/// bin_lo, bin_hi, gs_gs, gs_es.
std::string serialize_overlaps(const OverlapResult& result, const std::vector<std::pair<std::string, std::string>>& meta);

}  // namespace sglab::landscape
