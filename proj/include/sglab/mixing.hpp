#pragma once

// Mixing time of the PT temperature random walk.
//
// C(s) = <i_t i_{t+s}> - (N_T + 1)^2 / 4, averaged over time and copies,
// is fitted to a1 exp(-s/tau1) + a2 exp(-s/tau2). tau1 is the mixing time.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sglab/trace.hpp"

namespace sglab::mixing {

struct CorrelationCurve {
  std::vector<std::uint64_t> lags;     // in samples
  std::vector<double> values;
  std::vector<std::uint64_t> counts;   // (copy, t) pairs behind each value
  std::vector<double> errors;          // jackknife over copy groups; 0 with one group
  std::uint64_t sweeps_per_sample = 1;
  std::size_t trace_length = 0;
  std::uint32_t n_temps = 0;
};

/// How the mean is removed. `ladder_midpoint` subtracts (N_T + 1)^2 / 4, the
/// exact mean of a complete PT copy set. `empirical` subtracts the square of
/// the pooled sample mean; the two agree for complete PT copy sets, and the
/// empirical form stays unbiased for independent chains.
enum class Centering { ladder_midpoint, empirical };

/// Every lag up to 32, then geometric with ratio 1.1, capped at length / 4.
std::vector<std::uint64_t> default_lags(std::size_t length);

/// Empty `lags` selects default_lags. Copies are split round-robin into
/// `groups` jackknife groups. Throws sglab::Error on an empty set or
/// mismatched lengths / ladders.
CorrelationCurve correlation(std::span<const WalkTrace> traces, std::span<const std::uint64_t> lags = {},
                             std::size_t groups = 16, Centering centering = Centering::ladder_midpoint);

struct TwoExpFit {
  bool converged = false;
  double tau1 = 0;  // leading time, same units as the lags given
  double tau2 = 0;
  double a1 = 0;
  double a2 = 0;
  double residual = 0;  // weighted RMS
  std::size_t points = 0;
  std::string note;
};

/// Fits lags/values directly. sigma may be empty (unweighted).
TwoExpFit fit_two_exp(std::span<const double> lags, std::span<const double> values,
                      std::span<const double> sigma = {});
/// Selects the fit window (stops at the first lag whose value is <= 0, below
/// 5% of C(0) or below twice its error) and fits it. Times stay in samples.
TwoExpFit fit_two_exp(const CorrelationCurve& curve);

/// Minimum over copies of the fraction of samples with index >= threshold.
double figure_of_merit(std::span<const WalkTrace> traces, std::uint32_t threshold = 16);

/// k when 10^k <= tau <= 3 * 10^k, nullopt otherwise ("between bins").
std::optional<int> assign_generation(double tau);

struct HardnessReport {
  std::string id;
  bool resolved = false;
  double tau = 0;      // full-lattice sweeps; a lower bound when unresolved
  double tau_sub = 0;  // sweeps
  double tau_err = 0;  // sweeps, jackknife over copy groups
  double a1 = 0;
  double a2 = 0;
  double residual = 0;
  double f = 0;
  std::optional<int> generation;
  std::uint32_t rounds = 0;
};

/// Fits the traces of one instance (empirical centering). Resolved when the fit converged and the
/// trace spans at least 10 tau.
HardnessReport measure_hardness(std::string id, std::span<const WalkTrace> traces, std::size_t groups = 16);

struct EscalationConfig {
  std::vector<std::uint64_t> rounds{1000000, 10000000, 100000000};  // elementary steps per round
  std::vector<std::size_t> caps{1024, 256};  // survivors admitted to round 2, 3, ...
};

/// Runs the given instances (indices into the caller's list) for `steps`
/// elementary steps and returns one trace set per requested index.
using Runner = std::function<std::vector<std::vector<WalkTrace>>(std::span<const std::size_t> indices,
                                                                  std::uint64_t steps, std::size_t round)>;

/// Round 1 runs every instance. Unresolved instances are ranked by f
/// (smallest first), truncated to the round's cap and rerun with the next
/// budget. Returns one report per id, in input order; `rounds` counts the
/// rounds each instance took part in.
std::vector<HardnessReport> escalation_protocol(std::span<const std::string> ids, const Runner& runner,
                                                const EscalationConfig& config);

/// Same protocol for callers that measure as they run (keeps only reports in
/// memory). The measurer returns one report per requested index.
using Measurer = std::function<std::vector<HardnessReport>(std::span<const std::size_t> indices, std::uint64_t steps,
                                                           std::size_t round)>;
std::vector<HardnessReport> escalation_protocol(std::span<const std::string> ids, const Measurer& measurer,
                                                const EscalationConfig& config);

/// Tab-separated: id tau tau_sub residual f generation rounds tau_err tau_unit.
/// generation is an integer, "between" or "unresolved".
std::string serialize_reports(std::span<const HardnessReport> reports);
std::vector<HardnessReport> parse_reports(std::string_view text);

}  // namespace sglab::mixing
