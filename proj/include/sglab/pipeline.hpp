#pragma once

// Campaign orchestration: instance generation, exact ground states, hardness
// escalation, tau histogram, landscape, J-chaos and simulated TTS stages,
// persisted in one directory with a hash manifest for resume.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sglab/mixing.hpp"

namespace sglab::pipeline {

struct CampaignConfig {
  std::string id = "campaign";
  std::string graph = "4x4x4";
  std::set<std::uint32_t> dead;
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::vector<double> ladder;  // empty selects the default ladder
  std::uint32_t replicas = 4;
  std::uint32_t sweeps_per_step = 10;

  // hardness
  std::vector<std::uint64_t> rounds{100000, 1000000, 10000000};
  std::vector<std::size_t> caps{64, 16};
  std::size_t trace_samples = 100000;  // stride = max(1, steps / trace_samples)
  std::uint32_t hardness_lanes = 32;   // instances per packed run
  std::size_t groups = 16;

  double hist_bin_width = 0.25;  // decades

  // landscape
  std::size_t landscape_instances = 20;
  std::uint64_t landscape_steps = 100000;
  std::uint32_t landscape_checkpoints = 100;
  std::size_t overlap_pairs = 100000;

  // J-chaos
  std::size_t jchaos_instances = 10;
  double delta_j = 0.05;
  std::size_t jchaos_trials = 20;
  std::size_t jchaos_cycles = 10;
  std::uint64_t jchaos_attempts = 10;
  std::uint64_t jchaos_steps = 1000;

  // simulated TTS: one sweep stands for one microsecond of anneal time
  std::size_t tts_instances = 20;
  std::vector<double> anneal_us{20, 60, 200, 600, 2000, 6000, 20000};
  std::size_t tts_cycles = 5;
  std::uint64_t tts_max_attempts = 20;

  // execution only; not part of the campaign identity
  unsigned jobs = 1;
  std::string stop_after;

  /// `key = value` lines, '#' comments. Throws sglab::ParseError on unknown
  /// keys or malformed values.
  static CampaignConfig parse(std::string_view text);
  static CampaignConfig read(const std::filesystem::path& path);
  /// Canonical text of every identity key (excludes jobs and stop_after).
  std::string serialize() const;
  void validate() const;
};

/// Desk-scale defaults with C4 graphs.
CampaignConfig desk_defaults();

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"instances", "exact", "hardness", "hist", "landscape", "jchaos", "tts"};
  return names;
}

struct CampaignStatus {
  std::vector<std::string> completed;  // in stage order
  std::vector<std::string> skipped;    // already complete on entry
};

/// Runs (or resumes) a campaign in `dir`. Stages whose manifest hash matches
/// the files on disk are skipped; the first mismatching stage and all later
/// ones are rerun. A failure is written to `dir/failed.txt` and rethrown.
CampaignStatus run_campaign(const CampaignConfig& config, const std::filesystem::path& dir);

/// SHA-256 over the sorted relative paths and contents of a stage directory.
std::string stage_hash(const std::filesystem::path& stage_dir);

struct TauHistogram {
  std::vector<double> edges;  // counts.size() + 1 log-spaced edges
  std::vector<std::size_t> counts;
  std::vector<double> density;  // per unit tau; sum(density * width) = 1
  std::size_t samples = 0;
  std::size_t excluded = 0;  // unresolved or non-positive
  std::optional<double> tail_slope;
  double tail_slope_error = 0;
  std::size_t tail_points = 0;
  /// log10 of the ratio of the largest to the smallest sample.
  double span_decades = 0;
};

/// Log-binned density of tau. The tail slope is a line fit of log density
/// against log bin centre over the occupied bins from the mode onward.
TauHistogram tau_histogram(std::span<const double> taus, double bin_width_decades = 0.25);
TauHistogram tau_histogram(std::span<const mixing::HardnessReport> reports, double bin_width_decades = 0.25);
std::string serialize_histogram(const TauHistogram& h);

/// Calls f(i) for i in [0, n) on at most `jobs` threads. The first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f);

}  // namespace sglab::pipeline
