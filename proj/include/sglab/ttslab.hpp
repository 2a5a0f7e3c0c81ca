#pragma once

// Success probability and time-to-solution analytics.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sglab::ttslab {

inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

struct AnnealRecord {
  std::string instance_id;
  double t_ann_us = 0;
  std::uint64_t cycle = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::string source = "simulated";

  /// Throws sglab::Error when t_ann <= 0, X == 0 or Y > X.
  void validate() const;
  friend bool operator==(const AnnealRecord&, const AnnealRecord&) = default;
};

std::string serialize_records(std::span<const AnnealRecord> records);
std::vector<AnnealRecord> parse_records(std::string_view text);

struct Aggregate {
  double p = 0;
  double floor = 0;  // 1 / X_tot
  std::uint64_t x_total = 0;
  std::uint64_t y_total = 0;
  bool below_resolution() const { return y_total == 0; }
};

/// Pools Y and X over records; throws on an empty set.
Aggregate aggregate(std::span<const AnnealRecord> records);

/// t_ann / P, or kInfinite when P = 0.
double tts(double p, double t_ann);

struct TtsRow {
  std::string instance_id;
  double t_ann_us = 0;
  Aggregate agg;
  double tts_us = 0;
};

/// One row per (instance, t_ann) in first-appearance order of instances and
/// ascending t_ann.
std::vector<TtsRow> tts_report(std::span<const AnnealRecord> records);
std::string serialize_tts_report(std::span<const TtsRow> rows);

/// Per-instance minimum tts over anneal times.
std::map<std::string, double> minimal_tts(std::span<const TtsRow> rows);

struct TypicalTts {
  double value = kInfinite;  // median of per-instance minimal tts
  bool resolved = false;
  double error = 0;          // bootstrap standard deviation over instances
  std::size_t instances = 0;
};

/// Median with infinite values ordered last. Throws on an empty set.
double median_with_infinity(std::vector<double> values);
TypicalTts group_typical_tts(std::span<const double> minimal, std::size_t resamples = 1000,
                             std::uint64_t seed = 0);

struct ScalingFit {
  double exponent = 0;
  double amplitude = 0;
  double standard_error = 0;
  double x_min = 0;
  double x_max = 0;
  std::size_t points = 0;
  std::size_t excluded = 0;  // non-positive or non-finite inputs dropped
  std::string tag;
};

/// Least squares on (log10 x, log10 y). Needs at least 3 usable points.
ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y, std::string tag = "");
std::string serialize_fits(std::span<const ScalingFit> fits, std::string_view x_unit, std::string_view y_unit);

struct TimeWindow {
  int k = 0;          // decade, 0..2
  bool high = false;  // [60, 200) rather than [20, 60)
  std::string name() const;
  auto operator<=>(const TimeWindow&) const = default;
};

/// Window of an anneal time in microseconds; 20 ms belongs to (2, high).
/// nullopt outside [20 us, 20 ms].
std::optional<TimeWindow> time_window(double t_ann_us);

struct PercentileGroup {
  std::string generation;
  TimeWindow window;
  std::vector<double> p;  // one value per instance
};

struct PercentileRow {
  std::string generation;
  TimeWindow window;
  double quantile = 0;
  double value = 0;
  bool resolved = false;
  std::size_t instances = 0;
};

/// Requested quantile per group; a group is unresolved when so many
/// instances sit at p = 0 that the quantile itself is zero.
std::vector<PercentileRow> percentile_by_generation(std::span<const PercentileGroup> groups, double quantile);
std::string serialize_percentiles(std::span<const PercentileRow> rows);

}  // namespace sglab::ttslab
