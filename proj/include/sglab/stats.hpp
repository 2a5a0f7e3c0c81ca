#pragma once

#include <span>
#include <vector>

namespace sglab::stats {

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `q` in [0,1]; input need not be sorted.
/// Infinite values sort last and propagate if the interpolation touches them.
double quantile(std::span<const double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);

/// Jackknife standard error from leave-one-out estimates.
double jackknife_error(std::span<const double> leave_one_out);

/// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_error = 0;
  double residual_rms = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace sglab::stats
