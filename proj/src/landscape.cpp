#include "sglab/landscape.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/error.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"
#include "sglab/table.hpp"

namespace sglab::landscape {

EnergyCurve energy_curve(std::span<const double> temperatures, const std::vector<std::vector<double>>& series,
                         std::uint64_t sweeps_per_sample, double e0, const CurveOptions& options) {
  if (series.size() != temperatures.size()) throw Error("energy series does not match the ladder");
  if (series.empty()) throw Error("no energy series");
  std::size_t length = series[0].size();
  for (const auto& s : series)
    if (s.size() != length) throw Error("energy series differ in length");
  EnergyCurve c;
  c.temperatures.assign(temperatures.begin(), temperatures.end());
  c.e0 = e0;
  c.tau = options.tau;
  c.run_sweeps = static_cast<double>(length) * static_cast<double>(sweeps_per_sample);
  c.equilibrated = c.run_sweeps >= 10.0 * options.tau;
  if (options.require_equilibrated && !c.equilibrated)
    throw Error("insufficient equilibrated data: run of " + table::real(c.run_sweeps) + " sweeps is shorter than 10 tau");
  // Sample n sits at time (n + 1) * sweeps_per_sample; keep t > burn-in.
  double burn = options.burn_in_taus * options.tau;
  std::size_t first = 0;
  while (first < length && static_cast<double>(first + 1) * static_cast<double>(sweeps_per_sample) <= burn) ++first;
  c.burn_in_samples = first;
  c.used_samples = length - first;
  if (c.used_samples < 2) throw Error("insufficient equilibrated data: fewer than two samples after burn-in");
  std::size_t blocks = std::clamp<std::size_t>(options.blocks, 2, c.used_samples);
  for (const auto& s : series) {
    std::vector<double> block_sum(blocks, 0.0);
    std::vector<std::size_t> block_n(blocks, 0);
    double total = 0;
    for (std::size_t n = first; n < length; ++n) {
      std::size_t b = (n - first) * blocks / c.used_samples;
      block_sum[b] += s[n] - e0;
      ++block_n[b];
      total += s[n] - e0;
    }
    double mean = total / static_cast<double>(c.used_samples);
    std::vector<double> loo(blocks);
    for (std::size_t b = 0; b < blocks; ++b)
      loo[b] = (total - block_sum[b]) / static_cast<double>(c.used_samples - block_n[b]);
    c.values.push_back(mean);
    c.errors.push_back(stats::jackknife_error(loo));
  }
  return c;
}

EnergyCurve energy_curve(const engine::RunOutput& run, Energy e0, const CurveOptions& options) {
  return energy_curve(run.ladder, run.energy_series, run.sweeps_per_sample(), e0.to_double(), options);
}

Extrapolation extrapolate_zero_T(const EnergyCurve& curve, double delta, double t_a, double t_b) {
  const auto& t = curve.temperatures;
  if (t.size() < 2) throw Error("extrapolation needs at least two temperatures");
  auto nearest = [&](double target, std::optional<std::size_t> exclude) {
    std::size_t best = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (exclude && i == *exclude) continue;
      if (best == t.size() || std::abs(t[i] - target) < std::abs(t[best] - target)) best = i;
    }
    return best;
  };
  std::size_t a = nearest(t_a, std::nullopt);
  std::size_t b = nearest(t_b, a);
  if (t[a] > t[b]) std::swap(a, b);
  double xa = std::exp(-delta / t[a]), xb = std::exp(-delta / t[b]);
  double va = curve.values[a], vb = curve.values[b];
  double slope = (vb - va) / (xb - xa);
  Extrapolation r;
  r.error = va - slope * xa;
  r.e_extrap = curve.e0 + r.error;
  r.low = a;
  r.high = b;
  r.t_low = t[a];
  r.t_high = t[b];
  return r;
}

std::vector<double> detect_tc(const EnergyCurve& curve, const TcOptions& options) {
  std::vector<double> out;
  std::size_t n = curve.values.size();
  if (n < 2) return out;
  std::vector<double> d(n - 1), err(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = curve.values[i + 1] - curve.values[i];
    double e1 = i < curve.errors.size() ? curve.errors[i] : 0.0;
    double e2 = i + 1 < curve.errors.size() ? curve.errors[i + 1] : 0.0;
    err[i] = std::sqrt(e1 * e1 + e2 * e2);
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= options.min_step)) continue;
    if (!(d[i] > options.error_multiple * err[i])) continue;
    std::vector<double> around;
    std::size_t lo = i >= options.window ? i - options.window : 0;
    std::size_t hi = std::min(d.size() - 1, i + options.window);
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != i) around.push_back(std::abs(d[j]));
    double local = around.empty() ? 0.0 : stats::median(around);
    if (!(d[i] > options.median_multiple * local)) continue;
    out.push_back(0.5 * (curve.temperatures[i] + curve.temperatures[i + 1]));
  }
  return out;
}

double overlap(const SpinConfig& a, const SpinConfig& b) {
  if (a.size() != b.size()) throw Error("overlap of configurations with different sizes");
  if (a.size() == 0) throw Error("overlap of empty configurations");
  std::size_t hamming = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hamming += a[i] != b[i];
  auto n = static_cast<double>(a.size());
  return (n - 2.0 * static_cast<double>(hamming)) / n;
}

namespace {

OverlapDistribution histogram(std::string kind, std::vector<double> samples, double bin_width) {
  OverlapDistribution d;
  d.kind = std::move(kind);
  d.bin_width = bin_width;
  auto bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  d.mass.assign(bins, 0.0);
  d.samples = samples.size();
  if (samples.empty()) return d;
  for (double q : samples) {
    auto b = static_cast<std::size_t>(q / bin_width);
    d.mass[std::min(b, bins - 1)] += 1.0;
  }
  for (double& m : d.mass) m /= static_cast<double>(samples.size());
  d.median = stats::median(samples);
  return d;
}

}  // namespace

OverlapResult overlap_distributions(std::span<const SpinConfig> configs, std::span<const exact::StateLabel> labels,
                                    const OverlapOptions& options) {
  if (configs.size() != labels.size()) throw Error("labels do not match configurations");
  if (!(options.bin_width > 0 && options.bin_width <= 1)) throw Error("bin width must be in (0, 1]");
  std::vector<std::size_t> gs, es;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == exact::StateLabel::ground) gs.push_back(i);
    if (labels[i] == exact::StateLabel::excited) es.push_back(i);
  }
  OverlapResult r;
  if (gs.size() < 2 || es.empty()) {
    r.reason = "insufficient data: " + std::to_string(gs.size()) + " GS and " + std::to_string(es.size()) +
               " ES snapshots (need >= 2 GS and >= 1 ES)";
    return r;
  }
  r.sufficient = true;
  Rng rng = make_rng(options.seed, StreamTag::pairs, 0);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto absq = [&](std::size_t i, std::size_t j) { return std::abs(overlap(configs[i], configs[j])); };

  std::vector<double> gg, ge;
  std::size_t gg_pairs = gs.size() * (gs.size() - 1) / 2;
  if (gg_pairs <= options.pairs) {
    for (std::size_t i = 0; i < gs.size(); ++i)
      for (std::size_t j = i + 1; j < gs.size(); ++j) gg.push_back(absq(gs[i], gs[j]));
  } else {
    for (std::size_t n = 0; n < options.pairs; ++n) {
      std::size_t i = pick(gs.size()), j = pick(gs.size() - 1);
      if (j >= i) ++j;
      gg.push_back(absq(gs[i], gs[j]));
    }
  }
  if (gs.size() * es.size() <= options.pairs) {
    for (auto i : gs)
      for (auto j : es) ge.push_back(absq(i, j));
  } else {
    for (std::size_t n = 0; n < options.pairs; ++n) ge.push_back(absq(gs[pick(gs.size())], es[pick(es.size())]));
  }
  r.gs_gs = histogram("GS-GS", std::move(gg), options.bin_width);
  r.gs_es = histogram("GS-ES", std::move(ge), options.bin_width);
  return r;
}

std::map<int, TypicalOverlap> typical_overlap(std::span<const InstanceOverlap> instances) {
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_gen;
  for (const auto& inst : instances) {
    if (!inst.generation) continue;
    by_gen[*inst.generation].first.push_back(inst.median_gs_gs);
    by_gen[*inst.generation].second.push_back(inst.median_gs_es);
  }
  std::map<int, TypicalOverlap> out;
  for (auto& [k, v] : by_gen) out[k] = TypicalOverlap{stats::median(v.first), stats::median(v.second), v.first.size()};
  return out;
}

namespace {

std::string meta_lines(const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + " " + v + "\n";
  return out;
}

}  // namespace

std::string serialize_curve(const EnergyCurve& curve, const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string out = meta_lines(meta);
  out += table::row({"T", "E_minus_E0", "error"});
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    out += table::row({table::real(curve.temperatures[i]), table::real(curve.values[i]), table::real(curve.errors[i])});
  return out;
}

std::string serialize_overlaps(const OverlapResult& result,
                               const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string out = meta_lines(meta);
  if (!result.sufficient) {
    out += "# " + result.reason + "\n";
    out += table::row({"bin_lo", "bin_hi", "gs_gs", "gs_es"});
    return out;
  }
  out += "# median_gs_gs " + table::real(result.gs_gs.median) + "\n";
  out += "# median_gs_es " + table::real(result.gs_es.median) + "\n";
  out += table::row({"bin_lo", "bin_hi", "gs_gs", "gs_es"});
  double w = result.gs_gs.bin_width;
  for (std::size_t b = 0; b < result.gs_gs.mass.size(); ++b)
    out += table::row({table::real(static_cast<double>(b) * w), table::real(std::min(1.0, static_cast<double>(b + 1) * w)),
                       table::real(result.gs_gs.mass[b]), table::real(result.gs_es.mass[b])});
  return out;
}

}  // namespace sglab::landscape
