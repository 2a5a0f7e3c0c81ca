#include "sglab/mixing.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sglab/error.hpp"
#include "sglab/stats.hpp"
#include "sglab/table.hpp"

namespace sglab::mixing {

std::vector<std::uint64_t> default_lags(std::size_t length) {
  std::vector<std::uint64_t> lags;
  std::uint64_t max_lag = length / 4;
  for (std::uint64_t s = 0; s <= std::min<std::uint64_t>(32, max_lag); ++s) lags.push_back(s);
  double s = 32;
  while (true) {
    s = std::ceil(s * 1.1);
    if (s > static_cast<double>(max_lag)) break;
    lags.push_back(static_cast<std::uint64_t>(s));
  }
  return lags;
}

namespace {

// Sum over t of a[t] * a[t + lag].
std::uint64_t lagged_product(const std::uint8_t* a, std::size_t length, std::size_t lag) {
  std::uint64_t total = 0;
  std::size_t n = length - lag;
  const std::uint8_t* b = a + lag;
  constexpr std::size_t kBlock = 1 << 16;  // 255^2 * 2^16 < 2^32
  for (std::size_t start = 0; start < n; start += kBlock) {
    std::size_t end = std::min(n, start + kBlock);
    std::uint32_t acc = 0;
    for (std::size_t t = start; t < end; ++t) acc += std::uint32_t{a[t]} * std::uint32_t{b[t]};
    total += acc;
  }
  return total;
}

struct GroupSums {
  std::vector<std::uint64_t> lags;
  std::size_t groups = 0;
  std::vector<std::vector<double>> sum;             // [group][lag]
  std::vector<std::vector<std::uint64_t>> count;    // [group][lag]
  std::vector<double> first_moment;                 // [group] sum of i_t
  std::vector<std::uint64_t> samples;               // [group]
  double offset = 0;                                // (N_T + 1)^2 / 4
  std::uint64_t sweeps_per_sample = 1;
  std::size_t length = 0;
  std::uint32_t n_temps = 0;
};

GroupSums group_sums(std::span<const WalkTrace> traces, std::span<const std::uint64_t> lags, std::size_t groups) {
  if (traces.empty()) throw Error("correlation needs at least one trace");
  GroupSums g;
  g.length = traces[0].length();
  g.n_temps = traces[0].n_temps;
  g.sweeps_per_sample = traces[0].sweeps_per_sample;
  if (g.length == 0) throw Error("correlation needs non-empty traces");
  for (const auto& t : traces) {
    if (t.length() != g.length) throw Error("traces differ in length");
    if (t.n_temps != g.n_temps) throw Error("traces differ in ladder size");
    if (t.sweeps_per_sample != g.sweeps_per_sample) throw Error("traces differ in sampling interval");
  }
  g.lags = lags.empty() ? default_lags(g.length) : std::vector<std::uint64_t>(lags.begin(), lags.end());
  for (auto s : g.lags)
    if (s >= g.length) throw Error("lag " + std::to_string(s) + " not shorter than the traces");
  g.groups = std::clamp<std::size_t>(groups, 1, traces.size());
  g.sum.assign(g.groups, std::vector<double>(g.lags.size(), 0.0));
  g.count.assign(g.groups, std::vector<std::uint64_t>(g.lags.size(), 0));
  g.first_moment.assign(g.groups, 0.0);
  g.samples.assign(g.groups, 0);
  g.offset = (g.n_temps + 1.0) * (g.n_temps + 1.0) / 4.0;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    std::size_t grp = c % g.groups;
    const std::uint8_t* a = traces[c].indices.data();
    g.first_moment[grp] += static_cast<double>(std::accumulate(a, a + g.length, std::uint64_t{0}));
    g.samples[grp] += g.length;
    for (std::size_t j = 0; j < g.lags.size(); ++j) {
      g.sum[grp][j] += static_cast<double>(lagged_product(a, g.length, g.lags[j]));
      g.count[grp][j] += g.length - g.lags[j];
    }
  }
  return g;
}

CorrelationCurve curve_excluding(const GroupSums& g, std::size_t excluded, Centering centering) {
  double offset = g.offset;
  if (centering == Centering::empirical) {
    double s1 = 0;
    std::uint64_t n1 = 0;
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      if (grp == excluded) continue;
      s1 += g.first_moment[grp];
      n1 += g.samples[grp];
    }
    double m = s1 / static_cast<double>(n1);
    offset = m * m;
  }
  CorrelationCurve c;
  c.lags = g.lags;
  c.sweeps_per_sample = g.sweeps_per_sample;
  c.trace_length = g.length;
  c.n_temps = g.n_temps;
  for (std::size_t j = 0; j < g.lags.size(); ++j) {
    double s = 0;
    std::uint64_t n = 0;
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      if (grp == excluded) continue;
      s += g.sum[grp][j];
      n += g.count[grp][j];
    }
    c.values.push_back(s / static_cast<double>(n) - offset);
    c.counts.push_back(n);
  }
  c.errors.assign(g.lags.size(), 0.0);
  return c;
}

CorrelationCurve full_curve(const GroupSums& g, Centering centering) {
  CorrelationCurve c = curve_excluding(g, g.groups, centering);
  if (g.groups > 1) {
    std::vector<CorrelationCurve> loo;
    for (std::size_t grp = 0; grp < g.groups; ++grp) loo.push_back(curve_excluding(g, grp, centering));
    for (std::size_t j = 0; j < g.lags.size(); ++j) {
      std::vector<double> v;
      for (const auto& l : loo) v.push_back(l.values[j]);
      c.errors[j] = stats::jackknife_error(v);
    }
  }
  return c;
}

// Weighted least squares for the amplitudes at fixed times, with a >= 0.
struct Amplitudes {
  double a1 = 0, a2 = 0, ss = 0;
};

Amplitudes solve_amplitudes(std::span<const double> s, std::span<const double> y, std::span<const double> w,
                            double tau1, double tau2) {
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double x1 = std::exp(-s[j] / tau1), x2 = std::exp(-s[j] / tau2);
    s11 += w[j] * x1 * x1;
    s12 += w[j] * x1 * x2;
    s22 += w[j] * x2 * x2;
    b1 += w[j] * x1 * y[j];
    b2 += w[j] * x2 * y[j];
  }
  auto residual = [&](double a1, double a2) {
    double ss = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      double r = y[j] - a1 * std::exp(-s[j] / tau1) - a2 * std::exp(-s[j] / tau2);
      ss += w[j] * r * r;
    }
    return ss;
  };
  double det = s11 * s22 - s12 * s12;
  if (det > 1e-12 * s11 * s22) {
    double a1 = (b1 * s22 - b2 * s12) / det;
    double a2 = (s11 * b2 - s12 * b1) / det;
    if (a1 >= 0 && a2 >= 0) return {a1, a2, residual(a1, a2)};
  }
  Amplitudes only1{s11 > 0 ? std::max(0.0, b1 / s11) : 0.0, 0.0, 0};
  only1.ss = residual(only1.a1, 0);
  Amplitudes only2{0.0, s22 > 0 ? std::max(0.0, b2 / s22) : 0.0, 0};
  only2.ss = residual(0, only2.a2);
  return only1.ss <= only2.ss ? only1 : only2;
}

struct FitData {
  std::span<const double> s, y, w;
};

double objective(const gsl_vector* v, void* params) {
  const auto* d = static_cast<const FitData*>(params);
  double t1 = std::exp(gsl_vector_get(v, 0)), t2 = std::exp(gsl_vector_get(v, 1));
  if (!std::isfinite(t1) || !std::isfinite(t2) || t1 <= 0 || t2 <= 0) return std::numeric_limits<double>::max();
  return solve_amplitudes(d->s, d->y, d->w, t1, t2).ss;
}

double objective_single(const gsl_vector* v, void* params) {
  const auto* d = static_cast<const FitData*>(params);
  double t = std::exp(gsl_vector_get(v, 0));
  if (!std::isfinite(t) || t <= 0) return std::numeric_limits<double>::max();
  return solve_amplitudes(d->s, d->y, d->w, t, t).ss;
}

double minimize_single(FitData& data, double tau) {
  gsl_multimin_function fn{&objective_single, 1, &data};
  gsl_vector* x = gsl_vector_alloc(1);
  gsl_vector* step = gsl_vector_alloc(1);
  gsl_vector_set(x, 0, std::log(tau));
  gsl_vector_set_all(step, 0.5);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 1);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  for (int iter = 0; iter < 2000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-11) == GSL_SUCCESS) break;
  }
  double out = std::exp(gsl_vector_get(m->x, 0));
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return out;
}

std::pair<double, double> minimize(FitData& data, double tau1, double tau2) {
  gsl_multimin_function fn{&objective, 2, &data};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, std::log(tau1));
  gsl_vector_set(x, 1, std::log(tau2));
  gsl_vector_set_all(step, 0.5);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  for (int iter = 0; iter < 4000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-11) == GSL_SUCCESS) break;
  }
  std::pair<double, double> out{std::exp(gsl_vector_get(m->x, 0)), std::exp(gsl_vector_get(m->x, 1))};
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return out;
}

struct GslQuiet {
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  ~GslQuiet() { gsl_set_error_handler(old); }
};

}  // namespace

CorrelationCurve correlation(std::span<const WalkTrace> traces, std::span<const std::uint64_t> lags,
                             std::size_t groups, Centering centering) {
  return full_curve(group_sums(traces, lags, groups), centering);
}

TwoExpFit fit_two_exp(std::span<const double> lags, std::span<const double> values, std::span<const double> sigma) {
  TwoExpFit fit;
  fit.points = lags.size();
  if (lags.size() != values.size() || (!sigma.empty() && sigma.size() != values.size()))
    throw Error("fit_two_exp: mismatched input lengths");
  if (lags.size() < 8) {
    fit.note = "fewer than 8 usable lags";
    return fit;
  }
  for (double v : values)
    if (!(v > 0) || !std::isfinite(v)) {
      fit.note = "non-positive value in fit window";
      return fit;
    }
  std::vector<double> w(lags.size(), 1.0);
  if (!sigma.empty()) {
    std::vector<double> sorted(sigma.begin(), sigma.end());
    double med = stats::median(sorted);
    if (med > 0)
      for (std::size_t j = 0; j < w.size(); ++j) {
        double sg = std::max(sigma[j], 0.1 * med);
        w[j] = 1.0 / (sg * sg);
      }
  }
  // Tail estimate: log-linear fit over the second half of the window.
  std::size_t half = lags.size() / 2;
  std::vector<double> tx(lags.begin() + static_cast<std::ptrdiff_t>(half), lags.end()), ty;
  for (std::size_t j = half; j < values.size(); ++j) ty.push_back(std::log(values[j]));
  auto line = stats::fit_line(tx, ty);
  double span = lags.back() - lags.front();
  double tail = line.slope < 0 ? -1.0 / line.slope : std::max(span, 1.0);
  tail = std::clamp(tail, 1e-3, 1e12);

  GslQuiet quiet;
  FitData data{lags, values, w};
  double best_ss = std::numeric_limits<double>::infinity();
  std::pair<double, double> best{tail, tail / 10};
  double first_lag = lags[1] > 0 ? lags[1] : 1.0;
  for (auto [t1, t2] : {std::pair{tail, tail / 10}, std::pair{tail, tail / 3}, std::pair{2 * tail, tail / 5},
                        std::pair{tail, first_lag}, std::pair{tail / 2, tail / 30}}) {
    auto r = minimize(data, t1, t2);
    double ss = solve_amplitudes(lags, values, w, r.first, r.second).ss;
    if (ss < best_ss) {
      best_ss = ss;
      best = r;
    }
  }
  Amplitudes a = solve_amplitudes(lags, values, w, best.first, best.second);
  double ta = best.first, tb = best.second, aa = a.a1, ab = a.a2;
  // Leading component: the longer time among those carrying weight.
  if (aa > 0 && ab > 0) {
    if (tb > ta) {
      std::swap(ta, tb);
      std::swap(aa, ab);
    }
  } else if (ab > 0) {
    std::swap(ta, tb);
    std::swap(aa, ab);
  }
  // A slow minor component that does not dominate the end of the window is
  // not determined by the data (typically a noise offset): fall back to a
  // single exponential.
  double s_end = lags.back();
  if (aa > 0 && ab > 0 && aa < ab && aa * std::exp(-s_end / ta) < ab * std::exp(-s_end / tb)) {
    double t = minimize_single(data, tb);
    Amplitudes one = solve_amplitudes(lags, values, w, t, t);
    ta = t;
    aa = one.a1 + one.a2;
    ab = 0;
    tb = t;
    best_ss = one.ss;
    fit.note = "slow component unsupported; single exponential";
  }
  if (ab == 0) tb = std::min(tb, ta);
  fit.tau1 = ta;
  fit.tau2 = tb;
  fit.a1 = aa;
  fit.a2 = ab;
  double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  fit.residual = std::sqrt(best_ss / wsum);
  fit.converged = aa > 0 && std::isfinite(ta) && ta > 0 && ta < 1e15;
  if (!fit.converged) fit.note = "no positive leading amplitude";
  return fit;
}

TwoExpFit fit_two_exp(const CorrelationCurve& curve) {
  std::vector<double> s, y, e;
  bool have_errors = false;
  double c0 = curve.values.empty() ? 0.0 : curve.values.front();
  for (std::size_t j = 0; j < curve.values.size(); ++j) {
    double v = curve.values[j];
    double err = j < curve.errors.size() ? curve.errors[j] : 0.0;
    if (!(v > 0) || v < 0.05 * c0 || (err > 0 && v < 2 * err)) break;
    s.push_back(static_cast<double>(curve.lags[j]));
    y.push_back(v);
    e.push_back(err);
    have_errors = have_errors || err > 0;
  }
  if (!have_errors) e.clear();
  return fit_two_exp(s, y, e);
}

double figure_of_merit(std::span<const WalkTrace> traces, std::uint32_t threshold) {
  double f = 1.0;
  bool any = false;
  for (const auto& t : traces) {
    if (t.indices.empty()) continue;
    auto high = std::count_if(t.indices.begin(), t.indices.end(), [&](std::uint8_t i) { return i >= threshold; });
    f = std::min(f, static_cast<double>(high) / static_cast<double>(t.indices.size()));
    any = true;
  }
  return any ? f : 0.0;
}

std::optional<int> assign_generation(double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) return std::nullopt;
  int guess = static_cast<int>(std::floor(std::log10(tau)));
  for (int k = guess - 1; k <= guess + 1; ++k) {
    double lo = std::pow(10.0, k);
    if (lo <= tau && tau <= 3 * lo) return k;
  }
  return std::nullopt;
}

HardnessReport measure_hardness(std::string id, std::span<const WalkTrace> traces, std::size_t groups) {
  HardnessReport r;
  r.id = std::move(id);
  GroupSums g = group_sums(traces, {}, groups);
  CorrelationCurve curve = full_curve(g, Centering::empirical);
  TwoExpFit fit = fit_two_exp(curve);
  double sps = static_cast<double>(g.sweeps_per_sample);
  r.f = figure_of_merit(traces);
  r.a1 = fit.a1;
  r.a2 = fit.a2;
  r.residual = fit.residual;
  r.resolved = fit.converged && static_cast<double>(g.length) >= 10.0 * fit.tau1;
  if (!r.resolved) {
    r.tau = static_cast<double>(g.length) / 10.0 * sps;
    r.tau_sub = fit.converged ? fit.tau2 * sps : 0.0;
    return r;
  }
  r.tau = fit.tau1 * sps;
  r.tau_sub = fit.tau2 * sps;
  r.generation = assign_generation(r.tau);
  if (g.groups > 1) {
    std::vector<double> loo;
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      CorrelationCurve c = curve_excluding(g, grp, Centering::empirical);
      c.errors = curve.errors;
      TwoExpFit f = fit_two_exp(c);
      loo.push_back(f.converged ? f.tau1 * sps : r.tau);
    }
    r.tau_err = stats::jackknife_error(loo);
  }
  return r;
}

std::vector<HardnessReport> escalation_protocol(std::span<const std::string> ids, const Measurer& measurer,
                                                const EscalationConfig& config) {
  if (config.rounds.empty()) throw Error("escalation needs at least one round");
  std::vector<HardnessReport> reports(ids.size());
  std::vector<std::size_t> active(ids.size());
  std::iota(active.begin(), active.end(), 0);
  for (std::size_t round = 0; round < config.rounds.size() && !active.empty(); ++round) {
    auto measured = measurer(active, config.rounds[round], round);
    if (measured.size() != active.size()) throw Error("measurer returned the wrong number of reports");
    std::vector<std::size_t> unresolved;
    for (std::size_t n = 0; n < active.size(); ++n) {
      std::size_t idx = active[n];
      reports[idx] = std::move(measured[n]);
      reports[idx].id = ids[idx];
      reports[idx].rounds = static_cast<std::uint32_t>(round + 1);
      if (!reports[idx].resolved) unresolved.push_back(idx);
    }
    std::stable_sort(unresolved.begin(), unresolved.end(),
                     [&](std::size_t a, std::size_t b) { return reports[a].f < reports[b].f; });
    if (round < config.caps.size() && unresolved.size() > config.caps[round]) unresolved.resize(config.caps[round]);
    active = std::move(unresolved);
  }
  return reports;
}

std::vector<HardnessReport> escalation_protocol(std::span<const std::string> ids, const Runner& runner,
                                                const EscalationConfig& config) {
  Measurer measure = [&](std::span<const std::size_t> indices, std::uint64_t steps, std::size_t round) {
    auto sets = runner(indices, steps, round);
    if (sets.size() != indices.size()) throw Error("runner returned the wrong number of trace sets");
    std::vector<HardnessReport> out;
    for (std::size_t n = 0; n < indices.size(); ++n) out.push_back(measure_hardness(ids[indices[n]], sets[n]));
    return out;
  };
  return escalation_protocol(ids, measure, config);
}

std::string serialize_reports(std::span<const HardnessReport> reports) {
  std::string out =
      table::row({"id", "tau", "tau_sub", "residual", "f", "generation", "rounds", "tau_err", "tau_unit"});
  for (const auto& r : reports) {
    std::string gen = !r.resolved ? "unresolved" : r.generation ? std::to_string(*r.generation) : "between";
    out += table::row({r.id, table::real(r.tau), table::real(r.tau_sub), table::real(r.residual), table::real(r.f),
                       gen, std::to_string(r.rounds), table::real(r.tau_err), "sweeps"});
  }
  return out;
}

std::vector<HardnessReport> parse_reports(std::string_view text) {
  auto tsv = table::parse_tsv(text);
  std::size_t c_id = tsv.column("id"), c_tau = tsv.column("tau"), c_sub = tsv.column("tau_sub"),
              c_res = tsv.column("residual"), c_f = tsv.column("f"), c_gen = tsv.column("generation"),
              c_rounds = tsv.column("rounds");
  std::optional<std::size_t> c_err;
  if (std::find(tsv.header.begin(), tsv.header.end(), "tau_err") != tsv.header.end()) c_err = tsv.column("tau_err");
  std::vector<HardnessReport> out;
  for (std::size_t n = 0; n < tsv.rows.size(); ++n) {
    const auto& row = tsv.rows[n];
    std::size_t line = tsv.row_lines[n];
    HardnessReport r;
    r.id = row[c_id];
    r.tau = table::parse_real(row[c_tau], line);
    r.tau_sub = table::parse_real(row[c_sub], line);
    r.residual = table::parse_real(row[c_res], line);
    r.f = table::parse_real(row[c_f], line);
    r.rounds = static_cast<std::uint32_t>(table::parse_uint(row[c_rounds], line));
    if (c_err) r.tau_err = table::parse_real(row[*c_err], line);
    const std::string& gen = row[c_gen];
    if (gen == "unresolved") {
      r.resolved = false;
    } else if (gen == "between") {
      r.resolved = true;
    } else {
      r.resolved = true;
      r.generation = static_cast<int>(table::parse_int(gen, line));
    }
    if (!(r.f >= 0 && r.f <= 1)) throw ParseError(line, "figure of merit outside [0, 1]");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sglab::mixing
