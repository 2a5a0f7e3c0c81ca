#include "sglab/ttslab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sglab/error.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"
#include "sglab/table.hpp"

namespace sglab::ttslab {

void AnnealRecord::validate() const {
  if (!(t_ann_us > 0) || !std::isfinite(t_ann_us)) throw Error("t_ann must be positive");
  if (x == 0) throw Error("X must be at least 1");
  if (y > x) throw Error("Y exceeds X");
}

std::string serialize_records(std::span<const AnnealRecord> records) {
  std::string out = table::row({"instance_id", "t_ann_us", "cycle", "X", "Y", "source"});
  for (const auto& r : records)
    out += table::row({r.instance_id, table::real(r.t_ann_us), std::to_string(r.cycle), std::to_string(r.x),
                       std::to_string(r.y), r.source});
  return out;
}

std::vector<AnnealRecord> parse_records(std::string_view text) {
  auto tsv = table::parse_tsv(text);
  std::size_t ci = tsv.column("instance_id"), ct = tsv.column("t_ann_us"), cc = tsv.column("cycle"),
              cx = tsv.column("X"), cy = tsv.column("Y");
  std::optional<std::size_t> cs;
  if (std::find(tsv.header.begin(), tsv.header.end(), "source") != tsv.header.end()) cs = tsv.column("source");
  std::vector<AnnealRecord> out;
  for (std::size_t n = 0; n < tsv.rows.size(); ++n) {
    const auto& row = tsv.rows[n];
    std::size_t line = tsv.row_lines[n];
    AnnealRecord r;
    r.instance_id = row[ci];
    r.t_ann_us = table::parse_real(row[ct], line);
    r.cycle = table::parse_uint(row[cc], line);
    r.x = table::parse_uint(row[cx], line);
    r.y = table::parse_uint(row[cy], line);
    if (cs) r.source = row[*cs];
    try {
      r.validate();
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

Aggregate aggregate(std::span<const AnnealRecord> records) {
  if (records.empty()) throw Error("aggregate needs at least one record");
  Aggregate a;
  for (const auto& r : records) {
    a.x_total += r.x;
    a.y_total += r.y;
  }
  if (a.x_total == 0) throw Error("aggregate over zero attempts");
  a.p = static_cast<double>(a.y_total) / static_cast<double>(a.x_total);
  a.floor = 1.0 / static_cast<double>(a.x_total);
  return a;
}

double tts(double p, double t_ann) {
  if (!(p >= 0 && p <= 1)) throw Error("success probability outside [0, 1]");
  if (p == 0) return kInfinite;
  return t_ann / p;
}

std::vector<TtsRow> tts_report(std::span<const AnnealRecord> records) {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<AnnealRecord>>> grouped;
  for (const auto& r : records) {
    if (!grouped.contains(r.instance_id)) order.push_back(r.instance_id);
    grouped[r.instance_id][r.t_ann_us].push_back(r);
  }
  std::vector<TtsRow> out;
  for (const auto& id : order)
    for (const auto& [t, recs] : grouped[id]) {
      TtsRow row{id, t, aggregate(recs), 0};
      row.tts_us = tts(row.agg.p, t);
      out.push_back(std::move(row));
    }
  return out;
}

std::string serialize_tts_report(std::span<const TtsRow> rows) {
  std::string out = table::row({"instance_id", "t_ann_us", "X_tot", "Y_tot", "P", "floor", "below_resolution",
                                "tts", "tts_unit"});
  for (const auto& r : rows)
    out += table::row({r.instance_id, table::real(r.t_ann_us), std::to_string(r.agg.x_total),
                       std::to_string(r.agg.y_total), table::real(r.agg.p), table::real(r.agg.floor),
                       r.agg.below_resolution() ? "1" : "0",
                       std::isinf(r.tts_us) ? "infinite" : table::real(r.tts_us), "us"});
  return out;
}

std::map<std::string, double> minimal_tts(std::span<const TtsRow> rows) {
  std::map<std::string, double> out;
  for (const auto& r : rows) {
    auto [it, fresh] = out.emplace(r.instance_id, r.tts_us);
    if (!fresh) it->second = std::min(it->second, r.tts_us);
  }
  return out;
}

double median_with_infinity(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty group");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  double lo = values[n / 2 - 1], hi = values[n / 2];
  if (std::isinf(hi)) return kInfinite;
  return 0.5 * (lo + hi);
}

TypicalTts group_typical_tts(std::span<const double> minimal, std::size_t resamples, std::uint64_t seed) {
  TypicalTts out;
  out.instances = minimal.size();
  out.value = median_with_infinity({minimal.begin(), minimal.end()});
  out.resolved = std::isfinite(out.value);
  if (!out.resolved || minimal.size() < 2 || resamples < 2) return out;
  Rng rng = make_rng(seed, StreamTag::round, 0);
  std::uniform_int_distribution<std::size_t> pick(0, minimal.size() - 1);
  std::vector<double> medians;
  std::vector<double> sample(minimal.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& s : sample) s = minimal[pick(rng)];
    double m = median_with_infinity(sample);
    if (std::isfinite(m)) medians.push_back(m);
  }
  if (medians.size() < 2) {
    out.error = kInfinite;
    return out;
  }
  double mu = stats::mean(medians), ss = 0;
  for (double m : medians) ss += (m - mu) * (m - mu);
  out.error = std::sqrt(ss / static_cast<double>(medians.size() - 1));
  return out;
}

ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y, std::string tag) {
  if (x.size() != y.size()) throw Error("fit_power_law: x and y differ in length");
  ScalingFit fit;
  fit.tag = std::move(tag);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      ++fit.excluded;
      continue;
    }
    lx.push_back(std::log10(x[i]));
    ly.push_back(std::log10(y[i]));
  }
  if (lx.size() < 3)
    throw Error("fit_power_law needs at least 3 positive points (" + std::to_string(fit.excluded) + " excluded)");
  auto line = stats::fit_line(lx, ly);
  fit.exponent = line.slope;
  fit.amplitude = std::pow(10.0, line.intercept);
  fit.standard_error = line.slope_error;
  fit.points = lx.size();
  fit.x_min = std::pow(10.0, *std::min_element(lx.begin(), lx.end()));
  fit.x_max = std::pow(10.0, *std::max_element(lx.begin(), lx.end()));
  return fit;
}

std::string serialize_fits(std::span<const ScalingFit> fits, std::string_view x_unit, std::string_view y_unit) {
  std::string out = table::row({"tag", "exponent", "amplitude", "stderr", "x_min", "x_max", "points", "excluded",
                                "x_unit", "y_unit"});
  for (const auto& f : fits)
    out += table::row({f.tag.empty() ? "-" : f.tag, table::real(f.exponent), table::real(f.amplitude),
                       table::real(f.standard_error), table::real(f.x_min), table::real(f.x_max),
                       std::to_string(f.points), std::to_string(f.excluded), std::string(x_unit),
                       std::string(y_unit)});
  return out;
}

std::string TimeWindow::name() const { return "k" + std::to_string(k) + (high ? "-high" : "-low"); }

std::optional<TimeWindow> time_window(double t_ann_us) {
  if (!(t_ann_us >= 20.0) || t_ann_us > 20000.0) return std::nullopt;
  if (t_ann_us == 20000.0) return TimeWindow{2, true};
  double scale = 1.0;
  for (int k = 0; k <= 2; ++k, scale *= 10.0) {
    if (t_ann_us >= 20.0 * scale && t_ann_us < 60.0 * scale) return TimeWindow{k, false};
    if (t_ann_us >= 60.0 * scale && t_ann_us < 200.0 * scale) return TimeWindow{k, true};
  }
  return std::nullopt;
}

std::vector<PercentileRow> percentile_by_generation(std::span<const PercentileGroup> groups, double quantile) {
  std::vector<PercentileRow> out;
  for (const auto& g : groups) {
    if (g.p.empty()) throw Error("percentile group " + g.generation + "/" + g.window.name() + " is empty");
    PercentileRow row;
    row.generation = g.generation;
    row.window = g.window;
    row.quantile = quantile;
    row.instances = g.p.size();
    row.value = stats::quantile(g.p, quantile);
    row.resolved = row.value > 0;
    out.push_back(row);
  }
  return out;
}

std::string serialize_percentiles(std::span<const PercentileRow> rows) {
  std::string out = table::row({"generation", "window", "quantile", "p", "resolved", "instances"});
  for (const auto& r : rows)
    out += table::row({r.generation, r.window.name(), table::real(r.quantile),
                       r.resolved ? table::real(r.value) : "unresolved", r.resolved ? "1" : "0",
                       std::to_string(r.instances)});
  return out;
}

}  // namespace sglab::ttslab
