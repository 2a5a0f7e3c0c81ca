#include "sglab/chaosj.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "sglab/error.hpp"
#include "sglab/landscape.hpp"
#include "sglab/stats.hpp"
#include "sglab/table.hpp"

namespace sglab::chaosj {

void PerturbationSpec::validate() const {
  if (!(delta_j >= 0) || !std::isfinite(delta_j)) throw Error("delta_j must be a finite non-negative number");
  if (clamp && !(clamp->first <= clamp->second)) throw Error("clamp range is empty");
}

Instance perturb(const Instance& instance, const PerturbationSpec& spec) {
  spec.validate();
  const auto& g = instance.graph();
  std::vector<Fixed> j(instance.couplings().begin(), instance.couplings().end());
  Rng rng = make_rng(spec.seed, StreamTag::perturb, 0);
  std::normal_distribution<double> noise(0.0, spec.delta_j > 0 ? spec.delta_j : 1.0);
  for (std::size_t e = 0; e < j.size(); ++e) {
    double shift = spec.delta_j > 0 ? noise(rng) : 0.0;
    if (spec.bias) {
      auto [u, v] = g.edge_endpoints(e);
      shift += spec.bias(u, v);
    }
    if (shift != 0.0) j[e] = j[e] + Fixed::from_double(shift);
    if (spec.clamp) {
      Fixed lo = Fixed::from_double(spec.clamp->first), hi = Fixed::from_double(spec.clamp->second);
      j[e] = std::clamp(j[e], lo, hi);
    }
  }
  return Instance(instance.graph_ptr(), std::move(j),
                  std::vector<Fixed>(instance.fields().begin(), instance.fields().end()), instance.id(),
                  instance.seed());
}

exact::ExactResult default_solver(const Instance& instance) {
  if (instance.spin_count() <= 32) return exact::brute_force(instance);
  return exact::column_dp(instance);
}

GsShift gs_shift(const Instance& instance, const PerturbationSpec& spec, std::size_t trials,
                 const ExactSolver& solver) {
  exact::ExactResult original = solver(instance);
  GsShift out;
  for (std::size_t t = 0; t < trials; ++t) {
    PerturbationSpec s = spec;
    s.seed = derive_seed(spec.seed, StreamTag::perturb, t);
    exact::ExactResult shifted = solver(perturb(instance, s));
    out.abs_q.push_back(std::abs(landscape::overlap(original.witness, shifted.witness)));
    if (chimera::energy(instance, shifted.witness) != original.e0) ++out.changed;
  }
  out.changed_fraction = trials == 0 ? 0.0 : static_cast<double>(out.changed) / static_cast<double>(trials);
  return out;
}

std::vector<CycleResult> simulate_cycles(const Instance& instance, const PerturbationSpec& spec, Energy e0,
                                         const engine::TemperatureLadder& ladder, const CycleConfig& config) {
  std::vector<CycleResult> out;
  for (std::uint64_t c = 0; c < config.cycles; ++c) {
    CycleResult r;
    r.instance_id = instance.id();
    r.cycle = c;
    r.gauge_seed = derive_seed(config.seed, StreamTag::gauge, c);
    r.perturb_seed = derive_seed(config.seed, StreamTag::perturb, c);
    r.x = config.attempts;
    Rng grng(r.gauge_seed);
    chimera::Gauge gauge = chimera::Gauge::random(instance.spin_count(), grng);
    PerturbationSpec s = spec;
    s.seed = r.perturb_seed;
    Instance programmed = perturb(chimera::apply_gauge(instance, gauge), s);
    std::uint64_t cycle_seed = derive_seed(config.seed, StreamTag::cycle, c);
    for (std::uint64_t a = 0; a < config.attempts; ++a) {
      engine::HeuristicConfig budget = config.budget;
      budget.seed = derive_seed(cycle_seed, StreamTag::attempt, a);
      engine::BestFound best = engine::solve_best(programmed, ladder, budget);
      if (best.config.size() == 0) continue;
      if (chimera::energy(instance, chimera::apply_gauge(best.config, gauge)) == e0) ++r.y;
    }
    out.push_back(r);
  }
  return out;
}

double percentile(std::span<const double> p, double q, std::size_t min_count) {
  if (p.size() < min_count)
    throw Error("percentile needs at least " + std::to_string(min_count) + " values (got " + std::to_string(p.size()) +
                ")");
  if (p.empty()) throw Error("percentile of an empty set");
  return stats::quantile(p, q);
}

std::optional<double> ratio_89(double i80, double i90) {
  if (!(i90 > 0)) return std::nullopt;
  return i80 / i90;
}

std::optional<double> ratio_89(std::span<const double> p, std::size_t min_count) {
  return ratio_89(percentile(p, 0.8, min_count), percentile(p, 0.9, min_count));
}

std::string serialize_cycles(std::span<const CycleResult> cycles) {
  std::string out = table::row({"instance_id", "cycle", "gauge_seed", "perturb_seed", "X", "Y", "p"});
  for (const auto& c : cycles)
    out += table::row({c.instance_id, std::to_string(c.cycle), std::to_string(c.gauge_seed),
                       std::to_string(c.perturb_seed), std::to_string(c.x), std::to_string(c.y), table::real(c.p())});
  return out;
}

std::vector<CycleResult> parse_cycles(std::string_view text) {
  auto tsv = table::parse_tsv(text);
  std::size_t ci = tsv.column("instance_id"), cc = tsv.column("cycle"), cg = tsv.column("gauge_seed"),
              cp = tsv.column("perturb_seed"), cx = tsv.column("X"), cy = tsv.column("Y");
  std::vector<CycleResult> out;
  for (std::size_t n = 0; n < tsv.rows.size(); ++n) {
    const auto& row = tsv.rows[n];
    std::size_t line = tsv.row_lines[n];
    CycleResult c;
    c.instance_id = row[ci];
    c.cycle = table::parse_uint(row[cc], line);
    c.gauge_seed = table::parse_uint(row[cg], line);
    c.perturb_seed = table::parse_uint(row[cp], line);
    c.x = table::parse_uint(row[cx], line);
    c.y = table::parse_uint(row[cy], line);
    if (c.y > c.x) throw ParseError(line, "Y exceeds X");
    out.push_back(std::move(c));
  }
  return out;
}

std::string percentile_report(std::span<const CycleResult> cycles) {
  std::map<std::string, std::vector<double>> by_id;
  std::vector<std::string> order;
  for (const auto& c : cycles) {
    if (!by_id.contains(c.instance_id)) order.push_back(c.instance_id);
    by_id[c.instance_id].push_back(c.p());
  }
  std::string out = table::row({"id", "n_cycles", "I50", "I80", "I90", "R89"});
  for (const auto& id : order) {
    const auto& p = by_id[id];
    double i50 = stats::quantile(p, 0.5), i80 = stats::quantile(p, 0.8), i90 = stats::quantile(p, 0.9);
    auto r = ratio_89(i80, i90);
    out += table::row({id, std::to_string(p.size()), table::real(i50), table::real(i80), table::real(i90),
                       r ? table::real(*r) : "undefined"});
  }
  return out;
}

}  // namespace sglab::chaosj
