#include "sglab/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "sglab/chaosj.hpp"
#include "sglab/chimera.hpp"
#include "sglab/engine.hpp"
#include "sglab/error.hpp"
#include "sglab/exact.hpp"
#include "sglab/landscape.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"
#include "sglab/table.hpp"
#include "sglab/ttslab.hpp"

namespace sglab::pipeline {

namespace fs = std::filesystem;
using chimera::Instance;
using chimera::SpinConfig;

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  for (auto& item : table::split(value, ',')) out.push_back(trim(item));
  return out;
}

template <class T, class Parse>
std::string join(const std::vector<T>& values, Parse format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format(values[i]);
  return out;
}

std::string fmt_uint(std::uint64_t v) { return std::to_string(v); }

}  // namespace

CampaignConfig CampaignConfig::parse(std::string_view text) {
  CampaignConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    auto u = [&] { return table::parse_uint(value, line_no); };
    auto r = [&] { return table::parse_real(value, line_no); };
    auto u32 = [&] {
      auto v = u();
      if (v > 0xffffffffULL) throw ParseError(line_no, key + " out of range");
      return static_cast<std::uint32_t>(v);
    };
    if (key == "id") c.id = value;
    else if (key == "graph") c.graph = value;
    else if (key == "dead") {
      c.dead.clear();
      for (auto& item : split_list(value)) c.dead.insert(static_cast<std::uint32_t>(table::parse_uint(item, line_no)));
    } else if (key == "count") c.count = u();
    else if (key == "seed") c.seed = u();
    else if (key == "ladder") {
      c.ladder.clear();
      if (value != "default")
        for (auto& item : split_list(value)) c.ladder.push_back(table::parse_real(item, line_no));
    } else if (key == "replicas") c.replicas = u32();
    else if (key == "sweeps_per_step") c.sweeps_per_step = u32();
    else if (key == "rounds") {
      c.rounds.clear();
      for (auto& item : split_list(value)) c.rounds.push_back(table::parse_uint(item, line_no));
    } else if (key == "caps") {
      c.caps.clear();
      for (auto& item : split_list(value)) c.caps.push_back(table::parse_uint(item, line_no));
    } else if (key == "trace_samples") c.trace_samples = u();
    else if (key == "hardness_lanes") c.hardness_lanes = u32();
    else if (key == "groups") c.groups = u();
    else if (key == "hist_bin_width") c.hist_bin_width = r();
    else if (key == "landscape_instances") c.landscape_instances = u();
    else if (key == "landscape_steps") c.landscape_steps = u();
    else if (key == "landscape_checkpoints") c.landscape_checkpoints = u32();
    else if (key == "overlap_pairs") c.overlap_pairs = u();
    else if (key == "jchaos_instances") c.jchaos_instances = u();
    else if (key == "delta_j") c.delta_j = r();
    else if (key == "jchaos_trials") c.jchaos_trials = u();
    else if (key == "jchaos_cycles") c.jchaos_cycles = u();
    else if (key == "jchaos_attempts") c.jchaos_attempts = u();
    else if (key == "jchaos_steps") c.jchaos_steps = u();
    else if (key == "tts_instances") c.tts_instances = u();
    else if (key == "anneal_us") {
      c.anneal_us.clear();
      for (auto& item : split_list(value)) c.anneal_us.push_back(table::parse_real(item, line_no));
    } else if (key == "tts_cycles") c.tts_cycles = u();
    else if (key == "tts_max_attempts") c.tts_max_attempts = u();
    else if (key == "jobs") c.jobs = u32();
    else if (key == "stop_after") c.stop_after = value;
    else throw ParseError(line_no, "unknown key '" + key + "'");
  }
  try {
    c.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return c;
}

CampaignConfig CampaignConfig::read(const fs::path& path) {
  try {
    return parse(table::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.detail());
  }
}

std::string CampaignConfig::serialize() const {
  auto real = [](double v) { return table::real(v); };
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  kv("id", id);
  kv("graph", graph);
  kv("dead", join(std::vector<std::uint64_t>(dead.begin(), dead.end()), fmt_uint));
  kv("count", std::to_string(count));
  kv("seed", std::to_string(seed));
  kv("ladder", ladder.empty() ? "default" : join(ladder, real));
  kv("replicas", std::to_string(replicas));
  kv("sweeps_per_step", std::to_string(sweeps_per_step));
  kv("rounds", join(rounds, fmt_uint));
  kv("caps", join(std::vector<std::uint64_t>(caps.begin(), caps.end()), fmt_uint));
  kv("trace_samples", std::to_string(trace_samples));
  kv("hardness_lanes", std::to_string(hardness_lanes));
  kv("groups", std::to_string(groups));
  kv("hist_bin_width", real(hist_bin_width));
  kv("landscape_instances", std::to_string(landscape_instances));
  kv("landscape_steps", std::to_string(landscape_steps));
  kv("landscape_checkpoints", std::to_string(landscape_checkpoints));
  kv("overlap_pairs", std::to_string(overlap_pairs));
  kv("jchaos_instances", std::to_string(jchaos_instances));
  kv("delta_j", real(delta_j));
  kv("jchaos_trials", std::to_string(jchaos_trials));
  kv("jchaos_cycles", std::to_string(jchaos_cycles));
  kv("jchaos_attempts", std::to_string(jchaos_attempts));
  kv("jchaos_steps", std::to_string(jchaos_steps));
  kv("tts_instances", std::to_string(tts_instances));
  kv("anneal_us", join(anneal_us, real));
  kv("tts_cycles", std::to_string(tts_cycles));
  kv("tts_max_attempts", std::to_string(tts_max_attempts));
  return out;
}

void CampaignConfig::validate() const {
  if (id.empty() || id.find_first_of(" \t/") != std::string::npos) throw Error("campaign id must be a plain word");
  chimera::parse_graph_spec(graph);
  if (replicas == 0 || sweeps_per_step == 0) throw Error("replicas and sweeps_per_step must be positive");
  if (rounds.empty()) throw Error("rounds must list at least one budget");
  for (auto r : rounds)
    if (r == 0) throw Error("round budgets must be positive");
  if (trace_samples == 0 || hardness_lanes == 0 || hardness_lanes > 256) throw Error("bad trace or lane setting");
  if (groups < 2) throw Error("groups must be at least 2");
  if (!(hist_bin_width > 0)) throw Error("hist_bin_width must be positive");
  if (landscape_checkpoints == 0) throw Error("landscape_checkpoints must be positive");
  if (!(delta_j >= 0)) throw Error("delta_j must be non-negative");
  for (double t : anneal_us)
    if (!(t > 0)) throw Error("anneal times must be positive");
  if (jobs == 0) throw Error("jobs must be at least 1");
  if (!stop_after.empty() &&
      std::find(stage_names().begin(), stage_names().end(), stop_after) == stage_names().end())
    throw Error("unknown stage '" + stop_after + "'");
  if (!ladder.empty()) engine::TemperatureLadder{ladder};
}

CampaignConfig desk_defaults() { return CampaignConfig{}; }

// ---------------------------------------------------------------------------
// Utilities

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f) {
  if (n == 0) return;
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; !stop && (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string stage_hash(const fs::path& stage_dir) {
  std::vector<fs::path> files;
  if (fs::exists(stage_dir))
    for (const auto& e : fs::recursive_directory_iterator(stage_dir))
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), stage_dir));
  std::sort(files.begin(), files.end());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
  for (const auto& rel : files) {
    std::string name = rel.generic_string();
    std::string body = table::read_file(stage_dir / rel);
    std::string head = name + '\0' + std::to_string(body.size()) + '\0';
    EVP_DigestUpdate(ctx.get(), head.data(), head.size());
    EVP_DigestUpdate(ctx.get(), body.data(), body.size());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histogram

TauHistogram tau_histogram(std::span<const double> taus, double bin_width_decades) {
  if (!(bin_width_decades > 0)) throw Error("bin width must be positive");
  TauHistogram h;
  std::vector<double> logs;
  for (double t : taus) {
    if (t > 0 && std::isfinite(t)) logs.push_back(std::log10(t));
    else ++h.excluded;
  }
  if (logs.empty()) throw Error("tau histogram needs at least one positive tau");
  h.samples = logs.size();
  auto [mn, mx] = std::minmax_element(logs.begin(), logs.end());
  double lo = *mn, hi = *mx;
  h.span_decades = hi - lo;
  std::size_t bins = 1;
  if (hi > lo) {
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width_decades));
    if (lo + static_cast<double>(bins) * bin_width_decades <= hi) ++bins;
  } else {
    lo -= bin_width_decades / 2;
  }
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(std::pow(10.0, lo + static_cast<double>(b) * bin_width_decades));
  h.counts.assign(bins, 0);
  for (double l : logs) {
    auto b = static_cast<std::size_t>(std::floor((l - lo) / bin_width_decades));
    h.counts[std::min(b, bins - 1)]++;
  }
  std::size_t mode = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    double width = h.edges[b + 1] - h.edges[b];
    h.density.push_back(static_cast<double>(h.counts[b]) / (static_cast<double>(h.samples) * width));
    if (h.counts[b] > h.counts[mode]) mode = b;
  }
  std::vector<double> x, y;
  for (std::size_t b = mode; b < bins; ++b)
    if (h.counts[b] > 0) {
      x.push_back(0.5 * (std::log10(h.edges[b]) + std::log10(h.edges[b + 1])));
      y.push_back(std::log10(h.density[b]));
    }
  h.tail_points = x.size();
  if (x.size() >= 2) {
    auto fit = stats::fit_line(x, y);
    h.tail_slope = fit.slope;
    h.tail_slope_error = fit.slope_error;
  }
  return h;
}

TauHistogram tau_histogram(std::span<const mixing::HardnessReport> reports, double bin_width_decades) {
  std::vector<double> taus;
  std::size_t unresolved = 0;
  for (const auto& r : reports) {
    if (r.resolved) taus.push_back(r.tau);
    else ++unresolved;
  }
  TauHistogram h = tau_histogram(taus, bin_width_decades);
  h.excluded += unresolved;
  return h;
}

std::string serialize_histogram(const TauHistogram& h) {
  std::string out = "# samples " + std::to_string(h.samples) + "\n# excluded " + std::to_string(h.excluded) +
                    "\n# span_decades " + table::real(h.span_decades) + "\n# tail_slope " +
                    (h.tail_slope ? table::real(*h.tail_slope) : "undefined") + "\n# tail_slope_error " +
                    table::real(h.tail_slope_error) + "\n# tail_points " + std::to_string(h.tail_points) +
                    "\n# tau_unit sweeps\n";
  out += table::row({"tau_lo", "tau_hi", "count", "density"});
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out += table::row({table::real(h.edges[b]), table::real(h.edges[b + 1]), std::to_string(h.counts[b]),
                       table::real(h.density[b])});
  return out;
}

// ---------------------------------------------------------------------------
// Campaign

namespace {

struct Context {
  const CampaignConfig& config;
  fs::path dir;
  engine::TemperatureLadder ladder;
  std::shared_ptr<const chimera::ChimeraGraph> graph;
};

fs::path stage_dir(const Context& ctx, std::string_view stage) { return ctx.dir / std::string(stage); }

std::vector<Instance> load_instances(const Context& ctx) {
  auto index = table::read_tsv(ctx.dir / "instances" / "index.tsv");
  std::size_t c_file = index.column("file");
  std::vector<Instance> out;
  for (const auto& row : index.rows) out.push_back(chimera::read_instance((ctx.dir / "instances" / row[c_file]).string()));
  return out;
}

std::map<std::string, Energy> load_ground_energies(const Context& ctx, std::span<const Instance> instances) {
  std::map<std::string, Energy> out;
  for (const auto& inst : instances) {
    auto doc = chimera::parse_document(table::read_file(ctx.dir / "exact" / (inst.id() + ".gs")));
    if (!doc.config) throw Error("witness for " + inst.id() + " has no configuration");
    out.emplace(inst.id(), chimera::energy(inst, *doc.config));
  }
  return out;
}

std::vector<mixing::HardnessReport> load_reports(const Context& ctx) {
  return mixing::parse_reports(table::read_file(ctx.dir / "hardness" / "reports.tsv"));
}

/// Resolved instances with an integer generation, taken round-robin over
/// generations (ascending) in instance order, at most `limit`.
std::vector<std::size_t> select_by_generation(std::span<const mixing::HardnessReport> reports, std::size_t limit) {
  std::map<int, std::vector<std::size_t>> by_gen;
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (reports[i].resolved && reports[i].generation) by_gen[*reports[i].generation].push_back(i);
  std::vector<std::size_t> out;
  for (std::size_t depth = 0; out.size() < limit; ++depth) {
    bool any = false;
    for (auto& [g, list] : by_gen)
      if (depth < list.size() && out.size() < limit) {
        out.push_back(list[depth]);
        any = true;
      }
    if (!any) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string generation_label(const mixing::HardnessReport& r) {
  if (!r.resolved) return "unresolved";
  return r.generation ? std::to_string(*r.generation) : "between";
}

void stage_instances(const Context& ctx) {
  fs::path d = stage_dir(ctx, "instances");
  std::string index = table::row({"id", "seed", "file"});
  for (std::size_t i = 0; i < ctx.config.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "i%05zu", i);
    std::uint64_t seed = derive_seed(ctx.config.seed, StreamTag::instance, i);
    Instance inst = chimera::generate_instance(ctx.graph, seed, id);
    chimera::write_instance((d / (std::string(id) + ".txt")).string(), inst);
    index += table::row({id, std::to_string(seed), std::string(id) + ".txt"});
  }
  table::write_file(d / "index.tsv", index);
}

void stage_exact(const Context& ctx) {
  auto instances = load_instances(ctx);
  std::vector<exact::ExactResult> results(instances.size());
  parallel_for(instances.size(), ctx.config.jobs,
               [&](std::size_t i) { results[i] = chaosj::default_solver(instances[i]); });
  fs::path d = stage_dir(ctx, "exact");
  std::vector<std::pair<std::string, exact::ExactResult>> rows;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    table::write_file(d / (instances[i].id() + ".gs"), chimera::serialize_document(instances[i], results[i].witness));
    rows.emplace_back(instances[i].id(), results[i]);
  }
  table::write_file(d / "ground.tsv", exact::serialize_results(rows));
}

void stage_hardness(const Context& ctx) {
  auto instances = load_instances(ctx);
  const auto& cfg = ctx.config;
  std::vector<std::string> ids;
  for (const auto& inst : instances) ids.push_back(inst.id());
  mixing::EscalationConfig esc{cfg.rounds, cfg.caps};
  mixing::Measurer measure = [&](std::span<const std::size_t> indices, std::uint64_t steps, std::size_t round) {
    std::size_t lanes = cfg.hardness_lanes;
    std::size_t chunks = (indices.size() + lanes - 1) / lanes;
    std::vector<mixing::HardnessReport> out(indices.size());
    std::uint64_t round_seed = derive_seed(cfg.seed, StreamTag::round, round);
    parallel_for(chunks, cfg.jobs, [&](std::size_t c) {
      std::size_t begin = c * lanes, end = std::min(indices.size(), begin + lanes);
      std::vector<Instance> group;
      for (std::size_t n = begin; n < end; ++n) group.push_back(instances[indices[n]]);
      engine::RunConfig rc;
      rc.steps = steps;
      rc.sweeps_per_step = cfg.sweeps_per_step;
      rc.replicas = cfg.replicas;
      rc.record_energies = false;
      rc.trace_stride = static_cast<std::uint32_t>(std::max<std::uint64_t>(1, steps / cfg.trace_samples));
      rc.seed = derive_seed(round_seed, StreamTag::cycle, c);
      rc.lanes_per_word = static_cast<std::uint32_t>(lanes);
      auto runs = engine::run(group, ctx.ladder, rc);
      for (std::size_t n = begin; n < end; ++n)
        out[n] = mixing::measure_hardness(group[n - begin].id(), runs[n - begin].traces, cfg.groups);
    });
    return out;
  };
  auto reports = mixing::escalation_protocol(ids, measure, esc);
  table::write_file(stage_dir(ctx, "hardness") / "reports.tsv", mixing::serialize_reports(reports));
}

void stage_hist(const Context& ctx) {
  auto reports = load_reports(ctx);
  fs::path file = stage_dir(ctx, "hist") / "tau_hist.tsv";
  bool any = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.resolved && r.tau > 0; });
  if (!any) {
    table::write_file(file, "# samples 0\n# excluded " + std::to_string(reports.size()) + "\n# tau_unit sweeps\n" +
                                table::row({"tau_lo", "tau_hi", "count", "density"}));
    return;
  }
  table::write_file(file, serialize_histogram(tau_histogram(reports, ctx.config.hist_bin_width)));
}

struct LandscapeRow {
  bool ok = false;
  std::string note;
  landscape::EnergyCurve curve;
  landscape::Extrapolation extrap;
  std::vector<double> tc;
  std::optional<landscape::OverlapResult> overlaps;
};

void stage_landscape(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto instances = load_instances(ctx);
  auto reports = load_reports(ctx);
  auto e0 = load_ground_energies(ctx, instances);
  auto chosen = select_by_generation(reports, cfg.landscape_instances);
  std::vector<LandscapeRow> rows(chosen.size());
  parallel_for(chosen.size(), cfg.jobs, [&](std::size_t n) {
    const Instance& inst = instances[chosen[n]];
    const auto& rep = reports[chosen[n]];
    double sps = cfg.sweeps_per_step;
    std::uint64_t steps = std::max<std::uint64_t>(cfg.landscape_steps, static_cast<std::uint64_t>(std::ceil(20 * rep.tau / sps)));
    steps = (steps + cfg.landscape_checkpoints - 1) / cfg.landscape_checkpoints * cfg.landscape_checkpoints;
    engine::RunConfig rc;
    rc.steps = steps;
    rc.sweeps_per_step = cfg.sweeps_per_step;
    rc.replicas = cfg.replicas;
    rc.record_traces = false;
    rc.store_configs = true;
    rc.checkpoints = cfg.landscape_checkpoints;
    rc.trace_stride = static_cast<std::uint32_t>(std::max<std::uint64_t>(1, steps / cfg.trace_samples));
    rc.seed = derive_seed(cfg.seed, StreamTag::round, 0x100 + chosen[n]);
    auto out = engine::run(inst, ctx.ladder, rc);
    Energy ground = e0.at(inst.id());
    LandscapeRow& row = rows[n];
    try {
      row.curve = landscape::energy_curve(out, ground, {rep.tau});
      row.extrap = landscape::extrapolate_zero_T(row.curve);
      row.tc = landscape::detect_tc(row.curve);
      row.ok = true;
    } catch (const Error& e) {
      row.note = e.what();
    }
    std::vector<SpinConfig> configs;
    double burn = 3 * rep.tau;
    for (const auto& s : out.snapshots)
      if (s.slot == 0 && static_cast<double>(s.step) * sps > burn) configs.push_back(s.config);
    auto labels = exact::excitation_gap_states(inst, configs, ground);
    landscape::OverlapOptions oo;
    oo.pairs = cfg.overlap_pairs;
    oo.seed = derive_seed(cfg.seed, StreamTag::pairs, chosen[n]);
    row.overlaps = landscape::overlap_distributions(configs, labels, oo);
  });

  fs::path d = stage_dir(ctx, "landscape");
  std::string summary = table::row({"id", "generation", "tau", "status", "e_extrap", "extrap_error", "tc",
                                    "gs_gs_median", "gs_es_median", "overlap_status", "tau_unit"});
  std::vector<landscape::InstanceOverlap> typical_in;
  std::map<int, std::vector<const landscape::EnergyCurve*>> curves_by_gen;
  for (std::size_t n = 0; n < chosen.size(); ++n) {
    const auto& rep = reports[chosen[n]];
    const auto& row = rows[n];
    std::vector<std::pair<std::string, std::string>> meta{{"id", rep.id}, {"generation", generation_label(rep)}};
    std::string tc = "none";
    if (row.ok) {
      table::write_file(d / (rep.id + ".curve.tsv"), landscape::serialize_curve(row.curve, meta));
      if (!row.tc.empty()) {
        tc.clear();
        for (double t : row.tc) tc += (tc.empty() ? "" : ",") + table::real(t);
      }
      curves_by_gen[*rep.generation].push_back(&row.curve);
    }
    const auto& ov = *row.overlaps;
    table::write_file(d / (rep.id + ".overlap.tsv"), landscape::serialize_overlaps(ov, meta));
    if (ov.sufficient) typical_in.push_back({rep.generation, ov.gs_gs.median, ov.gs_es.median});
    summary += table::row({rep.id, generation_label(rep), table::real(rep.tau), row.ok ? "ok" : "skipped",
                           row.ok ? table::real(row.extrap.e_extrap) : "-", row.ok ? table::real(row.extrap.error) : "-",
                           row.ok ? tc : "-", ov.sufficient ? table::real(ov.gs_gs.median) : "-",
                           ov.sufficient ? table::real(ov.gs_es.median) : "-",
                           ov.sufficient ? "ok" : "insufficient", "sweeps"});
  }
  table::write_file(d / "summary.tsv", summary);

  std::string typ = table::row({"generation", "gs_gs", "gs_es", "instances"});
  for (const auto& [g, t] : landscape::typical_overlap(typical_in))
    typ += table::row({std::to_string(g), table::real(t.gs_gs), table::real(t.gs_es), std::to_string(t.instances)});
  table::write_file(d / "typical_overlap.tsv", typ);

  std::string gen_curves = table::row({"generation", "T", "E_minus_E0", "instances"});
  for (const auto& [g, list] : curves_by_gen)
    for (std::size_t k = 0; k < ctx.ladder.size(); ++k) {
      double sum = 0;
      for (const auto* c : list) sum += c->values[k];
      gen_curves += table::row({std::to_string(g), table::real(ctx.ladder[k]),
                                table::real(sum / static_cast<double>(list.size())), std::to_string(list.size())});
    }
  table::write_file(d / "generation_curves.tsv", gen_curves);
}

void stage_jchaos(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto instances = load_instances(ctx);
  auto reports = load_reports(ctx);
  auto e0 = load_ground_energies(ctx, instances);
  auto chosen = select_by_generation(reports, cfg.jchaos_instances);
  std::vector<chaosj::GsShift> shifts(chosen.size());
  std::vector<std::vector<chaosj::CycleResult>> cycles(chosen.size());
  parallel_for(chosen.size(), cfg.jobs, [&](std::size_t n) {
    const Instance& inst = instances[chosen[n]];
    std::uint64_t base = derive_seed(cfg.seed, StreamTag::perturb, chosen[n]);
    chaosj::PerturbationSpec spec;
    spec.delta_j = cfg.delta_j;
    spec.seed = base;
    shifts[n] = chaosj::gs_shift(inst, spec, cfg.jchaos_trials);
    chaosj::CycleConfig cc;
    cc.cycles = cfg.jchaos_cycles;
    cc.attempts = cfg.jchaos_attempts;
    cc.budget.max_steps = cfg.jchaos_steps;
    cc.budget.sweeps_per_step = cfg.sweeps_per_step;
    cc.budget.replicas = 1;
    cc.seed = derive_seed(base, StreamTag::cycle, 0);
    cycles[n] = chaosj::simulate_cycles(inst, spec, e0.at(inst.id()), ctx.ladder, cc);
  });
  fs::path d = stage_dir(ctx, "jchaos");
  std::string shift = table::row({"id", "generation", "trials", "mean_abs_q", "median_abs_q", "changed_fraction"});
  std::vector<chaosj::CycleResult> all;
  for (std::size_t n = 0; n < chosen.size(); ++n) {
    const auto& rep = reports[chosen[n]];
    const auto& s = shifts[n];
    shift += table::row({rep.id, generation_label(rep), std::to_string(s.abs_q.size()),
                         s.abs_q.empty() ? "-" : table::real(stats::mean(s.abs_q)),
                         s.abs_q.empty() ? "-" : table::real(stats::median(s.abs_q)), table::real(s.changed_fraction)});
    all.insert(all.end(), cycles[n].begin(), cycles[n].end());
  }
  table::write_file(d / "gs_shift.tsv", shift);
  table::write_file(d / "cycles.tsv", chaosj::serialize_cycles(all));
  table::write_file(d / "percentiles.tsv", chaosj::percentile_report(all));
}

void stage_tts(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto instances = load_instances(ctx);
  auto reports = load_reports(ctx);
  auto e0 = load_ground_energies(ctx, instances);
  auto chosen = select_by_generation(reports, cfg.tts_instances);
  std::vector<std::vector<ttslab::AnnealRecord>> per(chosen.size());
  parallel_for(chosen.size(), cfg.jobs, [&](std::size_t n) {
    const Instance& inst = instances[chosen[n]];
    std::uint64_t inst_seed = derive_seed(cfg.seed, StreamTag::attempt, chosen[n]);
    for (std::size_t t = 0; t < cfg.anneal_us.size(); ++t) {
      double t_ann = cfg.anneal_us[t];
      auto x = static_cast<std::uint64_t>(std::max(1.0, std::round(1e6 / t_ann)));
      x = std::min<std::uint64_t>(x, cfg.tts_max_attempts);
      for (std::size_t c = 0; c < cfg.tts_cycles; ++c) {
        std::uint64_t base = derive_seed(inst_seed, StreamTag::cycle, t * 0x10000 + c);
        Rng grng = make_rng(base, StreamTag::gauge, 0);
        Instance programmed = chimera::apply_gauge(inst, chimera::Gauge::random(inst.spin_count(), grng));
        ttslab::AnnealRecord rec{inst.id(), t_ann, c, x, 0, "simulated"};
        for (std::uint64_t a = 0; a < x; ++a) {
          engine::HeuristicConfig hc;
          hc.max_steps = static_cast<std::uint64_t>(std::ceil(t_ann));
          hc.sweeps_per_step = 1;
          hc.replicas = 1;
          hc.seed = derive_seed(base, StreamTag::attempt, a);
          if (engine::run_heuristic(programmed, ctx.ladder, e0.at(inst.id()), hc)) ++rec.y;
        }
        per[n].push_back(rec);
      }
    }
  });
  std::vector<ttslab::AnnealRecord> records;
  for (auto& p : per) records.insert(records.end(), p.begin(), p.end());
  fs::path d = stage_dir(ctx, "tts");
  table::write_file(d / "records.tsv", ttslab::serialize_records(records));
  auto rows = ttslab::tts_report(records);
  table::write_file(d / "report.tsv", ttslab::serialize_tts_report(rows));

  std::map<std::string, int> gen_of;
  for (std::size_t i : chosen) gen_of[reports[i].id] = *reports[i].generation;

  auto minimal = ttslab::minimal_tts(rows);
  std::map<int, std::vector<double>> by_gen;
  for (const auto& [id, v] : minimal) by_gen[gen_of.at(id)].push_back(v);
  std::string typical = table::row({"generation", "typical_tts", "error", "resolved", "instances", "tts_unit"});
  std::vector<double> fx, fy;
  for (const auto& [g, values] : by_gen) {
    auto t = ttslab::group_typical_tts(values, 1000, derive_seed(cfg.seed, StreamTag::round, 0x200 + g));
    typical += table::row({std::to_string(g), t.resolved ? table::real(t.value) : "unresolved",
                           t.resolved ? table::real(t.error) : "-", t.resolved ? "1" : "0",
                           std::to_string(t.instances), "us"});
    fx.push_back(std::pow(10.0, g));
    fy.push_back(t.resolved ? t.value : 0.0);
  }
  table::write_file(d / "typical.tsv", typical);
  std::vector<ttslab::ScalingFit> alpha;
  try {
    alpha.push_back(ttslab::fit_power_law(fx, fy, "alpha"));
  } catch (const Error&) {
  }
  table::write_file(d / "alpha.tsv", ttslab::serialize_fits(alpha, "sweeps", "us"));

  // Windowed success probabilities per generation.
  std::map<std::pair<int, ttslab::TimeWindow>, std::map<std::string, std::vector<ttslab::AnnealRecord>>> windowed;
  for (const auto& r : records)
    if (auto w = ttslab::time_window(r.t_ann_us)) windowed[{gen_of.at(r.instance_id), *w}][r.instance_id].push_back(r);
  std::vector<ttslab::PercentileGroup> groups;
  for (const auto& [key, inst_records] : windowed) {
    ttslab::PercentileGroup g{std::to_string(key.first), key.second, {}};
    for (const auto& [id, recs] : inst_records) g.p.push_back(ttslab::aggregate(recs).p);
    groups.push_back(std::move(g));
  }
  std::vector<ttslab::PercentileRow> prow;
  std::vector<ttslab::ScalingFit> theta;
  for (double q : {0.5, 0.8}) {
    auto part = ttslab::percentile_by_generation(groups, q);
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
    for (const auto& r : part) {
      double centre = (r.window.high ? std::sqrt(60.0 * 200.0) : std::sqrt(20.0 * 60.0)) * std::pow(10.0, r.window.k);
      series[r.generation].first.push_back(centre);
      series[r.generation].second.push_back(r.resolved ? r.value : 0.0);
    }
    prow.insert(prow.end(), part.begin(), part.end());
    for (const auto& [gen, xy] : series) try {
        theta.push_back(ttslab::fit_power_law(xy.first, xy.second, "theta_g" + gen + "_q" + table::real(q)));
      } catch (const Error&) {
      }
  }
  table::write_file(d / "percentiles.tsv", ttslab::serialize_percentiles(prow));
  table::write_file(d / "theta.tsv", ttslab::serialize_fits(theta, "us", "probability"));
}

using StageFn = void (*)(const Context&);
const std::map<std::string, StageFn>& stage_functions() {
  static const std::map<std::string, StageFn> fns{
      {"instances", stage_instances}, {"exact", stage_exact},         {"hardness", stage_hardness},
      {"hist", stage_hist},           {"landscape", stage_landscape}, {"jchaos", stage_jchaos},
      {"tts", stage_tts}};
  return fns;
}

std::vector<std::pair<std::string, std::string>> read_manifest(const fs::path& file) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!fs::exists(file)) return out;
  auto tsv = table::read_tsv(file);
  std::size_t cs = tsv.column("stage"), ch = tsv.column("sha256");
  for (const auto& row : tsv.rows) out.emplace_back(row[cs], row[ch]);
  return out;
}

void write_manifest(const fs::path& file, const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out = table::row({"stage", "sha256"});
  for (const auto& [s, h] : entries) out += table::row({s, h});
  table::write_file(file, out);
}

}  // namespace

CampaignStatus run_campaign(const CampaignConfig& config, const fs::path& dir) {
  config.validate();
  fs::create_directories(dir);
  fs::path config_file = dir / "config.txt";
  std::string identity = config.serialize();
  if (fs::exists(config_file)) {
    if (table::read_file(config_file) != identity)
      throw Error(config_file.string() + ": campaign directory holds a different configuration");
  } else {
    table::write_file(config_file, identity);
  }
  Context ctx{config, dir,
              config.ladder.empty() ? engine::default_ladder() : engine::TemperatureLadder(config.ladder),
              chimera::parse_graph_spec(config.graph, config.dead)};

  fs::path manifest_file = dir / "manifest.tsv";
  auto manifest = read_manifest(manifest_file);
  CampaignStatus status;
  std::vector<std::pair<std::string, std::string>> valid;
  bool intact = true;
  for (const auto& stage : stage_names()) {
    fs::path sd = dir / stage;
    std::size_t pos = valid.size();
    if (intact && pos < manifest.size() && manifest[pos].first == stage && fs::exists(sd) &&
        stage_hash(sd) == manifest[pos].second) {
      valid.push_back(manifest[pos]);
      status.skipped.push_back(stage);
    } else {
      intact = false;
      write_manifest(manifest_file, valid);
      fs::remove_all(sd);
      fs::create_directories(sd);
      try {
        stage_functions().at(stage)(ctx);
      } catch (const std::exception& e) {
        table::write_file(dir / "failed.txt", stage + "\t" + e.what() + "\n");
        throw;
      }
      valid.emplace_back(stage, stage_hash(sd));
      write_manifest(manifest_file, valid);
      status.completed.push_back(stage);
    }
    if (stage == config.stop_after) break;
  }
  fs::remove(dir / "failed.txt");
  return status;
}

}  // namespace sglab::pipeline
