// sglab: command-line front end for instance generation, PT runs, mixing
// times, exact ground states, landscape, J-chaos, TTS analytics and campaigns.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "sglab/chaosj.hpp"
#include "sglab/chimera.hpp"
#include "sglab/engine.hpp"
#include "sglab/error.hpp"
#include "sglab/exact.hpp"
#include "sglab/landscape.hpp"
#include "sglab/mixing.hpp"
#include "sglab/pipeline.hpp"
#include "sglab/rng.hpp"
#include "sglab/table.hpp"
#include "sglab/trace_io.hpp"
#include "sglab/ttslab.hpp"

namespace fs = std::filesystem;
using namespace sglab;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string format = "tsv";
  unsigned jobs = 1;
  std::string out;  // empty: stdout
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    table::write_file(c.out, text);
  }
}

engine::TemperatureLadder parse_ladder(const std::string& spec) {
  if (spec == "default") return engine::default_ladder();
  auto parts = table::split(spec, ':');
  if (parts.size() == 3)
    return engine::TemperatureLadder::evenly_spaced(table::parse_real(parts[0], 0), table::parse_real(parts[1], 0),
                                                    table::parse_uint(parts[2], 0));
  std::vector<double> t;
  for (auto& p : table::split(spec, ',')) t.push_back(table::parse_real(p, 0));
  return engine::TemperatureLadder(std::move(t));
}

std::set<chimera::VertexId> parse_dead(const std::string& list) {
  std::set<chimera::VertexId> dead;
  if (list.empty()) return dead;
  for (auto& p : table::split(list, ',')) dead.insert(static_cast<chimera::VertexId>(table::parse_uint(p, 0)));
  return dead;
}

Energy ground_energy(const chimera::Instance& inst, const std::string& e0_text) {
  if (!e0_text.empty()) {
    auto e = Fixed::parse(e0_text);
    if (!e) throw Error("--e0: not a number: " + e0_text);
    return *e;
  }
  return chaosj::default_solver(inst).e0;
}

void add_common(CLI::App* app, Common& c, bool seeded) {
  if (seeded) app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--format", c.format, "Output format (tsv)")->check(CLI::IsMember({"tsv"}))->capture_default_str();
  app->add_option("-o,--out", c.out, "Write the table to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-glass benchmark toolkit: Chimera instances, parallel tempering, mixing times and analytics"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Common c;

  // gen
  std::string graph = "2x2x4", dead;
  std::size_t count = 1;
  std::string gen_dir = ".";
  auto* gen = app.add_subcommand("gen", "Generate random +-1 Chimera instances");
  gen->add_option("--graph", graph, "Graph as RxCxK")->capture_default_str();
  gen->add_option("--dead", dead, "Comma-separated dead vertex ids");
  gen->add_option("--count", count, "Number of instances")->capture_default_str();
  gen->add_option("--dir", gen_dir, "Output directory for instance files")->capture_default_str();
  add_common(gen, c, true);

  // pt
  std::vector<std::string> inputs;
  std::string ladder_spec = "default", dump_dir;
  engine::RunConfig rc;
  std::string path_name = "auto";
  auto* pt = app.add_subcommand("pt", "Run parallel tempering and write trace dumps");
  pt->add_option("--in", inputs, "Instance files")->required()->check(CLI::ExistingFile);
  pt->add_option("--steps", rc.steps, "Elementary steps")->required();
  pt->add_option("--sweeps-per-step", rc.sweeps_per_step, "Sweeps per elementary step")->capture_default_str();
  pt->add_option("--replicas", rc.replicas, "Independent copy sets")->capture_default_str();
  pt->add_option("--trace-stride", rc.trace_stride, "Steps between recorded samples")->capture_default_str();
  pt->add_option("--checkpoints", rc.checkpoints, "Configuration snapshots per run")->capture_default_str();
  pt->add_option("--lanes", rc.lanes_per_word, "Instances per packed word (1..256)")->capture_default_str();
  pt->add_option("--path", path_name, "Engine path")->check(CLI::IsMember({"auto", "scalar", "packed"}))->capture_default_str();
  pt->add_option("--ladder", ladder_spec, "default, lo:hi:count or a comma list")->capture_default_str();
  pt->add_option("--dump-dir", dump_dir, "Directory for <id>.trace dumps")->required();
  add_common(pt, c, true);

  // tau
  std::size_t groups = 16;
  std::string csv_curve;
  auto* tau = app.add_subcommand("tau", "Mixing times from trace dumps");
  tau->add_option("--in", inputs, "Trace dumps")->required()->check(CLI::ExistingFile);
  tau->add_option("--groups", groups, "Jackknife groups")->capture_default_str();
  tau->add_option("--curve", csv_curve, "Also write C(s) of the first dump to this file");
  add_common(tau, c, false);

  // exact
  std::string method = "auto";
  auto* ex = app.add_subcommand("exact", "Exact ground-state energy and degeneracy");
  ex->add_option("--in", inputs, "Instance files")->required()->check(CLI::ExistingFile);
  ex->add_option("--method", method, "auto, brute, bipartite or dp")
      ->check(CLI::IsMember({"auto", "brute", "bipartite", "dp"}))
      ->capture_default_str();
  std::string witness_dir;
  ex->add_option("--witness-dir", witness_dir, "Write <id>.gs witness documents here");
  add_common(ex, c, false);

  // landscape
  std::string instance_file, dump_file, e0_text;
  double tau_value = 0, delta = 2.0;
  bool allow_short = false;
  auto* land = app.add_subcommand("landscape", "Thermal energy curve, T = 0 extrapolation and chaos detection");
  land->add_option("--in", dump_file, "Trace dump with energies")->required()->check(CLI::ExistingFile);
  land->add_option("--instance", instance_file, "Instance file")->required()->check(CLI::ExistingFile);
  land->add_option("--e0", e0_text, "Ground energy (computed exactly when omitted)");
  land->add_option("--tau", tau_value, "Mixing time in sweeps")->capture_default_str();
  land->add_option("--delta", delta, "Gap used by the extrapolation")->capture_default_str();
  land->add_flag("--allow-short", allow_short, "Accept runs shorter than 10 tau");
  add_common(land, c, false);

  // overlap
  std::size_t pairs = 100000;
  double bin_width = 0.02;
  auto* ov = app.add_subcommand("overlap", "GS-GS and GS-ES overlap distributions from snapshots");
  ov->add_option("--in", dump_file, "Trace dump with snapshots")->required()->check(CLI::ExistingFile);
  ov->add_option("--instance", instance_file, "Instance file")->required()->check(CLI::ExistingFile);
  ov->add_option("--e0", e0_text, "Ground energy (computed exactly when omitted)");
  ov->add_option("--tau", tau_value, "Snapshots within 3 tau sweeps of the start are skipped")->capture_default_str();
  ov->add_option("--pairs", pairs, "Pair budget")->capture_default_str();
  ov->add_option("--bin-width", bin_width, "Histogram bin width")->capture_default_str();
  add_common(ov, c, true);

  // jchaos
  std::string jmode = "shift", cycles_in;
  double delta_j = 0.05;
  std::size_t trials = 20, n_cycles = 10;
  std::uint64_t attempts = 10, budget_steps = 1000;
  auto* jc = app.add_subcommand("jchaos", "Coupling-noise ground-state shifts, programming cycles and percentiles");
  jc->add_option("--mode", jmode, "shift, cycles or percentile")
      ->check(CLI::IsMember({"shift", "cycles", "percentile"}))
      ->capture_default_str();
  jc->add_option("--instance", instance_file, "Instance file")->check(CLI::ExistingFile);
  jc->add_option("--in", cycles_in, "Cycle table (percentile mode)")->check(CLI::ExistingFile);
  jc->add_option("--delta-j", delta_j, "Noise standard deviation")->capture_default_str();
  jc->add_option("--trials", trials, "Perturbations (shift mode)")->capture_default_str();
  jc->add_option("--cycles", n_cycles, "Programming cycles")->capture_default_str();
  jc->add_option("--attempts", attempts, "Solver attempts per cycle")->capture_default_str();
  jc->add_option("--budget-steps", budget_steps, "PT steps per attempt")->capture_default_str();
  jc->add_option("--ladder", ladder_spec, "default, lo:hi:count or a comma list")->capture_default_str();
  jc->add_option("--e0", e0_text, "Ground energy (computed exactly when omitted)");
  add_common(jc, c, true);

  // tts
  std::string records_in, reports_in, tmode = "report";
  auto* tt = app.add_subcommand("tts", "Success probabilities and time to solution from anneal records");
  tt->add_option("--in", records_in, "Anneal record table")->required()->check(CLI::ExistingFile);
  tt->add_option("--mode", tmode, "report, typical or windows")
      ->check(CLI::IsMember({"report", "typical", "windows"}))
      ->capture_default_str();
  tt->add_option("--reports", reports_in, "Hardness reports assigning generations (typical, windows)")
      ->check(CLI::ExistingFile);
  double quantile = 0.5;
  tt->add_option("--quantile", quantile, "Percentile for windows mode")->capture_default_str();
  add_common(tt, c, true);

  // fit
  std::string fmode = "alpha", fit_in, xcol = "x", ycol = "y";
  auto* fit = app.add_subcommand("fit", "Power-law fit on log-log axes");
  fit->add_option("--mode", fmode, "alpha or theta")->check(CLI::IsMember({"alpha", "theta"}))->capture_default_str();
  fit->add_option("--in", fit_in, "Table with x and y columns")->required()->check(CLI::ExistingFile);
  fit->add_option("--x", xcol, "x column")->capture_default_str();
  fit->add_option("--y", ycol, "y column")->capture_default_str();
  add_common(fit, c, false);

  // campaign
  std::string config_file, campaign_dir, stop_after;
  auto* camp = app.add_subcommand("campaign", "Run or resume a campaign");
  camp->add_option("--config", config_file, "Campaign config (key = value)")->check(CLI::ExistingFile);
  camp->add_option("--dir", campaign_dir, "Campaign directory (default $SGLAB_CAMPAIGN_DIR)");
  camp->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  camp->add_option("--stop-after", stop_after, "Last stage to run");
  camp->add_option("--seed", c.seed, "Override the config seed");

  // hist
  double hist_width = 0.25;
  auto* hist = app.add_subcommand("hist", "Log-binned tau histogram with tail slope");
  hist->add_option("--in", reports_in, "Hardness reports")->required()->check(CLI::ExistingFile);
  hist->add_option("--bin-width", hist_width, "Bin width in decades")->capture_default_str();
  add_common(hist, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      auto g = chimera::parse_graph_spec(graph, parse_dead(dead));
      fs::create_directories(gen_dir);
      std::string index = table::row({"id", "seed", "file"});
      for (std::size_t i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "i%05zu", i);
        std::uint64_t s = derive_seed(c.seed, StreamTag::instance, i);
        auto file = (fs::path(gen_dir) / (std::string(id) + ".txt")).string();
        chimera::write_instance(file, chimera::generate_instance(g, s, id));
        index += table::row({id, std::to_string(s), file});
      }
      emit(c, index);
    } else if (*pt) {
      rc.seed = c.seed;
      rc.store_configs = rc.checkpoints > 0;
      rc.path = path_name == "scalar" ? engine::EnginePath::scalar
                : path_name == "packed" ? engine::EnginePath::packed
                                        : engine::EnginePath::automatic;
      std::vector<chimera::Instance> insts;
      for (auto& f : inputs) insts.push_back(chimera::read_instance(f));
      auto ladder = parse_ladder(ladder_spec);
      auto outs = engine::run(insts, ladder, rc);
      fs::create_directories(dump_dir);
      std::string summary = table::row({"id", "min_energy", "steps", "samples", "dump"});
      for (auto& o : outs) {
        auto file = (fs::path(dump_dir) / (o.instance_id + ".trace")).string();
        write_trace_dump(file, o);
        summary += table::row({o.instance_id, o.min_energy.to_string(), std::to_string(o.steps),
                               std::to_string(o.samples()), file});
      }
      emit(c, summary);
    } else if (*tau) {
      std::vector<mixing::HardnessReport> reports;
      for (std::size_t n = 0; n < inputs.size(); ++n) {
        auto run = read_trace_dump(inputs[n]);
        reports.push_back(mixing::measure_hardness(run.instance_id, run.traces, groups));
        reports.back().rounds = 1;
        if (n == 0 && !csv_curve.empty()) {
          auto curve = mixing::correlation(run.traces, {}, groups);
          std::string out = table::row({"lag_sweeps", "C", "error", "count"});
          for (std::size_t k = 0; k < curve.lags.size(); ++k)
            out += table::row({std::to_string(curve.lags[k] * curve.sweeps_per_sample), table::real(curve.values[k]),
                               table::real(curve.errors[k]), std::to_string(curve.counts[k])});
          table::write_file(csv_curve, out);
        }
      }
      emit(c, mixing::serialize_reports(reports));
    } else if (*ex) {
      std::vector<std::pair<std::string, exact::ExactResult>> rows;
      for (auto& f : inputs) {
        auto inst = chimera::read_instance(f);
        exact::ExactResult r = method == "brute"       ? exact::brute_force(inst, exact::BruteForceMethod::full)
                               : method == "bipartite" ? exact::brute_force(inst, exact::BruteForceMethod::bipartite)
                               : method == "dp"        ? exact::column_dp(inst)
                                                       : chaosj::default_solver(inst);
        if (!witness_dir.empty()) {
          fs::create_directories(witness_dir);
          table::write_file(fs::path(witness_dir) / (inst.id() + ".gs"), chimera::serialize_document(inst, r.witness));
        }
        rows.emplace_back(inst.id(), std::move(r));
      }
      emit(c, exact::serialize_results(rows));
    } else if (*land) {
      auto inst = chimera::read_instance(instance_file);
      auto run = read_trace_dump(dump_file);
      landscape::CurveOptions opt;
      opt.tau = tau_value;
      opt.require_equilibrated = !allow_short;
      auto curve = landscape::energy_curve(run, ground_energy(inst, e0_text), opt);
      auto ext = landscape::extrapolate_zero_T(curve, delta);
      auto tc = landscape::detect_tc(curve);
      std::string tcs;
      for (double t : tc) tcs += (tcs.empty() ? "" : ",") + table::real(t);
      emit(c, landscape::serialize_curve(curve, {{"id", inst.id()},
                                                 {"e_extrap", table::real(ext.e_extrap)},
                                                 {"extrap_error", table::real(ext.error)},
                                                 {"tc", tcs.empty() ? "none" : tcs},
                                                 {"tau_unit", "sweeps"}}));
    } else if (*ov) {
      auto inst = chimera::read_instance(instance_file);
      auto run = read_trace_dump(dump_file);
      Energy e0 = ground_energy(inst, e0_text);
      std::vector<chimera::SpinConfig> configs;
      for (auto& s : run.snapshots)
        if (s.slot == 0 && static_cast<double>(s.step * run.sweeps_per_step) > 3 * tau_value)
          configs.push_back(s.config);
      auto labels = exact::excitation_gap_states(inst, configs, e0);
      landscape::OverlapOptions oo{pairs, bin_width, c.seed};
      emit(c, landscape::serialize_overlaps(landscape::overlap_distributions(configs, labels, oo),
                                            {{"id", inst.id()}, {"snapshots", std::to_string(configs.size())}}));
    } else if (*jc) {
      if (jmode == "percentile") {
        if (cycles_in.empty()) throw Error("--in is required in percentile mode");
        std::vector<chaosj::CycleResult> cyc;
        try {
          cyc = chaosj::parse_cycles(table::read_file(cycles_in));
        } catch (const ParseError& e) {
          throw ParseError(e.line(), cycles_in + ": " + e.detail());
        }
        emit(c, chaosj::percentile_report(cyc));
      } else {
        if (instance_file.empty()) throw Error("--instance is required in " + jmode + " mode");
        auto inst = chimera::read_instance(instance_file);
        chaosj::PerturbationSpec spec;
        spec.delta_j = delta_j;
        spec.seed = c.seed;
        if (jmode == "shift") {
          auto s = chaosj::gs_shift(inst, spec, trials);
          std::string out = table::row({"trial", "abs_q"});
          for (std::size_t t = 0; t < s.abs_q.size(); ++t) out += table::row({std::to_string(t), table::real(s.abs_q[t])});
          out += "# changed_fraction " + table::real(s.changed_fraction) + "\n";
          emit(c, out);
        } else {
          chaosj::CycleConfig cc;
          cc.cycles = n_cycles;
          cc.attempts = attempts;
          cc.budget.max_steps = budget_steps;
          cc.seed = c.seed;
          emit(c, chaosj::serialize_cycles(chaosj::simulate_cycles(inst, spec, ground_energy(inst, e0_text),
                                                                   parse_ladder(ladder_spec), cc)));
        }
      }
    } else if (*tt) {
      std::vector<ttslab::AnnealRecord> records;
      try {
        records = ttslab::parse_records(table::read_file(records_in));
      } catch (const ParseError& e) {
        throw ParseError(e.line(), records_in + ": " + e.detail());
      }
      auto rows = ttslab::tts_report(records);
      if (tmode == "report") {
        emit(c, ttslab::serialize_tts_report(rows));
      } else {
        std::map<std::string, std::string> gen_of;
        if (!reports_in.empty()) {
          std::vector<mixing::HardnessReport> reps;
          try {
            reps = mixing::parse_reports(table::read_file(reports_in));
          } catch (const ParseError& e) {
            throw ParseError(e.line(), reports_in + ": " + e.detail());
          }
          for (auto& r : reps)
            gen_of[r.id] = !r.resolved ? "unresolved" : r.generation ? std::to_string(*r.generation) : "between";
        }
        auto generation = [&](const std::string& id) {
          auto it = gen_of.find(id);
          return it == gen_of.end() ? std::string("all") : it->second;
        };
        if (tmode == "typical") {
          std::map<std::string, std::vector<double>> by_gen;
          for (auto& [id, v] : ttslab::minimal_tts(rows)) by_gen[generation(id)].push_back(v);
          std::string out = table::row({"generation", "typical_tts", "error", "resolved", "instances", "tts_unit"});
          for (auto& [g, v] : by_gen) {
            auto t = ttslab::group_typical_tts(v, 1000, c.seed);
            out += table::row({g, t.resolved ? table::real(t.value) : "unresolved",
                               t.resolved ? table::real(t.error) : "-", t.resolved ? "1" : "0",
                               std::to_string(t.instances), "us"});
          }
          emit(c, out);
        } else {
          std::map<std::pair<std::string, ttslab::TimeWindow>, std::map<std::string, std::vector<ttslab::AnnealRecord>>> w;
          std::size_t rejected = 0;
          for (auto& r : records) {
            if (auto win = ttslab::time_window(r.t_ann_us)) w[{generation(r.instance_id), *win}][r.instance_id].push_back(r);
            else ++rejected;
          }
          if (rejected) std::fprintf(stderr, "sglab: warning: %zu records outside [20 us, 20 ms] ignored\n", rejected);
          std::vector<ttslab::PercentileGroup> groups_;
          for (auto& [key, per] : w) {
            ttslab::PercentileGroup g{key.first, key.second, {}};
            for (auto& [id, recs] : per) g.p.push_back(ttslab::aggregate(recs).p);
            groups_.push_back(std::move(g));
          }
          emit(c, ttslab::serialize_percentiles(ttslab::percentile_by_generation(groups_, quantile)));
        }
      }
    } else if (*fit) {
      auto tsv = table::read_tsv(fit_in);
      std::size_t cx = tsv.column(xcol), cy = tsv.column(ycol);
      std::vector<double> x, y;
      for (std::size_t n = 0; n < tsv.rows.size(); ++n) {
        auto line = tsv.row_lines[n];
        x.push_back(table::parse_real(tsv.rows[n][cx], line));
        const auto& cell = tsv.rows[n][cy];
        y.push_back(cell == "infinite" || cell == "unresolved" ? 0.0 : table::parse_real(cell, line));
      }
      std::vector<ttslab::ScalingFit> fits{ttslab::fit_power_law(x, y, fmode)};
      emit(c, fmode == "alpha" ? ttslab::serialize_fits(fits, "sweeps", "us")
                               : ttslab::serialize_fits(fits, "us", "probability"));
    } else if (*camp) {
      if (campaign_dir.empty())
        if (const char* env = std::getenv("SGLAB_CAMPAIGN_DIR")) campaign_dir = env;
      if (campaign_dir.empty()) throw Error("no campaign directory: pass --dir or set SGLAB_CAMPAIGN_DIR");
      auto cfg = config_file.empty() ? pipeline::desk_defaults() : pipeline::CampaignConfig::read(config_file);
      if (camp->count("--seed")) cfg.seed = c.seed;
      cfg.jobs = c.jobs;
      if (!stop_after.empty()) cfg.stop_after = stop_after;
      auto status = pipeline::run_campaign(cfg, campaign_dir);
      std::string out = table::row({"stage", "status"});
      for (auto& s : status.skipped) out += table::row({s, "resumed"});
      for (auto& s : status.completed) out += table::row({s, "done"});
      std::fwrite(out.data(), 1, out.size(), stdout);
    } else if (*hist) {
      std::vector<mixing::HardnessReport> reps;
      try {
        reps = mixing::parse_reports(table::read_file(reports_in));
      } catch (const ParseError& e) {
        throw ParseError(e.line(), reports_in + ": " + e.detail());
      }
      emit(c, pipeline::serialize_histogram(pipeline::tau_histogram(reps, hist_width)));
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::fprintf(stderr, "sglab: error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
