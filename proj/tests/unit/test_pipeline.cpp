#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "sglab/error.hpp"
#include "sglab/pipeline.hpp"
#include "sglab/table.hpp"

using namespace sglab;
using namespace sglab::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sglab_pipeline_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = table::read_file(e.path());
  return out;
}

const char* kSmall = R"(# tiny campaign
id = tiny
graph = 1x1x4
count = 6
seed = 3
replicas = 2
rounds = 4000, 40000
caps = 3
trace_samples = 4000
hardness_lanes = 4
landscape_instances = 2
landscape_steps = 2000
landscape_checkpoints = 20
jchaos_instances = 2
jchaos_trials = 3
jchaos_cycles = 3
jchaos_attempts = 2
jchaos_steps = 50
tts_instances = 2
anneal_us = 20, 60, 200
tts_cycles = 2
tts_max_attempts = 3
)";

}  // namespace

TEST_CASE("config parsing") {
  auto c = CampaignConfig::parse(kSmall);
  CHECK(c.id == "tiny");
  CHECK(c.count == 6);
  CHECK(c.rounds == std::vector<std::uint64_t>{4000, 40000});
  CHECK(c.caps == std::vector<std::size_t>{3});
  CHECK(c.anneal_us == std::vector<double>{20, 60, 200});
  CHECK(CampaignConfig::parse(c.serialize()).serialize() == c.serialize());
  auto d = desk_defaults();
  CHECK(d.graph == "4x4x4");
  CHECK(d.rounds == std::vector<std::uint64_t>{100000, 1000000, 10000000});
  CHECK(d.caps == std::vector<std::size_t>{64, 16});
  try {
    CampaignConfig::parse("count = 3\nbogus = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(CampaignConfig::parse("count = x\n"), ParseError);
  CHECK_THROWS_AS(CampaignConfig::parse("no equals sign\n"), ParseError);
  CHECK_THROWS_AS(CampaignConfig::parse("graph = 2x2\n"), ParseError);
  CHECK_THROWS_AS(CampaignConfig::parse("stop_after = nowhere\n"), ParseError);
}

TEST_CASE("tau histogram") {
  std::vector<double> one{500};
  auto h1 = tau_histogram(one);
  REQUIRE(h1.counts.size() == 1);
  CHECK(h1.counts[0] == 1);
  CHECK(h1.density[0] * (h1.edges[1] - h1.edges[0]) == doctest::Approx(1));
  CHECK(h1.edges[0] <= 500);
  CHECK(h1.edges[1] >= 500);

  // Inverse-transform sample of a density proportional to 1/tau on [1e3, 1e6].
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(3, 6);
  std::vector<double> taus;
  for (int i = 0; i < 200000; ++i) taus.push_back(std::pow(10.0, u(rng)));
  auto h = tau_histogram(taus, 0.25);
  double total = 0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) total += h.density[b] * (h.edges[b + 1] - h.edges[b]);
  CHECK(total == doctest::Approx(1));
  CHECK(h.edges.front() <= *std::min_element(taus.begin(), taus.end()));
  CHECK(h.edges.back() >= *std::max_element(taus.begin(), taus.end()));
  REQUIRE(h.tail_slope);
  CHECK(*h.tail_slope == doctest::Approx(-1).epsilon(0.05));
  CHECK(h.span_decades == doctest::Approx(3).epsilon(0.01));

  std::vector<mixing::HardnessReport> reps(3);
  reps[0].resolved = true;
  reps[0].tau = 100;
  reps[1].resolved = false;
  reps[1].tau = 1e6;
  reps[2].resolved = true;
  reps[2].tau = 1000;
  auto hr = tau_histogram(reps);
  CHECK(hr.samples == 2);
  CHECK(hr.excluded == 1);
  CHECK_THROWS_AS(tau_histogram(std::vector<double>{}), Error);
}

TEST_CASE("bounded worker pool") {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
}

TEST_CASE("empty instance set completes with empty reports") {
  auto dir = scratch("empty");
  auto c = CampaignConfig::parse(kSmall);
  c.count = 0;
  auto st = run_campaign(c, dir);
  CHECK(st.completed == stage_names());
  CHECK(fs::exists(dir / "hardness" / "reports.tsv"));
  CHECK(fs::exists(dir / "tts" / "records.tsv"));
  fs::remove_all(dir);
}

TEST_CASE("resumed campaign equals an uninterrupted one") {
  auto a = scratch("a"), b = scratch("b");
  auto c = CampaignConfig::parse(kSmall);
  auto full = run_campaign(c, a);
  CHECK(full.completed == stage_names());

  auto partial = c;
  partial.stop_after = "hardness";
  partial.jobs = 2;
  auto first = run_campaign(partial, b);
  CHECK(first.completed == std::vector<std::string>{"instances", "exact", "hardness"});
  auto second = run_campaign(c, b);
  CHECK(second.skipped == std::vector<std::string>{"instances", "exact", "hardness"});
  CHECK(snapshot(a) == snapshot(b));

  // Referential integrity: every report row names an instance file.
  auto reports = table::read_tsv(a / "hardness" / "reports.tsv");
  for (const auto& row : reports.rows) CHECK(fs::exists(a / "instances" / (row[0] + ".txt")));
  CHECK(fs::exists(a / "hist" / "tau_hist.tsv"));

  // A tampered stage is recomputed together with everything after it.
  table::write_file(b / "exact" / "ground.tsv", "garbage\n");
  auto third = run_campaign(c, b);
  CHECK(third.skipped == std::vector<std::string>{"instances"});
  CHECK(snapshot(a) == snapshot(b));

  auto other = c;
  other.seed = 4;
  CHECK_THROWS_AS(run_campaign(other, b), Error);
  fs::remove_all(a);
  fs::remove_all(b);
}
