#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sglab/chimera.hpp"
#include "sglab/error.hpp"
#include "sglab/exact.hpp"
#include "sglab/landscape.hpp"

using namespace sglab;
using namespace sglab::landscape;
using chimera::SpinConfig;

namespace {

EnergyCurve planted_curve(const std::vector<double>& temps, double e0, double c) {
  EnergyCurve curve;
  curve.temperatures = temps;
  curve.e0 = e0;
  for (double t : temps) {
    curve.values.push_back(c * std::exp(-2.0 / t));
    curve.errors.push_back(0.0);
  }
  return curve;
}

}  // namespace

TEST_CASE("extrapolation is exact for a pure gap form") {
  auto temps = engine::default_ladder().temperatures();
  for (double c : {1.0, 37.5, 1e4}) {
    auto r = extrapolate_zero_T(planted_curve(temps, -200, c));
    CHECK(std::abs(r.error) < 1e-9 * c);
    CHECK(r.e_extrap == doctest::Approx(-200));
    CHECK(r.t_low == doctest::Approx(0.2));
    CHECK(r.t_high == doctest::Approx(0.3).epsilon(0.05));
  }
  auto shifted = planted_curve(temps, 0, 10);
  for (auto& v : shifted.values) v += 0.75;
  CHECK(extrapolate_zero_T(shifted).error == doctest::Approx(0.75));
}

TEST_CASE("energy curve from series") {
  std::vector<double> temps{0.5, 1.0};
  std::vector<std::vector<double>> series{{-9, -10, -10, -10, -10}, {-5, -6, -4, -6, -4}};
  CurveOptions opt;
  opt.tau = 0.5;
  opt.burn_in_taus = 2;  // drops the first sample (t = 1)
  opt.blocks = 4;
  auto c = energy_curve(temps, series, 1, -10, opt);
  CHECK(c.burn_in_samples == 1);
  CHECK(c.used_samples == 4);
  CHECK(c.values[0] == doctest::Approx(0));
  CHECK(c.values[1] == doctest::Approx(5));
  CHECK(c.errors[0] == doctest::Approx(0));
  CHECK(c.errors[1] > 0);
  opt.tau = 10;
  CHECK_THROWS_AS(energy_curve(temps, series, 1, -10, opt), Error);
  opt.require_equilibrated = false;
  opt.burn_in_taus = 0;
  CHECK_FALSE(energy_curve(temps, series, 1, -10, opt).equilibrated);
}

TEST_CASE("temperature-chaos drop detection") {
  EnergyCurve c;
  for (int i = 0; i < 20; ++i) {
    c.temperatures.push_back(0.1 * (i + 1));
    c.values.push_back(0.05 * i + (i >= 8 ? 4.0 : 0.0));
    c.errors.push_back(0.01);
  }
  auto tc = detect_tc(c);
  REQUIRE(tc.size() == 1);
  CHECK(tc[0] == doctest::Approx(0.85));
  for (auto& v : c.values) v = 0.05 * (&v - c.values.data());
  CHECK(detect_tc(c).empty());
}

TEST_CASE("overlap algebra") {
  std::mt19937_64 rng(1);
  auto a = chimera::random_config(512, rng);
  CHECK(overlap(a, a) == 1.0);
  CHECK(overlap(a, a.flipped()) == -1.0);
  SpinConfig b(8), d(8);
  d.flip(2);
  d.flip(5);
  CHECK(overlap(b, d) == 0.5);
  CHECK_THROWS_AS(overlap(SpinConfig(3), SpinConfig(4)), Error);
}

TEST_CASE("overlap distributions, exhaustive and sampled") {
  auto inst = chimera::generate_instance(chimera::build_chimera(1, 2, 4), 3);
  auto gs = exact::brute_force(inst);
  std::mt19937_64 rng(2);
  std::vector<SpinConfig> configs{gs.witness, gs.witness.flipped(), gs.witness};
  for (std::size_t i = 0; i < inst.spin_count(); ++i) {
    auto s = gs.witness;
    s.flip(i);
    configs.push_back(s);
  }
  for (int i = 0; i < 200; ++i) configs.push_back(chimera::random_config(inst.spin_count(), rng));
  auto labels = exact::excitation_gap_states(inst, configs, gs.e0);
  std::size_t n_gs = 0, n_es = 0;
  for (auto l : labels) {
    n_gs += l == exact::StateLabel::ground;
    n_es += l == exact::StateLabel::excited;
  }
  REQUIRE(n_es > 0);
  auto r = overlap_distributions(configs, labels);
  REQUIRE(r.sufficient);
  CHECK(r.gs_gs.samples == n_gs * (n_gs - 1) / 2);
  CHECK(r.gs_es.samples == n_gs * n_es);
  double total = 0;
  for (double m : r.gs_gs.mass) total += m;
  CHECK(total == doctest::Approx(1));
  CHECK(r.gs_gs.mass.size() == 50);

  OverlapOptions few;
  few.pairs = 5;
  auto s = overlap_distributions(configs, labels, few);
  CHECK(s.gs_gs.samples == std::min<std::size_t>(5, n_gs * (n_gs - 1) / 2));
  CHECK(s.gs_es.samples == 5);

  std::vector<SpinConfig> lonely{gs.witness};
  std::vector<exact::StateLabel> lonely_l{exact::StateLabel::ground};
  auto insufficient = overlap_distributions(lonely, lonely_l);
  CHECK_FALSE(insufficient.sufficient);
  CHECK(insufficient.reason.find("insufficient") != std::string::npos);
}

TEST_CASE("typical overlap per generation") {
  std::vector<InstanceOverlap> in{{3, 0.9, 0.5}, {3, 0.7, 0.3}, {3, 0.8, 0.4}, {4, 0.2, 0.1}, {std::nullopt, 1, 1}};
  auto t = typical_overlap(in);
  REQUIRE(t.size() == 2);
  CHECK(t[3].gs_gs == doctest::Approx(0.8));
  CHECK(t[3].gs_es == doctest::Approx(0.4));
  CHECK(t[3].instances == 3);
  CHECK(t[4].gs_gs == doctest::Approx(0.2));
}

TEST_CASE("curve table") {
  auto c = planted_curve({0.2, 0.3}, -4, 1);
  auto text = serialize_curve(c, {{"id", "x"}});
  CHECK(text.rfind("# id x\n", 0) == 0);
  CHECK(text.find("T\tE_minus_E0\terror") != std::string::npos);
}
