#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sglab/error.hpp"
#include "sglab/mixing.hpp"

using namespace sglab;
using namespace sglab::mixing;

namespace {

WalkTrace make_trace(std::uint32_t copy, std::uint32_t n_temps, std::vector<std::uint8_t> idx, std::uint64_t sps = 1) {
  WalkTrace t;
  t.copy = copy;
  t.n_temps = n_temps;
  t.sweeps_per_sample = sps;
  t.indices = std::move(idx);
  return t;
}

// Lazy reflecting walk on 1..n whose slowest mode decays as exp(-1/tau) per
// sample; needs tau >= 1 / -log(cos(pi / n)).
std::vector<WalkTrace> lazy_walk(std::size_t copies, std::size_t length, double tau, std::uint64_t seed, int n = 30) {
  double p = (1 - std::exp(-1 / tau)) / (1 - std::cos(M_PI / n));
  std::mt19937_64 rng(seed);
  REQUIRE(p <= 1);
  std::bernoulli_distribution move(p);
  std::vector<WalkTrace> out;
  for (std::size_t c = 0; c < copies; ++c) {
    int x = 1 + static_cast<int>(rng() % n);
    std::vector<std::uint8_t> idx;
    for (std::size_t t = 0; t < length; ++t) {
      if (move(rng)) {
        int y = x + ((rng() >> 63) ? 1 : -1);
        if (y >= 1 && y <= n) x = y;
      }
      idx.push_back(static_cast<std::uint8_t>(x));
    }
    out.push_back(make_trace(static_cast<std::uint32_t>(c), n, std::move(idx)));
  }
  return out;
}

}  // namespace

TEST_CASE("correlation matches a direct double sum") {
  std::vector<WalkTrace> tr{make_trace(0, 3, {1, 2, 3, 3, 2, 1, 1, 2}), make_trace(1, 3, {3, 3, 2, 1, 1, 2, 3, 3})};
  std::vector<std::uint64_t> lags{0, 1, 2, 3};
  auto c = correlation(tr, lags, 1);
  double mid = (3 + 1) * (3 + 1) / 4.0;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    double sum = 0;
    std::size_t n = 0;
    for (auto& t : tr)
      for (std::size_t i = 0; i + lags[k] < t.length(); ++i, ++n) sum += t.indices[i] * t.indices[i + lags[k]];
    CHECK(c.values[k] == doctest::Approx(sum / n - mid));
    CHECK(c.counts[k] == n);
  }
  auto e = correlation(tr, lags, 1, Centering::empirical);
  double mean = 0;
  for (auto& t : tr)
    for (auto i : t.indices) mean += i;
  mean /= 16;
  double sum0 = 0;
  for (auto& t : tr)
    for (auto i : t.indices) sum0 += i * i;
  CHECK(e.values[0] == doctest::Approx(sum0 / 16 - mean * mean));
}

TEST_CASE("correlation input validation") {
  CHECK_THROWS_AS(correlation(std::vector<WalkTrace>{}), Error);
  std::vector<WalkTrace> bad{make_trace(0, 3, {1, 2, 3}), make_trace(1, 3, {1, 2})};
  CHECK_THROWS_AS(correlation(bad), Error);
}

TEST_CASE("default lag grid") {
  auto lags = default_lags(100000);
  CHECK(lags.front() == 0);
  for (std::uint64_t l = 0; l <= 32; ++l) CHECK(lags[l] == l);
  for (std::size_t i = 1; i < lags.size(); ++i) CHECK(lags[i] > lags[i - 1]);
  CHECK(lags.back() <= 25000);
}

TEST_CASE("i.i.d. uniform indices have the uniform variance and no memory") {
  std::mt19937_64 rng(7);
  std::vector<WalkTrace> tr;
  for (std::uint32_t c = 0; c < 32; ++c) {
    std::vector<std::uint8_t> idx;
    for (int t = 0; t < 20000; ++t) idx.push_back(static_cast<std::uint8_t>(1 + rng() % 30));
    tr.push_back(make_trace(c, 30, std::move(idx)));
  }
  std::vector<std::uint64_t> lags{0, 1, 5, 50};
  auto c = correlation(tr, lags, 16);
  CHECK(std::abs(c.values[0] - (30.0 * 30 - 1) / 12) < 0.01 * 74.917);
  for (std::size_t k = 1; k < lags.size(); ++k) CHECK(std::abs(c.values[k]) < 4 * c.errors[k]);
}

TEST_CASE("noise-free two-exponential data") {
  std::vector<double> s, y;
  for (auto l : default_lags(40000)) {
    s.push_back(static_cast<double>(l));
    y.push_back(5 * std::exp(-static_cast<double>(l) / 1000.0) + std::exp(-static_cast<double>(l) / 100.0));
  }
  auto f = fit_two_exp(s, y);
  REQUIRE(f.converged);
  CHECK(f.tau1 == doctest::Approx(1000).epsilon(1e-4));
  CHECK(f.tau2 == doctest::Approx(100).epsilon(1e-3));
  CHECK(f.a1 == doctest::Approx(5).epsilon(1e-4));
  CHECK(f.a2 == doctest::Approx(1).epsilon(1e-3));
}

TEST_CASE("single exponential data") {
  std::vector<double> s, y;
  for (int l = 0; l < 400; l += 4) {
    s.push_back(l);
    y.push_back(3 * std::exp(-l / 40.0));
  }
  auto f = fit_two_exp(s, y);
  REQUIRE(f.converged);
  CHECK(f.tau1 == doctest::Approx(40).epsilon(1e-4));
}

TEST_CASE("generation bins") {
  CHECK(assign_generation(1e3) == 3);
  CHECK(assign_generation(3e3) == 3);
  CHECK(assign_generation(2e5) == 5);
  CHECK(assign_generation(10) == 1);
  CHECK_FALSE(assign_generation(3.1e3));
  CHECK_FALSE(assign_generation(999));
  CHECK_FALSE(assign_generation(0));
}

TEST_CASE("figure of merit is the worst copy's share of hot samples") {
  std::vector<WalkTrace> tr{make_trace(0, 30, {16, 1, 20, 30}), make_trace(1, 30, {1, 2, 3, 16})};
  CHECK(figure_of_merit(tr) == doctest::Approx(0.25));
  CHECK(figure_of_merit(tr, 1) == doctest::Approx(1.0));
}

TEST_CASE("hardness of a chain with a known relaxation time") {
  auto tr = lazy_walk(64, 50000, 250, 3);
  for (auto& t : tr) t.sweeps_per_sample = 10;
  auto r = measure_hardness("w", tr);
  REQUIRE(r.resolved);
  CHECK(std::abs(r.tau / 2500 - 1) < 0.2);
  CHECK(r.tau_err > 0);
  CHECK(r.tau_err < 0.2 * r.tau);
  CHECK(r.generation == 3);

  auto short_run = lazy_walk(64, 2000, 2000, 4);
  auto u = measure_hardness("slow", short_run);
  CHECK_FALSE(u.resolved);
  CHECK(u.tau == doctest::Approx(200));
  CHECK_FALSE(u.generation);
}

TEST_CASE("escalation protocol") {
  std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  // Instance i resolves once a round's budget reaches need[i]; f ranks the rest.
  std::vector<std::uint64_t> need{10, 1000, 100, 100000, 1000};
  std::vector<double> f{0.5, 0.1, 0.3, 0.05, 0.2};
  std::vector<std::vector<std::size_t>> calls;
  Measurer m = [&](std::span<const std::size_t> idx, std::uint64_t steps, std::size_t round) {
    CHECK(round == calls.size());
    calls.emplace_back(idx.begin(), idx.end());
    std::vector<HardnessReport> out;
    for (auto i : idx) {
      HardnessReport r;
      r.resolved = steps >= need[i];
      r.tau = static_cast<double>(need[i]);
      r.f = f[i];
      out.push_back(r);
    }
    return out;
  };
  EscalationConfig cfg{{10, 100, 1000}, {3, 1}};
  auto reports = escalation_protocol(ids, m, cfg);
  REQUIRE(calls.size() == 3);
  CHECK(calls[0] == std::vector<std::size_t>{0, 1, 2, 3, 4});
  // unresolved after round 1: b(0.1) c(0.3) d(0.05) e(0.2) -> lowest f first, cap 3
  CHECK(calls[1] == std::vector<std::size_t>{3, 1, 4});
  // after round 2 all three remain unresolved; cap 1 keeps d
  CHECK(calls[2] == std::vector<std::size_t>{3});
  CHECK(reports[0].resolved);
  CHECK(reports[0].rounds == 1);
  CHECK(reports[0].id == "a");
  CHECK_FALSE(reports[2].resolved);
  CHECK(reports[2].rounds == 1);
  CHECK(reports[3].rounds == 3);
  CHECK_FALSE(reports[3].resolved);
}

TEST_CASE("trace-returning runner gives the same protocol") {
  std::vector<std::string> ids{"x", "y"};
  Runner runner = [&](std::span<const std::size_t> idx, std::uint64_t steps, std::size_t) {
    std::vector<std::vector<WalkTrace>> out;
    for (auto i : idx) out.push_back(lazy_walk(32, steps, i == 0 ? 200 : 20000, 10 + i));
    return out;
  };
  auto reports = escalation_protocol(ids, runner, EscalationConfig{{50000, 100000}, {4}});
  CHECK(reports[0].resolved);
  CHECK(reports[0].rounds == 1);
  CHECK(reports[1].rounds == 2);
}

TEST_CASE("report table round trip") {
  std::vector<HardnessReport> rs(3);
  rs[0] = {"a", true, 1500, 20, 30, 70, 3, 0.01, 0.2, 3, 1};
  rs[1] = {"b", true, 5000, 10, 0, 1, 0, 0.1, 0.3, std::nullopt, 2};
  rs[2] = {"c", false, 1e6, 0, 0, 0, 0, 0, 0.0, std::nullopt, 3};
  std::string text = serialize_reports(rs);
  CHECK(text.rfind("id\ttau\ttau_sub\tresidual\tf\tgeneration\trounds", 0) == 0);
  auto back = parse_reports(text);
  REQUIRE(back.size() == 3);
  CHECK(back[0].generation == 3);
  CHECK(back[1].resolved);
  CHECK_FALSE(back[1].generation);
  CHECK_FALSE(back[2].resolved);
  CHECK(back[2].tau == 1e6);
  CHECK(serialize_reports(back) == text);
  CHECK_THROWS_AS(parse_reports("id\ttau\nx\t1\n"), ParseError);
}
