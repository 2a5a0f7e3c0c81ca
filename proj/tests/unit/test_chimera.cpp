#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "sglab/chimera.hpp"
#include "sglab/error.hpp"

using namespace sglab;
using namespace sglab::chimera;

namespace {

// Adjacency rule written from coordinates, independent of the builder.
std::set<std::pair<VertexId, VertexId>> reference_edges(int rows, int cols, int k) {
  auto id = [&](int r, int c, int h, int u) { return static_cast<VertexId>(((r * cols + c) * 2 + h) * k + u); };
  std::set<std::pair<VertexId, VertexId>> out;
  auto add = [&](VertexId a, VertexId b) { out.insert({std::min(a, b), std::max(a, b)}); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int u = 0; u < k; ++u) {
        for (int w = 0; w < k; ++w) add(id(r, c, 0, u), id(r, c, 1, w));
        if (r + 1 < rows) add(id(r, c, 0, u), id(r + 1, c, 0, u));
        if (c + 1 < cols) add(id(r, c, 1, u), id(r, c + 1, 1, u));
      }
  return out;
}

// H(s) from a dense coupling matrix.
long dense_energy(const Instance& inst, const SpinConfig& s) {
  std::size_t n = inst.spin_count();
  std::vector<long> j(n * n, 0);
  for (std::size_t e = 0; e < inst.couplings().size(); ++e) {
    auto [a, b] = inst.graph().edge_endpoints(e);
    j[a * n + b] = inst.couplings()[e].raw() / Fixed::kScale;
  }
  long h = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) h += j[a * n + b] * s[a] * s[b];
  return h;
}

}  // namespace

TEST_CASE("graph structure matches the coordinate rule") {
  for (auto [r, c, k] : {std::tuple{1, 1, 4}, {2, 2, 4}, {3, 2, 2}, {4, 4, 4}, {8, 8, 4}}) {
    auto g = build_chimera(r, c, k);
    auto ref = reference_edges(r, c, k);
    CHECK(g->vertex_count() == static_cast<std::size_t>(2 * r * c * k));
    REQUIRE(g->edges().size() == ref.size());
    std::set<std::pair<VertexId, VertexId>> got;
    for (auto e : g->edges()) got.insert({e.u, e.v});
    CHECK(got == ref);
    CHECK(g->ideal_edge_count() == ref.size());
  }
  auto c8 = build_chimera(8, 8, 4);
  CHECK(c8->vertex_count() == 512);
  CHECK(c8->edges().size() == 1472);
  CHECK(c8->max_degree() == 6);
}

TEST_CASE("coloring is a proper bipartition") {
  auto g = build_chimera(4, 3, 4, {5, 17, 40});
  for (std::size_t e = 0; e < g->edges().size(); ++e) {
    auto [a, b] = g->edge_endpoints(e);
    CHECK(g->color(a) != g->color(b));
  }
}

TEST_CASE("dead vertices drop their edges") {
  auto full = build_chimera(2, 2, 4);
  auto g = build_chimera(2, 2, 4, {0, 9});
  CHECK(g->vertex_count() == 30);
  CHECK_FALSE(g->index_of(0));
  CHECK(g->index_of(1) == 0u);
  std::size_t lost = full->degree(*full->index_of(0)) + full->degree(*full->index_of(9)) -
                     (full->edge_index(0, 9) ? 1 : 0);
  CHECK(g->edges().size() == full->edges().size() - lost);
  for (auto e : g->edges()) CHECK((e.u != 0 && e.v != 0 && e.u != 9 && e.v != 9));
  CHECK_THROWS_AS(build_chimera(2, 2, 4, {32}), Error);
  CHECK_THROWS_AS(build_chimera(0, 2, 4), Error);
}

TEST_CASE("coordinates round trip") {
  auto g = build_chimera(3, 5, 4);
  for (VertexId v = 0; v < g->ideal_vertex_count(); ++v) {
    auto c = g->coord(v);
    CHECK(g->vertex_id(c.row, c.col, c.half, c.unit) == v);
  }
}

TEST_CASE("generator is reproducible and fair") {
  auto g = build_chimera(8, 8, 4);
  auto a = generate_instance(g, 42, "a"), b = generate_instance(g, 42, "b"), c = generate_instance(g, 43, "c");
  CHECK(std::equal(a.couplings().begin(), a.couplings().end(), b.couplings().begin()));
  CHECK_FALSE(std::equal(a.couplings().begin(), a.couplings().end(), c.couplings().begin()));
  CHECK(a.is_pm_one());
  CHECK(a.is_integral());
  long plus = 0, total = 0;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (Fixed j : generate_instance(g, s).couplings()) {
      plus += j == Fixed::from_int(1);
      ++total;
    }
  double frac = static_cast<double>(plus) / static_cast<double>(total);
  CHECK(std::abs(frac - 0.5) < 4 * 0.5 / std::sqrt(static_cast<double>(total)));
}

TEST_CASE("energy matches a dense evaluation") {
  auto g = build_chimera(2, 3, 4, {7});
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto inst = generate_instance(g, rng());
    auto s = random_config(inst.spin_count(), rng);
    CHECK(energy(inst, s) == Fixed::from_int(dense_energy(inst, s)));
  }
  auto inst = generate_instance(g, 1);
  CHECK_THROWS_AS(energy(inst, SpinConfig(3)), Error);
}

TEST_CASE("gauge transformation preserves energy") {
  auto g = build_chimera(3, 3, 4);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    auto inst = generate_instance(g, rng());
    auto s = random_config(inst.spin_count(), rng);
    auto gauge = Gauge::random(inst.spin_count(), rng);
    CHECK(energy(apply_gauge(inst, gauge), apply_gauge(s, gauge)) == energy(inst, s));
    CHECK(apply_gauge(apply_gauge(s, gauge), gauge) == s);
  }
}

TEST_CASE("spin configuration text form") {
  SpinConfig s(std::vector<std::int8_t>{1, -1, -1, 1});
  CHECK(s.to_string() == "+--+");
  CHECK(SpinConfig::parse("+--+") == s);
  CHECK_FALSE(SpinConfig::parse("+-x"));
  CHECK(s.flipped().to_string() == "-++-");
}

TEST_CASE("graph spec parsing") {
  auto g = parse_graph_spec("2x3x4");
  CHECK(g->rows() == 2);
  CHECK(g->cols() == 3);
  CHECK(g->half_size() == 4);
  CHECK_THROWS_AS(parse_graph_spec("2x3"), Error);
  CHECK_THROWS_AS(parse_graph_spec("axbxc"), Error);
}
