#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sglab/chimera.hpp"
#include "sglab/error.hpp"

using namespace sglab;
using namespace sglab::chimera;

TEST_CASE("instance text round trip") {
  auto g = build_chimera(2, 2, 4, {3, 20});
  auto inst = generate_instance(g, 99, "x1");
  std::string text = serialize_instance(inst);
  auto back = parse_instance(text);
  CHECK(back == inst);
  CHECK(back.id() == "x1");
  CHECK(back.seed() == 99);
  CHECK(serialize_instance(back) == text);
}

TEST_CASE("fields and fractional couplings survive") {
  auto g = build_chimera(1, 1, 2);
  std::vector<Fixed> j(g->edges().size(), *Fixed::parse("0.375"));
  j[1] = *Fixed::parse("-1.000000001");
  std::vector<Fixed> h{Fixed::from_int(1), Fixed{}, *Fixed::parse("-0.5"), Fixed{}};
  Instance inst(g, j, h, "f", 0);
  auto back = parse_instance(serialize_instance(inst));
  CHECK(back == inst);
  CHECK_FALSE(back.is_pm_one());
  CHECK_FALSE(back.is_integral());
}

TEST_CASE("witness documents") {
  auto inst = generate_instance(build_chimera(1, 1, 4), 3, "w");
  SpinConfig s(std::vector<std::int8_t>{1, -1, 1, 1, -1, -1, 1, -1});
  auto doc = parse_document(serialize_document(inst, s));
  CHECK(doc.instance == inst);
  REQUIRE(doc.config);
  CHECK(*doc.config == s);
}

TEST_CASE("parse errors carry the line") {
  auto check_line = [](const std::string& text, std::size_t line) {
    try {
      parse_instance(text);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  check_line("chimera 1 1 4\ndead\nseed 1\nJ 0 4 banana\n", 4);
  check_line("chimera 1 1 4\ndead\nseed x\n", 3);
  check_line("chimera 1 1 4\ndead\nseed 1\nJ 0 1 1\n", 4);  // not an edge
  check_line("bogus\n", 1);
  CHECK_THROWS_AS(parse_instance(""), ParseError);
}
