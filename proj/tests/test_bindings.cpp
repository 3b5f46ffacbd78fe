#include <catch_amalgamated.hpp>

#include "pocl/rational.hpp"
#include "properties.hpp"

using namespace pocl;

TEST_CASE("union-find codesignation basics") {
  Bindings b;
  for (int i = 0; i < 3; ++i) b.add_variable();
  TermId x = var_term(0), y = var_term(1), z = var_term(2);
  CHECK(b.add_eq(x, y));
  CHECK(b.same(x, y));
  CHECK(b.add_neq(y, z));
  CHECK_FALSE(add_binding(b, x, z, true));
  CHECK(b.add_eq(z, 4));
  CHECK(b.resolve(z) == 4);
  CHECK_FALSE(add_binding(b, x, 4, true));
  CHECK(b.known_distinct(x, z));
  auto c = add_binding(b, x, 5, true);
  REQUIRE(c);
  CHECK(c->resolve(y) == 5);
  CHECK(is_var(b.resolve(y)));
}

TEST_CASE("domains intersect on merge and shrink on neq") {
  Bindings b;
  b.add_variable(Domain::of(ConstSet{0, 1, 2}));
  b.add_variable(Domain::of(ConstSet{1, 2, 3}));
  CHECK(b.add_eq(var_term(0), var_term(1)));
  CHECK(b.domain(var_term(0)) == Domain::of(ConstSet{1, 2}));
  CHECK(b.add_neq(var_term(1), 2));
  CHECK(b.domain(var_term(0)) == Domain::of(ConstSet{1}));
  CHECK_FALSE(b.add_neq(var_term(0), 1));
}

TEST_CASE("non-codesignation over finite domains needs a colouring") {
  Bindings b;
  for (int i = 0; i < 3; ++i) b.add_variable(Domain::of(ConstSet{0, 1}));
  CHECK(b.add_neq(var_term(0), var_term(1)));
  CHECK(b.add_neq(var_term(1), var_term(2)));
  CHECK_FALSE(b.add_neq(var_term(0), var_term(2)));
}

TEST_CASE("mgu respects domains only when asked") {
  Bindings b;
  b.add_variable(Domain::of(ConstSet{0}));
  Atom a{};
  a.pred = 0;
  a.arity = 1;
  a.args[0] = var_term(0);
  Atom g = a;
  g.args[0] = 1;
  CHECK(b.mgu(a, g, false).has_value());
  CHECK_FALSE(b.mgu(a, g, true).has_value());
  g.args[0] = 0;
  auto m = b.mgu(a, g, true);
  REQUIRE(m);
  CHECK(m->size() == 1);
}

TEST_CASE("bindings agree with brute force on satisfiability and entailment") {
  auto err = testing::props::bindings_vs_brute_force(20240601, 1000);
  INFO(err.value_or(""));
  CHECK_FALSE(err);
}

TEST_CASE("refinement order does not change the final store") {
  auto err = testing::props::refinement_order_independence(77, 300);
  INFO(err.value_or(""));
  CHECK_FALSE(err);
}

TEST_CASE("rationals") {
  CHECK(Rational::parse("0.1") == Rational(1, 10));
  CHECK(Rational::parse("3/6") == Rational(1, 2));
  CHECK(Rational(1, 10) + Rational(1, 5) == Rational(3, 10));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(2, 4).str() == "0.5");
  CHECK(Rational(1, 3).str() == "1/3");
  CHECK_THROWS(Rational::parse("x"));
}
