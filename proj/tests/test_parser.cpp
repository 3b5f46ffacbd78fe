#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pocl;

TEST_CASE("s-expressions report line and column") {
  try {
    read_sexprs("(a b\n  (c d)\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
    CHECK(std::string(e.what()).find(':') != std::string::npos);
  }
  CHECK_THROWS_AS(read_sexprs("(a))"), ParseError);
  auto forms = read_sexprs("; comment\n(a (b c) d) (e)");
  REQUIRE(forms.size() == 2);
  CHECK(forms[0].size() == 3);
  CHECK(forms[0][1].is_list);
  CHECK(forms[1].line == 2);
}

TEST_CASE("operator syntax errors carry positions") {
  const char* bad_arity =
      "(define (operator a) :parameters (?x) :precondition (p ?x) :effect (p ?x ?x))";
  CHECK_THROWS_AS(parse_domain(bad_arity), ParseError);
  const char* duplicate =
      "(define (domain d) (:operator a :parameters () :effect (p))"
      " (:operator a :parameters () :effect (q)))";
  CHECK_THROWS_AS(parse_domain(duplicate), ParseError);
  try {
    parse_domain("(define (operator a)\n :parameters (?x)\n :effect (p (?x)))");
    FAIL("nested term accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_problem("(define (problem p) :inits ((p ?x)) :goal (p a))"), ParseError);
  CHECK_THROWS_AS(parse_problem("(define (problem p) :inits ((p a)) :facts ((p b)) :goal (p a))"),
                  ParseError);
}

TEST_CASE("rendering round-trips every corpus case") {
  for (const std::string& name : testing::corpus_names()) {
    CAPTURE(name);
    BenchmarkCase c = testing::corpus_case(name);
    ParsedCase p = parse_case(c);
    std::string dom = render_domain(p.ops);
    std::string prob = render(p.problem);
    std::vector<Operator> ops2 = parse_domain(dom);
    CHECK(ops2 == p.ops);
    Problem p2 = parse_problem(prob, &ops2);
    CHECK(p2 == p.problem);
    CHECK(render_domain(ops2) == dom);
    CHECK(render(p2) == prob);
  }
}

TEST_CASE("preprocessing normalization is idempotent") {
  for (const std::string& name : testing::corpus_names()) {
    CAPTURE(name);
    ParsedCase p = parse_case(testing::corpus_case(name));
    std::set<std::string> facts;
    for (const auto& [k, rows] : p.problem.facts) facts.insert(k);
    for (const Operator& op : p.ops) {
      Operator once = normalize_for_preprocessing(op, facts);
      Operator twice = normalize_for_preprocessing(once, facts);
      CHECK(render(once) == render(twice));
    }
    Formula g = normalize_goal(p.problem.goal, facts);
    CHECK(render(normalize_goal(g, facts)) == render(g));
  }
}

TEST_CASE("universal expansion yields one clause per object tuple") {
  const char* dom =
      "(define (operator sweep)\n"
      "  :parameters (?r)\n"
      "  :precondition (room ?r)\n"
      "  :effect (forall ((tile ?t) (tile ?u))\n"
      "            (when (and (dirty ?t) (near ?t ?u)) (clean ?t))))";
  auto ops = parse_domain(dom);
  Problem prob = parse_problem(
      "(define (problem p) :inits ((room R) (tile A) (tile B) (tile C) (dirty A) (near A B))"
      " :goal (clean A))",
      &ops);
  Universe u = make_universe(ops, prob);
  Operator e = expand_universals(ops[0], u);
  CHECK(e.secondaries.size() == 9);  // |tiles|^2
  std::set<std::string> seen;
  for (const WhenClause& w : e.secondaries) {
    CHECK(w.quantified.empty());
    CHECK(w.source == 0);
    REQUIRE(w.instantiation.size() == 2);
    seen.insert(w.instantiation[0].second + w.instantiation[1].second);
  }
  CHECK(seen.size() == 9);
}

TEST_CASE("expanded universals agree with quantified simulation") {
  // Tile world with a quantified conditional delete: moving clears every
  // other position. Random ground instances in random states must give the
  // same successor either way.
  const char* dom =
      "(define (domain grid)\n"
      "  (:operator go\n"
      "   :parameters ((tile ?to))\n"
      "   :precondition (free ?to)\n"
      "   :effect (and (at ?to)\n"
      "                (forall ((tile ?t)) (when (and (at ?t) (neq ?t ?to)) (not (at ?t))))\n"
      "                (forall ((tile ?t)) (when (and (dirty ?t) (at ?t)) (and (clean ?t) (not (dirty ?t))))))))";
  auto ops = parse_domain(dom);
  Problem prob = parse_problem(
      "(define (problem p) :inits ((tile T1) (tile T2) (tile T3) (tile T4) (free T1) (free T2)"
      " (free T3) (free T4) (at T1) (dirty T2) (dirty T3)) :goal (clean T3))",
      &ops);
  GroundSimulator sim(ops, prob);
  Universe u = make_universe(ops, prob);
  std::vector<Operator> expanded{expand_universals(ops[0], u)};
  GroundSimulator esim(expanded, prob);
  std::mt19937 rng(11);
  const std::vector<std::string> tiles{"t1", "t2", "t3", "t4"};
  for (int trial = 0; trial < 200; ++trial) {
    GroundSimulator::State s;
    for (const std::string& t : tiles) {
      s.insert("tile " + t);
      s.insert("free " + t);
      if (rng() % 2) s.insert("at " + t);
      if (rng() % 2) s.insert("dirty " + t);
      if (rng() % 3 == 0) s.insert("clean " + t);
    }
    GroundSimulator::Binding b{{"?to", tiles[rng() % 4]}};
    CHECK(sim.apply(ops[0], b, s) == esim.apply(expanded[0], b, s));
  }
}

TEST_CASE("derived tags") {
  CHECK(testing::corpus_case("figure2").tags.empty());
  CHECK(testing::corpus_case("tw-1").tags == std::set<std::string>{"has-facts"});
  auto mb = testing::corpus_case("move-boxes").tags;
  CHECK(mb.count("has-universals"));
  CHECK(mb.count("has-conditional-effects"));
  CHECK(mb.count("has-facts"));
  CHECK(testing::corpus_case("sussman").tags == std::set<std::string>{"has-conditional-effects"});
}
