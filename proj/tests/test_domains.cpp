#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pocl;

namespace {

std::set<std::string> names(const DomainTable& t, const std::string& op, const std::string& var, int clause = 0) {
  auto d = t.domain(op, clause, var);
  REQUIRE(d);
  REQUIRE_FALSE(d->top);
  std::set<std::string> out;
  for (const std::string& n : sorted_names(t, *d)) out.insert(n);
  return out;
}

DomainTable table_for(const BenchmarkCase& c, PropagationVariant v = PropagationVariant::Baseline) {
  ParsedCase p = parse_case(c);
  return find_parameter_domains(p.ops, p.problem, v);
}

std::set<std::string> establisher_schemas(const BenchmarkCase& c, bool domains, const std::string& goal) {
  ParsedCase p = parse_case(c);
  SearchConfig cfg;
  cfg.use_domains = domains;
  PreparedProblem pp = prepare(p.ops, p.problem, cfg);
  Refiner r(pp.task, pp.seed ? &*pp.seed : nullptr, domains);
  std::optional<Plan> plan = r.initial_plan();
  REQUIRE(plan);
  std::set<std::string> out;
  bool found = false;
  for (const OpenCondition& oc : plan->open) {
    if (oc.kind != OpenCondition::Kind::Atom) continue;
    if (render_plan_atom(pp.task, *plan, oc.atom).rfind(goal, 0) != 0) continue;
    found = true;
    r.for_each_establisher(*plan, oc, [&](Establisher&& e) {
      out.insert(e.kind == Establisher::Kind::NewStep ? pp.task.schemas[e.schema].name : "reuse");
      return true;
    });
  }
  REQUIRE(found);
  return out;
}

}  // namespace

TEST_CASE("three-operator example domains") {
  DomainTable t = table_for(testing::corpus_case("figure2"));
  CHECK(names(t, "op1", "?x") == std::set<std::string>{"B"});
  CHECK(names(t, "op2", "?y") == std::set<std::string>{"B", "C"});
  CHECK(names(t, "op3", "?z") == std::set<std::string>{"A", "B"});
  auto r = domain_ratio(t);
  REQUIRE(r);
  CHECK(*r == Catch::Approx(5.0 / 7.0));
}

TEST_CASE("molecular genetics transform domains") {
  BenchmarkCase c = testing::corpus_case("molgen-rat-insulin");
  for (auto v : {PropagationVariant::Baseline, PropagationVariant::Improved}) {
    DomainTable t = table_for(c, v);
    CHECK(names(t, "transform", "?x") == std::set<std::string>{"EE", "JE"});
    CHECK(names(t, "transform", "?y") == std::set<std::string>{"E", "J"});
    // Union domains contain the intersected ones in this world.
    for (const ClauseDomains& cd : t.clauses)
      for (size_t i = 0; i < cd.vars.size(); ++i) {
        if (cd.domains[i].top || cd.unions[i].top) continue;
        CHECK(cd.domains[i].set.subset_of(cd.unions[i].set));
      }
  }
}

TEST_CASE("domains leave only ligate as an establisher of (contains IG ?m)") {
  BenchmarkCase c = testing::corpus_case("molgen-rat-insulin");
  auto with = establisher_schemas(c, true, "(contains IG ?");
  auto without = establisher_schemas(c, false, "(contains IG ?");
  CHECK(with == std::set<std::string>{"ligate"});
  CHECK(without.count("transform"));
  CHECK(without.count("ligate"));
}

TEST_CASE("domain reports match the frozen goldens") {
  for (const std::string& name : testing::corpus_names()) {
    CAPTURE(name);
    std::string golden = read_file(testing::corpus_dir() / name / "domains.golden");
    CHECK(render_domain_report(table_for(testing::corpus_case(name))) == golden);
  }
}

TEST_CASE("baseline and improved propagation agree") {
  auto same = [](const DomainTable& a, const DomainTable& b) {
    REQUIRE(a.clauses.size() == b.clauses.size());
    for (size_t i = 0; i < a.clauses.size(); ++i) {
      CHECK(a.clauses[i].domains == b.clauses[i].domains);
      CHECK(a.clauses[i].reachable == b.clauses[i].reachable);
    }
    CHECK(render_domain_report(a) == render_domain_report(b));
  };
  for (const std::string& name : testing::corpus_names()) {
    CAPTURE(name);
    BenchmarkCase c = testing::corpus_case(name);
    DomainTable base = table_for(c, PropagationVariant::Baseline);
    DomainTable imp = table_for(c, PropagationVariant::Improved);
    same(base, imp);
    CHECK(imp.propagations <= base.propagations);
  }
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    BenchmarkCase c = testing::random_world(seed);
    same(table_for(c, PropagationVariant::Baseline), table_for(c, PropagationVariant::Improved));
  }
}

TEST_CASE("every reachable instance lies inside the computed domains") {
  for (const char* name : {"figure2", "sussman", "test-ferry"}) {
    CAPTURE(name);
    ParsedCase p = parse_case(testing::corpus_case(name));
    DomainTable t = find_parameter_domains(p.ops, p.problem);
    long n = 0;
    auto err = testing::check_domains_by_enumeration(p.ops, p.problem, t, 6, &n);
    CHECK_FALSE(err);
    if (err) WARN(*err);
    CHECK(n > 0);
  }
  {
    ParsedCase p = parse_case(generate_art(0, 0, 0));
    DomainTable t = find_parameter_domains(p.ops, p.problem);
    CHECK_FALSE(testing::check_domains_by_enumeration(p.ops, p.problem, t, 6));
  }
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    ParsedCase p = parse_case(testing::random_world(seed));
    DomainTable t = find_parameter_domains(p.ops, p.problem);
    auto err = testing::check_domains_by_enumeration(p.ops, p.problem, t, 4);
    CHECK_FALSE(err);
    if (err) WARN(*err);
  }
}

TEST_CASE("propagation snapshots only grow") {
  ParsedCase p = parse_case(testing::corpus_case("trains1"));
  std::vector<std::vector<Domain>> snaps;
  find_parameter_domains(p.ops, p.problem, PropagationVariant::Improved, &snaps);
  REQUIRE(snaps.size() > 1);
  for (size_t k = 1; k < snaps.size(); ++k) {
    REQUIRE(snaps[k].size() == snaps[k - 1].size());
    for (size_t i = 0; i < snaps[k].size(); ++i) {
      const Domain& a = snaps[k - 1][i];
      const Domain& b = snaps[k][i];
      if (b.top) continue;
      CHECK_FALSE(a.top);
      CHECK(a.set.subset_of(b.set));
    }
  }
}

TEST_CASE("unreachable preconditions are reported") {
  auto ops = parse_domain(
      "(define (domain d)"
      " (:operator a :parameters (?x) :precondition (p ?x) :effect (q ?x))"
      " (:operator b :parameters (?x) :precondition (r ?x) :effect (s ?x)))");
  Problem prob = parse_problem("(define (problem p) :inits ((p K)) :goal (q K))", &ops);
  DomainTable t = find_parameter_domains(ops, prob);
  const ClauseDomains* b = t.find("b", 0);
  REQUIRE(b);
  CHECK_FALSE(b->reachable);
  REQUIRE(b->unreachable.size() == 1);
  CHECK(render(b->unreachable[0]) == "(r ?x)");
  CHECK(t.find("a", 0)->reachable);
}
