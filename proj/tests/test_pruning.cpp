#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pocl;

namespace {

const char* kQuick[] = {"figure2", "sussman", "test-ferry", "monkey-test1", "monkey-test2", "fixa",
                        "molgen-rat-insulin", "tower-invert4", "tw-1", "tw-2", "office5", "trains2"};

}  // namespace

TEST_CASE("domains never lose a solution and never cost plans under the default strategy") {
  for (const char* name : kQuick) {
    CAPTURE(name);
    BenchmarkCase c = testing::corpus_case(name);
    ParsedCase p = parse_case(c);
    SearchConfig off = testing::default_config(c);
    SearchConfig on = off;
    on.use_domains = true;
    SearchResult a = search(p.ops, p.problem, off);
    SearchResult b = search(p.ops, p.problem, on);
    if (a.outcome == Outcome::Solved) CHECK(b.outcome == Outcome::Solved);
    if (a.outcome != Outcome::LimitReached) CHECK(b.created <= a.created);
  }
}

TEST_CASE("plan steps in solutions found without domains respect the domains") {
  for (const char* name : kQuick) {
    CAPTURE(name);
    ParsedCase p = parse_case(testing::corpus_case(name));
    SearchConfig cfg = testing::config("zlifo", "s+oc+uc+f", false);
    PreparedProblem pp = prepare(p.ops, p.problem, cfg);
    SearchResult r = search(pp, cfg);
    if (r.outcome != Outcome::Solved) continue;
    DomainTable t = find_parameter_domains(p.ops, p.problem);
    DomainSeed seed(pp.task, t);
    const Plan& plan = *r.plan;
    for (int s = 2; s < plan.num_steps(); ++s) {
      const Step& st = plan.steps[s];
      const Schema& sc = pp.task.schema(st.schema);
      for (int i = 0; i < sc.num_params; ++i) {
        TermId v = plan.bindings.resolve(st.var(i));
        if (is_var(v)) continue;
        INFO(sc.name << " " << sc.var_names[i] << "=" << pp.task.constant_names[v]);
        CHECK(seed.domain(st.schema, 0, i).contains(v));
      }
    }
  }
}

TEST_CASE("pruning counters") {
  ParsedCase p = parse_case(testing::corpus_case("molgen-rat-insulin"));
  SearchConfig cfg = testing::config("lifo", "s+oc+uc", true);
  SearchResult r = search(p.ops, p.problem, cfg);
  REQUIRE(r.outcome == Outcome::Solved);
  CHECK(r.prune.establishers_pruned > 0);
  cfg.use_domains = false;
  SearchResult o = search(p.ops, p.problem, cfg);
  CHECK(o.prune.establishers_pruned == 0);
  CHECK(o.prune.threats_dropped == 0);
}

TEST_CASE("domain-definite threats keep plans valid") {
  for (const char* name : {"trains1", "sussman", "test-ferry", "tw-2"}) {
    CAPTURE(name);
    ParsedCase p = parse_case(testing::corpus_case(name));
    SearchConfig cfg = testing::config("zlifo", "s+oc+f", true);
    cfg.domain_definite = true;
    PreparedProblem pp = prepare(p.ops, p.problem, cfg);
    SearchResult r = search(pp, cfg);
    REQUIRE(r.outcome == Outcome::Solved);
    CHECK(validate_plan(pp.task, *r.plan).ok);
  }
}

TEST_CASE("an unreachable goal is refuted before search") {
  auto ops = parse_domain("(define (operator a) :parameters (?x) :precondition (p ?x) :effect (q ?x))");
  Problem prob = parse_problem("(define (problem p) :inits ((p K)) :goal (q J))", &ops);
  SearchConfig cfg;
  cfg.use_domains = true;
  SearchResult r = search(ops, prob, cfg);
  CHECK(r.outcome == Outcome::Exhausted);
  cfg.use_domains = false;
  SearchResult o = search(ops, prob, cfg);
  CHECK(r.created <= o.created);
}
