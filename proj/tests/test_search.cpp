#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pocl;

namespace {

SearchResult solve(const std::string& name, const SearchConfig& cfg, PreparedProblem* out = nullptr) {
  ParsedCase p = parse_case(testing::corpus_case(name));
  PreparedProblem pp = prepare(p.ops, p.problem, cfg);
  SearchResult r = search(pp, cfg);
  if (out) *out = std::move(pp);
  return r;
}

}  // namespace

TEST_CASE("three-operator example solves with one step") {
  PreparedProblem pp;
  SearchResult r = solve("figure2", SearchConfig{}, &pp);
  REQUIRE(r.outcome == Outcome::Solved);
  REQUIRE(r.plan);
  CHECK(r.plan->num_steps() == 4);
  CHECK(validate_plan(pp.task, *r.plan).ok);
  std::string text = pretty_print(pp.task, *r.plan);
  CHECK(text.find("op1") != std::string::npos);
  CHECK(text.find("op2") != std::string::npos);
}

TEST_CASE("every strategy solves the small worlds with valid plans") {
  for (const char* name : {"sussman", "test-ferry", "figure2", "monkey-test1", "fixa"})
    for (const char* strategy : {"lifo", "zlifo", "zlifo-star", "lcfr", "lc"})
      for (bool domains : {false, true}) {
        CAPTURE(name, strategy, domains);
        SearchConfig cfg = testing::config(strategy, "s+oc+uc", domains);
        PreparedProblem pp;
        SearchResult r = solve(name, cfg, &pp);
        REQUIRE(r.outcome == Outcome::Solved);
        ValidationResult v = validate_plan(pp.task, *r.plan);
        CHECK(v.ok);
        if (!v.ok) WARN(v.message);
        CHECK(r.explored <= r.created);
      }
}

TEST_CASE("iterative deepening best-first finds valid plans") {
  for (const char* name : {"sussman", "figure2", "test-ferry"}) {
    CAPTURE(name);
    SearchConfig cfg = testing::config("zlifo", "s+oc", false);
    cfg.mode = SearchMode::IdBestFirst;
    PreparedProblem pp;
    SearchResult r = solve(name, cfg, &pp);
    REQUIRE(r.outcome == Outcome::Solved);
    CHECK(validate_plan(pp.task, *r.plan).ok);
  }
}

TEST_CASE("plan limit and exhaustion") {
  SearchConfig cfg;
  cfg.plan_limit = 50;
  SearchResult r = solve("trains1", cfg);
  CHECK(r.outcome == Outcome::LimitReached);
  CHECK(r.created > 50);
  CHECK_FALSE(r.plan);

  auto ops = parse_domain("(define (operator a) :parameters (?x) :precondition (p ?x) :effect (q ?x))");
  Problem prob = parse_problem("(define (problem p) :inits ((p K)) :goal (q J))", &ops);
  SearchResult e = search(ops, prob, SearchConfig{});
  CHECK(e.outcome == Outcome::Exhausted);
  CHECK(e.created >= 1);
}

TEST_CASE("search is deterministic") {
  SearchConfig cfg = testing::config("zlifo", "s+oc", true);
  SearchResult a = solve("trains1", cfg), b = solve("trains1", cfg);
  CHECK(a.created == b.created);
  CHECK(a.explored == b.explored);
  cfg.shuffle_seed = 3;
  PreparedProblem pp;
  SearchResult c = solve("sussman", cfg, &pp), d = solve("sussman", cfg);
  REQUIRE(c.outcome == Outcome::Solved);
  CHECK(c.created == d.created);
  CHECK(validate_plan(pp.task, *c.plan).ok);
}

TEST_CASE("validator rejects broken plans") {
  PreparedProblem pp;
  SearchResult r = solve("sussman", SearchConfig{}, &pp);
  REQUIRE(r.plan);
  REQUIRE(validate_plan(pp.task, *r.plan).ok);

  Plan unordered = *r.plan;
  unordered.ordering = Ordering();
  for (int s = 2; s < unordered.num_steps(); ++s) unordered.ordering.add_step();
  ValidationResult v = validate_plan(pp.task, unordered);
  CHECK_FALSE(v.ok);
  CHECK_FALSE(v.message.empty());

  Refiner ref(pp.task, nullptr, false);
  std::optional<Plan> empty = ref.initial_plan();
  REQUIRE(empty);
  CHECK_FALSE(validate_plan(pp.task, *empty).ok);
}

TEST_CASE("fact worlds and universals") {
  for (const char* name : {"tw-1", "office5", "move-boxes-1"}) {
    CAPTURE(name);
    SearchConfig cfg = testing::config("zlifo", "s+oc+f", true);
    PreparedProblem pp;
    SearchResult r = solve(name, cfg, &pp);
    REQUIRE(r.outcome == Outcome::Solved);
    CHECK(validate_plan(pp.task, *r.plan).ok);
  }
}
