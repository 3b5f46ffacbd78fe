#include <catch_amalgamated.hpp>

#include "properties.hpp"

using namespace pocl;

TEST_CASE("rank expressions") {
  RankWeights w = RankWeights::parse("s+oc+0.1uc+f");
  CHECK(w.s == Rational(1));
  CHECK(w.oc == Rational(1));
  CHECK(w.uc == Rational(1, 10));
  CHECK(w.cl == Rational(0));
  CHECK(w.f == Rational(1));
  CHECK(w.str() == "s+oc+0.1uc+f");
  CHECK(RankWeights::parse(w.str()).str() == w.str());
  CHECK(RankWeights::parse("2s+oc").s == Rational(2));
  CHECK(RankWeights::from_list("1,1,0,0.5,1").cl == Rational(1, 2));
  CHECK_THROWS_AS(RankWeights::parse("s+zz"), std::invalid_argument);
  CHECK_THROWS_AS(RankWeights::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(RankWeights::from_list("1,2"), std::invalid_argument);
}

TEST_CASE("strategy names") {
  for (Strategy s : {Strategy::Lifo, Strategy::Zlifo, Strategy::ZlifoStar, Strategy::Lcfr, Strategy::Lc})
    CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK(parse_strategy("ZLIFO*") == Strategy::ZlifoStar);
  CHECK_THROWS_AS(parse_strategy("dfs"), std::invalid_argument);
  CHECK_FALSE(default_d_sep(Strategy::Lcfr));
  CHECK(default_d_sep(Strategy::Zlifo));
}

TEST_CASE("capped establisher counts agree with exact repair cost") {
  long checked = 0;
  auto err = testing::props::capped_counts_match(150, &checked);
  INFO(err.value_or(""));
  CHECK_FALSE(err);
  CHECK(checked > 1000);
}

TEST_CASE("flaw selection honours each strategy's contract") {
  for (const auto& s : testing::props::sample_cases()) {
    CAPTURE(s.name);
    ParsedCase p = parse_case(testing::corpus_case(s.name));
    SearchConfig cfg = testing::config("lifo", "s+oc+uc", s.domains);
    PreparedProblem pp = prepare(p.ops, p.problem, cfg);
    Planner planner(pp.task, cfg, pp.seed ? &*pp.seed : nullptr);
    const Refiner& r = planner.refiner();
    for (const Plan& plan : testing::props::sample_plans(planner, 120)) {
      if (r.has_spurious(plan)) continue;
      std::vector<ThreatClass> cls;
      for (const Threat& t : plan.threats) cls.push_back(r.classify(plan, t));
      bool expired = std::count(cls.begin(), cls.end(), ThreatClass::Expired) > 0;
      bool definite = std::count(cls.begin(), cls.end(), ThreatClass::Definite) > 0;
      std::vector<int> costs;
      for (size_t i = 0; i < plan.open.size(); ++i) costs.push_back(repair_cost(r, plan, Flaw{Flaw::Kind::Open, i, false}));

      Flaw lifo = select_flaw(r, plan, Strategy::Lifo, true);
      if (expired) {
        CHECK(lifo.kind == Flaw::Kind::Threat);
        CHECK(cls[lifo.index] == ThreatClass::Expired);
        continue;
      }
      if (definite) {
        CHECK(lifo.kind == Flaw::Kind::Threat);
        CHECK(cls[lifo.index] == ThreatClass::Definite);
      } else if (!plan.open.empty()) {
        CHECK(lifo.kind == Flaw::Kind::Open);
        CHECK(lifo.index == plan.open.size() - 1);
      }

      if (!plan.open.empty()) {
        int best = *std::min_element(costs.begin(), costs.end());
        Flaw zs = select_flaw(r, plan, Strategy::ZlifoStar, true);
        if (best <= 1) {
          REQUIRE(zs.kind == Flaw::Kind::Open);
          CHECK(costs[zs.index] <= 1);
          if (best == 0) CHECK(costs[zs.index] == 0);
        }
        Flaw lc = select_flaw(r, plan, Strategy::Lc, true);
        if (!definite) {
          REQUIRE(lc.kind == Flaw::Kind::Open);
          CHECK(costs[lc.index] == best);
        }
        Flaw z = select_flaw(r, plan, Strategy::Zlifo, true);
        if (!definite) {
          REQUIRE(z.kind == Flaw::Kind::Open);
          if (best <= 1) CHECK(costs[z.index] <= 1);
          else CHECK(z.index == plan.open.size() - 1);
        }
      }

      // LCFR without delayed separation: a flaw of least repair cost.
      Flaw lcfr = select_flaw(r, plan, Strategy::Lcfr, false);
      if (lcfr.kind != Flaw::Kind::None) {
        int best = std::numeric_limits<int>::max();
        for (int c : costs) best = std::min(best, c);
        for (size_t i = 0; i < plan.threats.size(); ++i)
          best = std::min(best, repair_cost(r, plan, Flaw{Flaw::Kind::Threat, i, true}));
        CHECK(repair_cost(r, plan, lcfr) == best);
      }
    }
  }
}
