#include <catch_amalgamated.hpp>

#include "pocl/bench.hpp"
#include "support.hpp"

using namespace pocl;

namespace {

RunConfig named(const std::string& name, const std::string& strategy, const std::string& rank, bool domains) {
  RunConfig rc;
  rc.name = name;
  rc.search = testing::config(strategy, rank, domains);
  return rc;
}

std::vector<RunRecord> small_run() {
  std::vector<BenchmarkCase> cases{testing::corpus_case("sussman"), testing::corpus_case("figure2")};
  return run_benchmark(cases, {named("base", "lifo", "s+oc+uc", false), named("fast", "zlifo", "s+oc", true)});
}

size_t count_lines(const std::string& s) { return static_cast<size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("records are ordered by case then config") {
  auto rs = small_run();
  REQUIRE(rs.size() == 4);
  CHECK(rs[0].case_name == "sussman");
  CHECK(rs[1].config_name == "fast");
  CHECK(rs[2].case_name == "figure2");
  for (const RunRecord& r : rs) {
    CHECK(r.outcome == "solved");
    CHECK(r.valid == std::optional<bool>(true));
    CHECK(r.plan_steps > 0);
  }
  CHECK(rs[1].domains);
  CHECK(rs[1].fingerprint.find("domains=on") != std::string::npos);
  CHECK(rs[0].fingerprint.find("strategy=lifo") != std::string::npos);
}

TEST_CASE("speedup ratios against a named baseline") {
  auto rs = small_run();
  auto ratios = speedup_ratios(rs, "base");
  REQUIRE(ratios[0]);
  CHECK(*ratios[0] == Catch::Approx(1.0));
  REQUIRE(ratios[1]);
  CHECK(*ratios[1] == Catch::Approx(static_cast<double>(rs[0].created) / rs[1].created));
  CHECK(speedup_ratios(rs, "")[0] == std::nullopt);
  CHECK_THROWS_AS(speedup_ratios(rs, "nope"), std::invalid_argument);
  CHECK_THROWS_AS(emit_results(rs, OutputFormat::Csv, "nope"), std::invalid_argument);
  CHECK_THROWS_AS(emit_results({}, OutputFormat::Table, "nope"), std::invalid_argument);

  std::vector<RunRecord> one{rs[0]};
  auto single = speedup_ratios(one, "base");
  REQUIRE(single[0]);
  CHECK(*single[0] == 1.0);
}

TEST_CASE("output formats") {
  auto rs = small_run();
  std::string csv = emit_results(rs, OutputFormat::Csv, "base");
  CHECK(csv.rfind("case,goal_strategy,plan_strategy,domains,outcome,created,explored,time_ms,preprocess_ms,"
                  "establishers_pruned,threats_suppressed,threats_dropped,valid,speedup,config\n",
                  0) == 0);
  CHECK(count_lines(csv) == 5);
  CHECK(csv.find("sussman,lifo,") != std::string::npos);
  CHECK(csv.find(",yes,1.00,base\n") != std::string::npos);

  std::string table = emit_results(rs, OutputFormat::Table);
  CHECK(count_lines(table) == 5);
  CHECK(table.find("created/explored") != std::string::npos);
  CHECK(table.find("speedup") != std::string::npos);

  Json doc = Json::parse(emit_results(rs, OutputFormat::Json, "base"));
  CHECK(doc["baseline"] == "base");
  REQUIRE(doc["records"].size() == 4);
  CHECK(doc["records"][0]["speedup"] == 1.0);
  CHECK(doc["records"][1]["domains"] == true);
  Json none = Json::parse(emit_results(rs, OutputFormat::Json));
  CHECK(none["baseline"].is_null());
  CHECK(none["records"][0]["speedup"].is_null());

  CHECK(parse_format("CSV") == OutputFormat::Csv);
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
  CHECK(detail::csv_field("a,b") == "\"a,b\"");
  CHECK(detail::csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
}

TEST_CASE("benchmark runs are deterministic apart from timing") {
  auto a = small_run(), b = small_run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].created == b[i].created);
    CHECK(a[i].explored == b[i].explored);
    CHECK(a[i].plan_steps == b[i].plan_steps);
    CHECK(a[i].fingerprint == b[i].fingerprint);
  }
}

TEST_CASE("errors are isolated per run") {
  BenchmarkCase bad;
  bad.name = "bad";
  bad.domain_text = "(define (operator a) :parameters (?x) :effect";
  bad.problem_text = "(define (problem p) :inits () :goal (q))";
  RunRecord r = run_case(bad, named("base", "lifo", "s+oc+uc", false));
  CHECK(r.outcome == "error");
  CHECK_FALSE(r.error.empty());
}

TEST_CASE("configs from json") {
  Json j = Json::parse(R"({"strategy": "lcfr", "rank": "s+oc+0.1uc+f", "domains": true, "limit": 500})");
  RunConfig rc = config_from_json(j);
  CHECK(rc.search.strategy == Strategy::Lcfr);
  CHECK(rc.search.use_domains);
  CHECK(rc.search.plan_limit == 500);
  CHECK_FALSE(rc.search.delayed_separation());
  CHECK(rc.name == default_config_name(rc.search));
  CHECK_THROWS(config_from_json(Json::parse(R"({"strategy": "nope"})")));
}

TEST_CASE("domain report json") {
  ParsedCase p = parse_case(testing::corpus_case("figure2"));
  Json j = domain_report_json(find_parameter_domains(p.ops, p.problem));
  REQUIRE(j["clauses"].is_array());
  CHECK(j["clauses"][0]["operator"] == "op1");
  CHECK(j["clauses"][0]["parameters"][0]["domain"] == Json::array({"B"}));
  CHECK(j["domain_ratio"].get<double>() == Catch::Approx(5.0 / 7.0));
}
