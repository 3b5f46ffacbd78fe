#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pocl/bench.hpp"

namespace {

enum Exit { kOk = 0, kNoPlan = 1, kUsage = 2, kInput = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool on_off(const std::string& flag, const std::string& v) {
  std::string s = pocl::lowercase(v);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw UsageError(flag + " expects on or off, got " + v);
}

struct SearchFlags {
  std::string strategy = "lifo";
  std::string rank = "s+oc+uc";
  std::string weights;
  std::string d_sep;
  std::string use_domains = "off";
  bool domain_definite = false;
  long limit = pocl::kDefaultPlanLimit;
  std::string search = "bestf";
  std::optional<uint64_t> shuffle_seed;
  bool trace = false;

  void attach(CLI::App* app) {
    app->add_option("--strategy", strategy, "lifo, zlifo, zlifo-star, lcfr or lc")->capture_default_str();
    app->add_option("--rank", rank, "plan ranking, e.g. s+oc, s+oc+uc, s+oc+0.1uc+f")->capture_default_str();
    app->add_option("--weights", weights, "custom weights S,OC,UC,CL,F (overrides --rank)");
    app->add_option("--d-sep", d_sep, "delayed separation on|off (default depends on strategy)");
    app->add_option("--use-domains", use_domains, "prune with parameter domains on|off")->capture_default_str();
    app->add_flag("--domain-definite", domain_definite,
                  "treat potential threats fixed by singleton domains as definite");
    app->add_option("--limit", limit, "maximum plans created")->capture_default_str();
    app->add_option("--search", search, "bestf or idbf")->capture_default_str();
    app->add_option("--shuffle-seed", shuffle_seed, "shuffle operator preconditions with this seed");
    app->add_flag("--trace", trace, "print each expansion to stderr");
  }

  pocl::RunConfig config() const {
    pocl::RunConfig rc;
    pocl::SearchConfig& c = rc.search;
    try {
      c.strategy = pocl::parse_strategy(strategy);
      c.rank = weights.empty() ? pocl::RankWeights::parse(rank) : pocl::RankWeights::from_list(weights);
      c.mode = pocl::parse_search_mode(search);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (!d_sep.empty()) c.d_sep = on_off("--d-sep", d_sep);
    c.use_domains = on_off("--use-domains", use_domains);
    c.domain_definite = domain_definite;
    if (limit <= 0) throw UsageError("--limit must be positive");
    c.plan_limit = limit;
    c.shuffle_seed = shuffle_seed;
    if (trace) c.trace = &std::cerr;
    rc.name = pocl::default_config_name(c);
    return rc;
  }
};

pocl::OutputFormat format_of(const std::string& f) {
  try {
    return pocl::parse_format(f);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

pocl::ParsedCase load(const std::string& domain, const std::string& problem) {
  pocl::BenchmarkCase bc;
  bc.domain_text = pocl::read_file(domain);
  bc.problem_text = pocl::read_file(problem);
  return pocl::parse_case(bc);
}

void print_report(const pocl::DomainTable& t, pocl::OutputFormat fmt, double ms) {
  if (fmt == pocl::OutputFormat::Json) {
    pocl::Json j = pocl::domain_report_json(t);
    j["time_ms"] = ms;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << pocl::render_domain_report(t);
  std::optional<double> r = pocl::domain_ratio(t);
  std::cout << "; domain ratio " << (r ? pocl::detail::fixed(*r, 3) : std::string("-")) << "\n";
  std::cout << "; preprocessing " << pocl::detail::fixed(ms, 3) << " ms\n";
}

int cmd_solve(const std::string& domain, const std::string& problem, const SearchFlags& flags, bool report,
              const std::string& format) {
  pocl::RunConfig rc = flags.config();
  pocl::OutputFormat fmt = format_of(format);
  pocl::ParsedCase pc = load(domain, problem);

  auto t0 = std::chrono::steady_clock::now();
  std::optional<pocl::DomainTable> table;
  if (rc.search.use_domains || report) table = pocl::find_parameter_domains(pc.ops, pc.problem);
  double pre_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (report && fmt != pocl::OutputFormat::Json) print_report(*table, fmt, pre_ms);

  pocl::PreparedProblem pp = pocl::prepare(pc.ops, pc.problem, rc.search, table ? &*table : nullptr);
  pocl::SearchResult res = pocl::search(pp, rc.search);

  pocl::RunRecord r;
  r.case_name = pc.problem.name;
  r.config_name = rc.name;
  r.fingerprint = rc.fingerprint();
  r.goal_strategy = pocl::strategy_name(rc.search.strategy);
  r.plan_strategy = rc.search.rank.str();
  r.domains = rc.search.use_domains;
  r.outcome = pocl::outcome_name(res.outcome);
  r.created = res.created;
  r.explored = res.explored;
  r.wall_ms = res.seconds * 1000.0;
  r.preprocess_ms = rc.search.use_domains ? pre_ms : 0;
  r.prune = res.prune;
  std::optional<pocl::ValidationResult> v;
  if (res.plan) {
    r.plan_steps = res.plan->num_steps() - 2;
    v = pocl::validate_plan(pp.task, *res.plan);
    r.valid = v->ok;
  }

  switch (fmt) {
    case pocl::OutputFormat::Json: {
      pocl::Json j = pocl::record_json(r, std::nullopt);
      j.erase("speedup");
      if (res.plan) {
        pocl::Json steps = pocl::Json::array();
        for (int s : pocl::linearize(*res.plan))
          if (s != pocl::kStartStep && s != pocl::kEndStep) steps.push_back(pocl::step_name(pp.task, *res.plan, s));
        j["plan"] = steps;
      }
      if (report) j["domains"] = pocl::domain_report_json(*table);
      std::cout << j.dump(2) << "\n";
      break;
    }
    case pocl::OutputFormat::Csv:
      std::cout << pocl::emit_results({r}, fmt);
      break;
    case pocl::OutputFormat::Table:
      std::cout << r.outcome << ": " << r.created << " plans created, " << r.explored << " explored, "
                << pocl::detail::fixed(r.wall_ms, 1) << " ms\n";
      if (rc.search.use_domains)
        std::cout << "pruned establishers " << r.prune.establishers_pruned << ", threats suppressed "
                  << r.prune.threats_suppressed << ", threats dropped " << r.prune.threats_dropped << "\n";
      if (res.plan) {
        std::cout << pocl::pretty_print(pp.task, *res.plan);
        std::cout << "valid: " << (v->ok ? "yes" : "no (" + v->message + ")") << "\n";
      }
      break;
  }
  return res.plan ? kOk : kNoPlan;
}

int cmd_preprocess(const std::string& domain, const std::string& problem, const std::string& format,
                   const std::string& variant) {
  pocl::OutputFormat fmt = format_of(format);
  std::string v = pocl::lowercase(variant);
  if (v != "baseline" && v != "improved") throw UsageError("--variant expects baseline or improved");
  pocl::ParsedCase pc = load(domain, problem);
  auto t0 = std::chrono::steady_clock::now();
  pocl::DomainTable t = pocl::find_parameter_domains(
      pc.ops, pc.problem, v == "baseline" ? pocl::PropagationVariant::Baseline : pocl::PropagationVariant::Improved);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  print_report(t, fmt, ms);
  return kOk;
}

int cmd_bench(const std::string& manifest_path, const std::vector<std::string>& only_configs,
              const std::vector<std::string>& only_cases, const std::string& baseline, const std::string& format,
              bool validate) {
  pocl::OutputFormat fmt = format_of(format);
  pocl::Manifest m = pocl::load_manifest(manifest_path);
  for (const std::string& n : only_configs)
    if (!m.config(n)) throw UsageError("unknown config " + n);
  if (!baseline.empty() && !m.config(baseline)) throw UsageError("unknown baseline config " + baseline);

  std::vector<pocl::RunRecord> records;
  std::vector<std::string> failures;
  for (const pocl::ManifestCase& mc : m.cases) {
    if (!only_cases.empty() &&
        std::find(only_cases.begin(), only_cases.end(), mc.bench.name) == only_cases.end())
      continue;
    for (const pocl::RunConfig& rc : m.configs_for(mc)) {
      if (!only_configs.empty() &&
          std::find(only_configs.begin(), only_configs.end(), rc.name) == only_configs.end() &&
          rc.name != baseline)
        continue;
      pocl::RunRecord r = pocl::run_case(mc.bench, rc, validate);
      if (r.outcome == "error") failures.push_back(mc.bench.name + " " + rc.name + ": " + r.error);
      auto e = mc.expect.find(rc.name);
      if (e != mc.expect.end()) {
        std::string why = pocl::check_expectation(r, e->second);
        if (!why.empty()) failures.push_back(mc.bench.name + " " + rc.name + ": " + why);
      } else if (r.valid && !*r.valid) {
        failures.push_back(mc.bench.name + " " + rc.name + ": invalid plan");
      }
      records.push_back(std::move(r));
    }
  }
  std::cout << pocl::emit_results(records, fmt, baseline);
  for (const std::string& f : failures) std::cerr << "expectation failed: " << f << "\n";
  return failures.empty() ? kOk : kNoPlan;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-order causal-link planner with flaw-selection strategies and parameter domains"};
  app.require_subcommand(1);

  SearchFlags flags;
  std::string domain, problem, format = "table", variant = "improved", manifest, baseline;
  bool report = false, no_validate = false;
  std::vector<std::string> only_configs, only_cases;

  CLI::App* solve = app.add_subcommand("solve", "search for a plan");
  solve->add_option("domain", domain, "domain file")->required();
  solve->add_option("problem", problem, "problem file")->required();
  flags.attach(solve);
  solve->add_flag("--report-domains", report, "print parameter domains before solving");
  solve->add_option("--format", format, "table, csv or json")->capture_default_str();

  CLI::App* pre = app.add_subcommand("preprocess", "compute parameter domains");
  pre->add_option("domain", domain, "domain file")->required();
  pre->add_option("problem", problem, "problem file")->required();
  pre->add_flag("--report-domains", report, "print the domain report (always on)");
  pre->add_option("--format", format, "table or json")->capture_default_str();
  pre->add_option("--variant", variant, "baseline or improved propagation")->capture_default_str();

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark manifest");
  bench->add_option("manifest", manifest, "manifest file")->required();
  bench->add_option("--config", only_configs, "run only these configs (repeatable)");
  bench->add_option("--case", only_cases, "run only these cases (repeatable)");
  bench->add_option("--baseline", baseline, "config used for the speedup column");
  bench->add_option("--format", format, "table, csv or json")->capture_default_str();
  bench->add_flag("--no-validate", no_validate, "skip plan validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) return cmd_solve(domain, problem, flags, report, format);
    if (*pre) return cmd_preprocess(domain, problem, format, variant);
    if (*bench) return cmd_bench(manifest, only_configs, only_cases, baseline, format, !no_validate);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const pocl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInput;
  } catch (const pocl::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kUsage;
}
