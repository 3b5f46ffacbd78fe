#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pocl/corpus.hpp"
#include "pocl/domains.hpp"
#include "pocl/search.hpp"
#include "pocl/validator.hpp"

namespace pocl {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string name;
  SearchConfig search;

  // Every field that affects a run, in a fixed order.
  std::string fingerprint() const {
    const SearchConfig& c = search;
    std::string s = "strategy=" + strategy_name(c.strategy) + ";rank=" + c.rank.str() +
                    ";d-sep=" + (c.delayed_separation() ? "on" : "off") + ";domains=" + (c.use_domains ? "on" : "off");
    if (c.domain_definite) s += ";domain-definite=on";
    s += ";limit=" + std::to_string(c.plan_limit) + ";search=" + (c.mode == SearchMode::BestFirst ? "bestf" : "idbf");
    s += ";shuffle=" + (c.shuffle_seed ? std::to_string(*c.shuffle_seed) : std::string("none"));
    return s;
  }
};

inline std::string default_config_name(const SearchConfig& c) {
  return strategy_name(c.strategy) + "/" + c.rank.str() + (c.use_domains ? "/dom" : "");
}

inline SearchMode parse_search_mode(const std::string& s) {
  std::string m = lowercase(s);
  if (m == "bestf") return SearchMode::BestFirst;
  if (m == "idbf") return SearchMode::IdBestFirst;
  throw std::invalid_argument("unknown search mode " + s);
}

// Config from a JSON object with optional keys strategy, rank, weights,
// domains, d_sep, domain_definite, limit, search, shuffle_seed and name.
inline RunConfig config_from_json(const Json& j, long default_limit = kDefaultPlanLimit) {
  RunConfig rc;
  SearchConfig& c = rc.search;
  c.plan_limit = default_limit;
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (j.contains("weights")) c.rank = RankWeights::from_list(j.at("weights").get<std::string>());
  else if (j.contains("rank")) c.rank = RankWeights::parse(j.at("rank").get<std::string>());
  if (j.contains("domains")) c.use_domains = j.at("domains").get<bool>();
  if (j.contains("d_sep")) c.d_sep = j.at("d_sep").get<bool>();
  if (j.contains("domain_definite")) c.domain_definite = j.at("domain_definite").get<bool>();
  if (j.contains("limit")) c.plan_limit = j.at("limit").get<long>();
  if (j.contains("search")) c.mode = parse_search_mode(j.at("search").get<std::string>());
  if (j.contains("shuffle_seed")) c.shuffle_seed = j.at("shuffle_seed").get<uint64_t>();
  rc.name = j.contains("name") ? j.at("name").get<std::string>() : default_config_name(c);
  return rc;
}

struct RunRecord {
  std::string case_name;
  std::string config_name;
  std::string fingerprint;
  std::string goal_strategy;
  std::string plan_strategy;
  bool domains = false;
  std::string outcome;  // solved, exhausted, limit or error
  long created = 0;
  long explored = 0;
  double wall_ms = 0;
  double preprocess_ms = 0;
  PruneCounters prune;
  std::optional<bool> valid;
  int plan_steps = 0;
  std::string error;
};

inline RunRecord run_case(const BenchmarkCase& bc, const RunConfig& rc, bool validate = true) {
  RunRecord r;
  r.case_name = bc.name;
  r.config_name = rc.name;
  r.fingerprint = rc.fingerprint();
  r.goal_strategy = strategy_name(rc.search.strategy);
  r.plan_strategy = rc.search.rank.str();
  r.domains = rc.search.use_domains;
  try {
    ParsedCase pc = parse_case(bc);
    auto t0 = std::chrono::steady_clock::now();
    std::optional<DomainTable> table;
    if (rc.search.use_domains) table = find_parameter_domains(pc.ops, pc.problem);
    r.preprocess_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    PreparedProblem pp = prepare(pc.ops, pc.problem, rc.search, table ? &*table : nullptr);
    SearchResult res = search(pp, rc.search);
    r.outcome = outcome_name(res.outcome);
    r.created = res.created;
    r.explored = res.explored;
    r.wall_ms = res.seconds * 1000.0;
    r.prune = res.prune;
    if (res.plan) {
      r.plan_steps = res.plan->num_steps() - 2;
      if (validate) r.valid = validate_plan(pp.task, *res.plan).ok;
    }
  } catch (const std::exception& e) {
    r.outcome = "error";
    r.error = e.what();
  }
  return r;
}

// One record per case and config, cases outermost.
inline std::vector<RunRecord> run_benchmark(const std::vector<BenchmarkCase>& cases,
                                            const std::vector<RunConfig>& configs, bool validate = true) {
  std::vector<RunRecord> out;
  for (const BenchmarkCase& c : cases)
    for (const RunConfig& rc : configs) out.push_back(run_case(c, rc, validate));
  return out;
}

enum class OutputFormat { Table, Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
  std::string f = lowercase(s);
  if (f == "table") return OutputFormat::Table;
  if (f == "csv") return OutputFormat::Csv;
  if (f == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format " + s);
}

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Ratio of the baseline's created count to each record's, per case. An
// empty baseline name means no ratio column.
inline std::vector<std::optional<double>> speedup_ratios(const std::vector<RunRecord>& records,
                                                         const std::string& baseline) {
  std::vector<std::optional<double>> out(records.size());
  if (baseline.empty()) return out;
  bool known = std::any_of(records.begin(), records.end(),
                           [&](const RunRecord& r) { return r.config_name == baseline; });
  if (!known) throw std::invalid_argument("unknown baseline config " + baseline);
  std::map<std::string, long> base;
  for (const RunRecord& r : records)
    if (r.config_name == baseline && r.outcome != "error") base.emplace(r.case_name, r.created);
  for (size_t i = 0; i < records.size(); ++i) {
    auto it = base.find(records[i].case_name);
    if (it != base.end() && records[i].created > 0)
      out[i] = static_cast<double>(it->second) / static_cast<double>(records[i].created);
  }
  return out;
}

inline Json record_json(const RunRecord& r, const std::optional<double>& ratio) {
  Json j;
  j["case"] = r.case_name;
  j["config"] = r.config_name;
  j["goal_strategy"] = r.goal_strategy;
  j["plan_strategy"] = r.plan_strategy;
  j["domains"] = r.domains;
  j["outcome"] = r.outcome;
  j["created"] = r.created;
  j["explored"] = r.explored;
  j["time_ms"] = r.wall_ms;
  j["preprocess_ms"] = r.preprocess_ms;
  j["establishers_pruned"] = r.prune.establishers_pruned;
  j["threats_suppressed"] = r.prune.threats_suppressed;
  j["threats_dropped"] = r.prune.threats_dropped;
  j["plan_steps"] = r.plan_steps;
  j["valid"] = r.valid ? Json(*r.valid) : Json(nullptr);
  j["speedup"] = ratio ? Json(*ratio) : Json(nullptr);
  j["fingerprint"] = r.fingerprint;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline std::string emit_results(const std::vector<RunRecord>& records, OutputFormat format,
                                const std::string& baseline = "") {
  std::vector<std::optional<double>> ratios = speedup_ratios(records, baseline);
  std::ostringstream out;
  auto ratio_text = [&](size_t i) { return ratios[i] ? detail::fixed(*ratios[i], 2) : std::string("-"); };
  switch (format) {
    case OutputFormat::Json: {
      Json arr = Json::array();
      for (size_t i = 0; i < records.size(); ++i) arr.push_back(record_json(records[i], ratios[i]));
      Json doc;
      doc["baseline"] = baseline.empty() ? Json(nullptr) : Json(baseline);
      doc["records"] = arr;
      out << doc.dump(2) << "\n";
      break;
    }
    case OutputFormat::Csv: {
      out << "case,goal_strategy,plan_strategy,domains,outcome,created,explored,time_ms,preprocess_ms,"
             "establishers_pruned,threats_suppressed,threats_dropped,valid,speedup,config\n";
      for (size_t i = 0; i < records.size(); ++i) {
        const RunRecord& r = records[i];
        out << detail::csv_field(r.case_name) << "," << r.goal_strategy << "," << r.plan_strategy << ","
            << (r.domains ? "on" : "off") << "," << r.outcome << "," << r.created << "," << r.explored << ","
            << detail::fixed(r.wall_ms, 3) << "," << detail::fixed(r.preprocess_ms, 3) << ","
            << r.prune.establishers_pruned << "," << r.prune.threats_suppressed << "," << r.prune.threats_dropped
            << "," << (r.valid ? (*r.valid ? "yes" : "no") : "") << "," << (ratios[i] ? ratio_text(i) : "") << ","
            << detail::csv_field(r.config_name) << "\n";
      }
      break;
    }
    case OutputFormat::Table: {
      std::vector<std::vector<std::string>> rows;
      rows.push_back({"case", "goal", "plan", "domains", "outcome", "created/explored", "time(ms)", "speedup"});
      for (size_t i = 0; i < records.size(); ++i) {
        const RunRecord& r = records[i];
        rows.push_back({r.case_name, r.goal_strategy, r.plan_strategy, r.domains ? "on" : "off", r.outcome,
                        std::to_string(r.created) + "/" + std::to_string(r.explored), detail::fixed(r.wall_ms, 1),
                        ratio_text(i)});
      }
      std::vector<size_t> width(rows[0].size(), 0);
      for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
      for (const auto& row : rows) {
        std::string line;
        for (size_t c = 0; c < row.size(); ++c) {
          std::string cell = row[c];
          if (c + 1 < row.size()) cell.resize(width[c] + 2, ' ');
          line += cell;
        }
        out << line << "\n";
      }
      break;
    }
  }
  return out.str();
}

inline Json domain_report_json(const DomainTable& t) {
  Json clauses = Json::array();
  for (const ClauseDomains& c : t.clauses) {
    if (c.op == "*end*" && c.vars.empty() && c.unreachable.empty()) continue;
    Json j;
    j["operator"] = c.op;
    j["clause"] = c.clause;
    j["reachable"] = c.reachable;
    Json params = Json::array();
    for (size_t v = 0; v < c.vars.size(); ++v) {
      Json p;
      p["var"] = c.vars[v];
      p["domain"] = c.domains[v].top ? Json("T") : Json(sorted_names(t, c.domains[v]));
      p["union"] = c.unions[v].top ? Json("T") : Json(sorted_names(t, c.unions[v]));
      params.push_back(p);
    }
    j["parameters"] = params;
    Json un = Json::array();
    for (const Literal& l : c.unreachable) un.push_back(render(l));
    j["unreachable"] = un;
    clauses.push_back(j);
  }
  Json doc;
  doc["clauses"] = clauses;
  std::optional<double> ratio = domain_ratio(t);
  doc["domain_ratio"] = ratio ? Json(*ratio) : Json(nullptr);
  return doc;
}

// ---- manifest -------------------------------------------------------------

struct Expectation {
  std::string outcome;  // solved, exhausted or limit
  std::optional<long> max_created;
};

struct ManifestCase {
  BenchmarkCase bench;
  std::vector<std::string> declared_tags;
  bool solvable = true;
  std::string best;  // config name
  std::vector<std::string> configs;  // empty = every manifest config
  std::map<std::string, Expectation> expect;
};

struct Manifest {
  std::filesystem::path root;
  std::vector<RunConfig> configs;
  std::vector<ManifestCase> cases;

  const RunConfig* config(const std::string& name) const {
    for (const RunConfig& c : configs)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::vector<RunConfig> configs_for(const ManifestCase& mc) const {
    if (mc.configs.empty()) return configs;
    std::vector<RunConfig> out;
    for (const std::string& n : mc.configs) {
      const RunConfig* c = config(n);
      if (!c) throw std::invalid_argument("case " + mc.bench.name + " names unknown config " + n);
      out.push_back(*c);
    }
    return out;
  }
};

inline Expectation expectation_from_json(const Json& j) {
  Expectation e;
  e.outcome = j.at("outcome").get<std::string>();
  if (j.contains("max_created")) e.max_created = j.at("max_created").get<long>();
  return e;
}

// Checks a record against an expectation; returns an empty string when met.
inline std::string check_expectation(const RunRecord& r, const Expectation& e) {
  if (r.outcome != e.outcome) return "outcome " + r.outcome + ", expected " + e.outcome;
  if (e.max_created && r.created > *e.max_created)
    return "created " + std::to_string(r.created) + " exceeds " + std::to_string(*e.max_created);
  if (r.valid && !*r.valid) return "invalid plan";
  return "";
}

// Cases are either {"dir": ...} relative to the manifest or
// {"art": [n_est, n_clob, seed]}.
inline Manifest load_manifest(const std::filesystem::path& path) {
  Manifest m;
  m.root = path.parent_path();
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(std::string("manifest: ") + e.what());
  }
  long limit = doc.value("limit", kDefaultPlanLimit);
  for (const Json& c : doc.at("configs")) m.configs.push_back(config_from_json(c, limit));
  for (const Json& c : doc.at("cases")) {
    ManifestCase mc;
    if (c.contains("art")) {
      const Json& a = c.at("art");
      mc.bench = generate_art(a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<uint64_t>());
      ParsedCase pc = parse_case(mc.bench);
      mc.bench.tags = derive_tags(pc.ops, pc.problem);
    } else {
      mc.bench = load_case(m.root / c.at("dir").get<std::string>());
    }
    if (c.contains("name")) mc.bench.name = c.at("name").get<std::string>();
    mc.bench.provenance = c.value("provenance", mc.bench.provenance);
    if (c.contains("tags"))
      for (const Json& t : c.at("tags")) mc.declared_tags.push_back(t.get<std::string>());
    mc.solvable = c.value("solvable", true);
    mc.best = c.value("best", std::string());
    if (c.contains("configs"))
      for (const Json& n : c.at("configs")) mc.configs.push_back(n.get<std::string>());
    if (c.contains("expect"))
      for (const auto& [name, e] : c.at("expect").items()) mc.expect[name] = expectation_from_json(e);
    m.cases.push_back(std::move(mc));
  }
  return m;
}

}  // namespace pocl
