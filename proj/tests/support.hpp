#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pocl/corpus.hpp"
#include "pocl/domains.hpp"
#include "pocl/search.hpp"
#include "pocl/validator.hpp"

namespace testing {

inline std::filesystem::path corpus_dir() { return POCL_CORPUS_DIR; }

inline pocl::BenchmarkCase corpus_case(const std::string& name) { return pocl::load_case(corpus_dir() / name); }

inline std::vector<std::string> corpus_names() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.is_directory()) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline bool has_facts(const pocl::BenchmarkCase& c) { return c.tags.count("has-facts") > 0; }

// Default ranking: S+OC+UC, plus F when the world has fact tables.
inline pocl::SearchConfig default_config(const pocl::BenchmarkCase& c) {
  pocl::SearchConfig cfg;
  cfg.rank = pocl::RankWeights::parse(has_facts(c) ? "s+oc+uc+f" : "s+oc+uc");
  return cfg;
}

inline pocl::SearchConfig config(const std::string& strategy, const std::string& rank, bool domains,
                                 long limit = pocl::kDefaultPlanLimit) {
  pocl::SearchConfig cfg;
  cfg.strategy = pocl::parse_strategy(strategy);
  cfg.rank = pocl::RankWeights::parse(rank);
  cfg.use_domains = domains;
  cfg.plan_limit = limit;
  return cfg;
}

// Small random world: five operators over predicates p0/1, p1/1, p2/2, p3/2
// and constants c0..c4, with negative preconditions, neq constraints and
// conditional effects mixed in.
inline pocl::BenchmarkCase random_world(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };
  const int arity[] = {1, 1, 2, 2};
  auto constant = [&] { return "c" + std::to_string(below(5)); };
  auto atom = [&](const std::vector<std::string>& vars, bool allow_const) {
    int p = below(4);
    std::string s = "(p" + std::to_string(p);
    for (int i = 0; i < arity[p]; ++i)
      s += " " + ((allow_const && below(4) == 0) || vars.empty() ? constant() : vars[below(static_cast<int>(vars.size()))]);
    return s + ")";
  };
  std::ostringstream d;
  d << "(define (domain random-" << seed << ")\n";
  for (int k = 0; k < 5; ++k) {
    std::vector<std::string> vars;
    int nv = 1 + below(2);
    for (int i = 0; i < nv; ++i) vars.push_back(std::string("?") + static_cast<char>('a' + i));
    d << "  (:operator o" << k << "\n   :parameters (";
    for (size_t i = 0; i < vars.size(); ++i) d << (i ? " " : "") << vars[i];
    d << ")\n   :precondition (and";
    int npre = 1 + below(2);
    for (int i = 0; i < npre; ++i) d << " " << atom(vars, true);
    if (below(3) == 0) d << " (not " << atom(vars, true) << ")";
    if (nv == 2 && below(3) == 0) d << " (neq ?a ?b)";
    d << ")\n   :effect (and " << atom(vars, true);
    if (below(2) == 0) d << " " << atom(vars, true);
    if (below(3) == 0) d << " (not " << atom(vars, false) << ")";
    if (below(3) == 0) d << " (when " << atom(vars, true) << " " << atom(vars, true) << ")";
    d << "))\n";
  }
  d << ")\n";
  std::ostringstream p;
  p << "(define (problem random-" << seed << ")\n  :inits (";
  int ninit = 3 + below(4);
  std::set<std::string> seen;
  for (int i = 0; i < ninit; ++i) {
    std::string a = atom({}, true);
    if (seen.insert(a).second) p << " " << a;
  }
  p << ")\n  :goal " << atom({}, true) << ")\n";
  pocl::BenchmarkCase c;
  c.name = "random-" + std::to_string(seed);
  c.domain_text = d.str();
  c.problem_text = p.str();
  return c;
}

// Brute-force check of domain soundness: every operator instance applicable
// after a sequence of at most max_len - 1 actions has its parameters inside
// the computed domains, and so does every when-clause whose antecedent holds.
// Returns a description of the first violation.
inline std::optional<std::string> check_domains_by_enumeration(const std::vector<pocl::Operator>& ops,
                                                               const pocl::Problem& prob,
                                                               const pocl::DomainTable& table, int max_len,
                                                               long* instances = nullptr) {
  using Sim = pocl::GroundSimulator;
  Sim sim(ops, prob);
  std::optional<std::string> err;
  auto check = [&](const pocl::Operator& op, int clause, const Sim::Binding& b) {
    if (instances) ++*instances;
    const pocl::ClauseDomains* cd = table.find(op.name, clause);
    if (!cd || !cd->reachable) {
      err = op.name + " clause " + std::to_string(clause) + " applicable but marked unreachable";
      return;
    }
    for (size_t i = 0; i < cd->vars.size() && !err; ++i) {
      auto it = b.find(cd->vars[i]);
      if (it == b.end()) continue;
      int id = table.constant(it->second);
      if (cd->domains[i].top) continue;
      if (id < 0 || !cd->domains[i].contains(id))
        err = op.name + " clause " + std::to_string(clause) + " " + cd->vars[i] + "=" + it->second +
              " outside its domain";
    }
  };
  std::set<Sim::State> seen{sim.initial()};
  std::vector<Sim::State> frontier{sim.initial()};
  for (int depth = 0; depth < max_len && !err; ++depth) {
    std::vector<Sim::State> next;
    for (const Sim::State& s : frontier) {
      for (const pocl::Operator& op : ops) {
        std::vector<pocl::TypedVar> params;
        for (const std::string& v : op.parameters) params.push_back({v, ""});
        sim.for_each_instance(params, {}, [&](const Sim::Binding& b) {
          if (err || !sim.applicable(op, b, s)) return;
          check(op, 0, b);
          for (size_t k = 0; k < op.secondaries.size(); ++k) {
            const pocl::WhenClause& w = op.secondaries[k];
            sim.for_each_instance(w.quantified, b, [&](const Sim::Binding& bb) {
              if (!err && sim.holds(w.antecedent, bb, s)) check(op, static_cast<int>(k) + 1, bb);
            });
          }
          Sim::State t = sim.apply(op, b, s);
          if (depth + 1 < max_len && seen.insert(t).second) next.push_back(std::move(t));
        });
      }
    }
    frontier = std::move(next);
  }
  return err;
}

}  // namespace testing
