#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "pocl/domains.hpp"
#include "pocl/plan.hpp"
#include "pocl/pruning.hpp"
#include "pocl/refine.hpp"
#include "pocl/strategies.hpp"
#include "pocl/task.hpp"

namespace pocl {

enum class SearchMode { BestFirst, IdBestFirst };
enum class Outcome { Solved, Exhausted, LimitReached };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Solved: return "solved";
    case Outcome::Exhausted: return "exhausted";
    case Outcome::LimitReached: return "limit";
  }
  return "?";
}

inline constexpr long kDefaultPlanLimit = 40000;

struct SearchConfig {
  RankWeights rank;
  Strategy strategy = Strategy::Lifo;
  std::optional<bool> d_sep;
  long plan_limit = kDefaultPlanLimit;
  bool use_domains = false;
  // Treat potential threats whose unifier is fixed by singleton domains as
  // definite (only with use_domains).
  bool domain_definite = false;
  SearchMode mode = SearchMode::BestFirst;
  std::optional<uint64_t> shuffle_seed;
  std::ostream* trace = nullptr;

  bool delayed_separation() const { return d_sep.value_or(default_d_sep(strategy)); }
};

struct SearchResult {
  Outcome outcome = Outcome::Exhausted;
  std::optional<Plan> plan;
  long created = 0;
  long explored = 0;
  PruneCounters prune;
  double seconds = 0;
};

class Planner {
 public:
  Planner(const Task& task, const SearchConfig& config, const DomainSeed* seed = nullptr)
      : task_(task), config_(config), refiner_(task, seed, config.use_domains && seed, &counters_, config.domain_definite) {}

  const Refiner& refiner() const { return refiner_; }

  // Children of a plan for its selected flaw, with ranks filled in.
  // Spurious threats are dropped first without creating a plan.
  std::vector<Plan> expand(const Plan& p, Flaw* chosen = nullptr) {
    if (refiner_.has_spurious(p)) {
      Plan q = p;
      refiner_.drop_spurious(q);
      return expand(q, chosen);
    }
    Flaw f = select_flaw(refiner_, p, config_.strategy, config_.delayed_separation());
    if (chosen) *chosen = f;
    std::vector<Plan> children;
    if (f.kind == Flaw::Kind::Open) {
      children = refiner_.establish(p, f.index);
    } else if (f.kind == Flaw::Kind::Threat) {
      children = refiner_.resolve_threat(p, f.index, f.allow_separation);
    }
    for (Plan& c : children) {
      c.parent = p.id;
      c.id = next_id_++;
      c.rank = rank_plan(c, config_.rank);
    }
    return children;
  }

  SearchResult run() {
    auto t0 = std::chrono::steady_clock::now();
    SearchResult res = config_.mode == SearchMode::BestFirst ? best_first() : id_best_first();
    res.prune = counters_;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  struct Entry {
    Rational rank;
    uint64_t id;
    std::unique_ptr<Plan> plan;
  };

  // Lower rank first, then older plan first.
  static bool later(const Entry& a, const Entry& b) {
    if (a.rank < b.rank) return false;
    if (b.rank < a.rank) return true;
    return a.id > b.id;
  }

  std::optional<Plan> root() {
    std::optional<Plan> p = refiner_.initial_plan();
    if (p) {
      p->id = next_id_++;
      p->rank = rank_plan(*p, config_.rank);
    }
    return p;
  }

  void trace(const Plan& p, const Flaw& f, size_t n) {
    if (!config_.trace) return;
    *config_.trace << "plan " << p.id << " parent " << p.parent << " rank " << p.rank.str() << " flaw "
                   << (f.kind == Flaw::Kind::Open ? "open" : f.kind == Flaw::Kind::Threat ? "threat" : "none")
                   << " children " << n << "\n";
  }

  SearchResult best_first() {
    SearchResult res;
    std::optional<Plan> init = root();
    if (!init) return res;
    res.created = 1;
    std::vector<Entry> heap;
    heap.push_back({init->rank, init->id, std::make_unique<Plan>(std::move(*init))});
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), later);
      Entry e = std::move(heap.back());
      heap.pop_back();
      ++res.explored;
      if (refiner_.is_complete(*e.plan)) {
        if (config_.trace) *config_.trace << "plan " << e.id << " complete\n";
        res.outcome = Outcome::Solved;
        res.plan = std::move(*e.plan);
        return res;
      }
      Flaw f;
      std::vector<Plan> children = expand(*e.plan, &f);
      trace(*e.plan, f, children.size());
      res.created += static_cast<long>(children.size());
      if (res.created > config_.plan_limit) {
        res.outcome = Outcome::LimitReached;
        return res;
      }
      for (Plan& c : children) {
        heap.push_back({c.rank, c.id, std::make_unique<Plan>(std::move(c))});
        std::push_heap(heap.begin(), heap.end(), later);
      }
    }
    res.outcome = Outcome::Exhausted;
    return res;
  }

  // Depth-first passes bounded by a rank threshold that rises to the least
  // rank pruned in the previous pass.
  SearchResult id_best_first() {
    SearchResult res;
    std::optional<Plan> init = root();
    if (!init) return res;
    res.created = 1;
    Rational threshold = init->rank;
    for (;;) {
      std::optional<Rational> next;
      Outcome o = dfs(*init, threshold, next, res);
      if (o != Outcome::Exhausted) {
        res.outcome = o;
        return res;
      }
      if (!next) {
        res.outcome = Outcome::Exhausted;
        return res;
      }
      threshold = *next;
    }
  }

  Outcome dfs(const Plan& p, const Rational& threshold, std::optional<Rational>& next, SearchResult& res) {
    if (threshold < p.rank) {
      if (!next || p.rank < *next) next = p.rank;
      return Outcome::Exhausted;
    }
    ++res.explored;
    if (refiner_.is_complete(p)) {
      res.plan = p;
      return Outcome::Solved;
    }
    Flaw f;
    std::vector<Plan> children = expand(p, &f);
    trace(p, f, children.size());
    res.created += static_cast<long>(children.size());
    if (res.created > config_.plan_limit) return Outcome::LimitReached;
    for (const Plan& c : children) {
      Outcome o = dfs(c, threshold, next, res);
      if (o != Outcome::Exhausted) return o;
    }
    return Outcome::Exhausted;
  }

  const Task& task_;
  SearchConfig config_;
  PruneCounters counters_;
  Refiner refiner_;
  uint64_t next_id_ = 0;
};

struct PreparedProblem {
  Task task;
  std::optional<DomainTable> table;
  std::optional<DomainSeed> seed;
};

inline PreparedProblem prepare(const std::vector<Operator>& ops, const Problem& prob, const SearchConfig& config,
                               const DomainTable* table = nullptr) {
  PreparedProblem pp{compile_task(ops, prob, config.shuffle_seed), std::nullopt, std::nullopt};
  if (config.use_domains) {
    pp.table = table ? *table : find_parameter_domains(ops, prob);
    pp.seed = DomainSeed(pp.task, *pp.table);
  }
  return pp;
}

inline SearchResult search(const PreparedProblem& pp, const SearchConfig& config) {
  Planner planner(pp.task, config, pp.seed ? &*pp.seed : nullptr);
  return planner.run();
}

inline SearchResult search(const std::vector<Operator>& ops, const Problem& prob, const SearchConfig& config,
                           const DomainTable* table = nullptr) {
  PreparedProblem pp = prepare(ops, prob, config, table);
  return search(pp, config);
}

}  // namespace pocl
