#pragma once

#include <vector>

#include "pocl/domains.hpp"
#include "pocl/task.hpp"

namespace pocl {

struct PruneCounters {
  long establishers_pruned = 0;
  long threats_suppressed = 0;  // filtered when detected
  long threats_dropped = 0;     // found spurious before flaw selection
};

// Parameter domains projected onto the planner's schemas: one domain per
// schema variable for each planner clause, in the task's constant ids.
class DomainSeed {
 public:
  DomainSeed() = default;

  DomainSeed(const Task& task, const DomainTable& table) {
    std::vector<int> to_task(table.constants.size(), -1);
    for (size_t c = 0; c < table.constants.size(); ++c) to_task[c] = task.constant(table.constants[c]);
    auto convert = [&](const Domain& d) {
      if (d.top) return d;
      Domain out = Domain::none();
      for (int c : d.set.elements())
        if (to_task[c] >= 0) out.set.insert(to_task[c]);
      return out;
    };
    auto build = [&](const Schema& s) {
      std::vector<ClauseSeed> seeds;
      for (const Clause& cl : s.clauses) {
        ClauseSeed seed;
        seed.domains.assign(s.var_names.size(), Domain::any());
        const ClauseDomains* cd = table.find(s.name, cl.source);
        if (!cd) {
          seeds.push_back(seed);
          continue;
        }
        seed.viable = cd->reachable;
        for (size_t v = 0; v < s.var_names.size(); ++v) {
          int i = cd->var_index(s.var_names[v]);
          if (i >= 0) seed.domains[v] = convert(cd->domains[i]);
          if (seed.domains[v].empty()) seed.viable = false;
        }
        for (const auto& [name, k] : cl.instantiation) {
          int i = cd->var_index(name);
          if (i >= 0 && !convert(cd->domains[i]).contains(k)) seed.viable = false;
        }
        seeds.push_back(seed);
      }
      return seeds;
    };
    for (const Schema& s : task.schemas) schemas_.push_back(build(s));
    end_ = build(task.end);
  }

  const Domain& domain(int schema, int clause, int var) const {
    return clauses(schema)[clause].domains[var];
  }
  bool viable(int schema, int clause) const {
    const auto& c = clauses(schema);
    return clause >= static_cast<int>(c.size()) || c[clause].viable;
  }
  bool has(int schema) const {
    if (schema == kStartSchema) return false;
    if (schema == kEndSchema) return !end_.empty();
    return schema < static_cast<int>(schemas_.size());
  }

 private:
  struct ClauseSeed {
    std::vector<Domain> domains;
    bool viable = true;
  };

  const std::vector<ClauseSeed>& clauses(int schema) const {
    return schema == kEndSchema ? end_ : schemas_[schema];
  }

  std::vector<std::vector<ClauseSeed>> schemas_;
  std::vector<ClauseSeed> end_;
};

}  // namespace pocl
