#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "pocl/bindings.hpp"
#include "pocl/ordering.hpp"
#include "pocl/rational.hpp"
#include "pocl/task.hpp"

namespace pocl {

struct Step {
  int schema;    // kStartSchema, kEndSchema or an operator schema index
  int var_base;  // schema variable i is plan variable var_base + i

  TermId var(int i) const { return var_term(var_base + i); }
};

struct CausalLink {
  int producer;
  Atom condition;
  int consumer;
};

struct OpenCondition {
  enum class Kind : uint8_t { Atom, Fact, Or };
  Kind kind = Kind::Atom;
  pocl::Atom atom;
  const GoalNode* node = nullptr;  // disjunction, instantiated with var_base
  int var_base = 0;
  int step = kEndStep;
  uint32_t seq = 0;
};

struct Threat {
  int step;
  int clause;
  int effect;
  int link;
  uint32_t seq;
};

struct Plan {
  std::vector<Step> steps;
  std::vector<CausalLink> links;
  Bindings bindings;
  Ordering ordering;
  std::vector<OpenCondition> open;  // insertion order
  std::vector<Threat> threats;      // insertion order
  uint32_t next_seq = 0;
  uint64_t id = 0;
  uint64_t parent = 0;
  Rational rank;

  int num_steps() const { return static_cast<int>(steps.size()); }
};

struct PlanMetrics {
  int steps = 0;       // S, excluding start and end
  int open = 0;        // OC, non-fact open conditions
  int threats = 0;     // UC
  int links = 0;       // CL
  int facts = 0;       // F, fact open conditions
};

inline PlanMetrics metrics(const Plan& p) {
  PlanMetrics m;
  m.steps = p.num_steps() - 2;
  for (const OpenCondition& oc : p.open) {
    if (oc.kind == OpenCondition::Kind::Fact) {
      ++m.facts;
    } else {
      ++m.open;
    }
  }
  m.threats = static_cast<int>(p.threats.size());
  m.links = static_cast<int>(p.links.size());
  return m;
}

inline std::string step_name(const Task& task, const Plan& p, int s) {
  if (s == kStartStep) return "*start*";
  if (s == kEndStep) return "*end*";
  const Step& st = p.steps[s];
  const Schema& sc = task.schema(st.schema);
  std::string out = "(" + sc.name;
  for (int i = 0; i < sc.num_params; ++i) {
    TermId t = p.bindings.resolve(st.var(i));
    out += " " + (is_var(t) ? "?" + std::to_string(var_index(t)) : task.constant_names[t]);
  }
  return out + ")";
}

inline std::string render_plan_atom(const Task& task, const Plan& p, const Atom& a) {
  Atom r = a;
  for (int i = 0; i < a.arity; ++i) r.args[i] = p.bindings.resolve(a.args[i]);
  std::string s = "(" + task.predicate_names[r.pred];
  for (int i = 0; i < r.arity; ++i)
    s += " " + (is_var(r.args[i]) ? "?" + std::to_string(var_index(r.args[i]))
                                  : task.constant_names[r.args[i]]);
  s += ")";
  return r.negated ? "(not " + s + ")" : s;
}

// Steps in one linearization (smallest id first among ready steps).
inline std::vector<int> linearize(const Plan& p) {
  int n = p.num_steps();
  std::vector<int> order;
  std::vector<char> done(n, 0);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < n; ++s) {
      if (done[s]) continue;
      bool ready = true;
      for (int t = 0; t < n && ready; ++t)
        if (!done[t] && t != s && p.ordering.before(t, s)) ready = false;
      if (ready) {
        done[s] = 1;
        order.push_back(s);
        break;
      }
    }
  }
  return order;
}

inline std::string pretty_print(const Task& task, const Plan& p) {
  std::ostringstream o;
  int k = 0;
  for (int s : linearize(p)) {
    if (s == kStartStep || s == kEndStep) continue;
    o << ++k << ": " << step_name(task, p, s) << "\n";
  }
  o << "links:\n";
  for (const CausalLink& l : p.links)
    o << "  " << step_name(task, p, l.producer) << " --" << render_plan_atom(task, p, l.condition)
      << "--> " << step_name(task, p, l.consumer) << "\n";
  return o.str();
}

}  // namespace pocl
