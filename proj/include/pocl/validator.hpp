#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pocl/op_lang.hpp"
#include "pocl/plan.hpp"
#include "pocl/task.hpp"

namespace pocl {

// Executes ground operator instances over explicit states, straight from the
// parsed operators (no compiled schemas). Constants are lowercase keys.
class GroundSimulator {
 public:
  using State = std::set<std::string>;
  using Binding = std::map<std::string, std::string>;

  GroundSimulator(const std::vector<Operator>& ops, const Problem& prob)
      : ops_(ops), prob_(prob), universe_(make_universe(ops, prob)) {
    for (const std::string& c : universe_.constants) constants_.push_back(lowercase(c));
    for (const auto& [pred, rows] : prob.facts)
      for (const auto& row : rows) {
        std::string k = pred;
        for (const std::string& c : row) k += " " + lowercase(c);
        facts_.insert(k);
      }
  }

  const std::vector<std::string>& constants() const { return constants_; }
  const Universe& universe() const { return universe_; }

  State initial() const {
    State s;
    for (const Literal& l : prob_.inits) s.insert(key(l, {}));
    return s;
  }

  bool holds(const Formula& f, const Binding& b, const State& s) const {
    switch (f.kind) {
      case Formula::Kind::Literal:
        return holds(f.literal, b, s);
      case Formula::Kind::And:
        for (const Formula& c : f.children)
          if (!holds(c, b, s)) return false;
        return true;
      case Formula::Kind::Or:
        for (const Formula& c : f.children)
          if (holds(c, b, s)) return true;
        return false;
      case Formula::Kind::Forall:
        return quantify(f, 0, b, s, true);
      case Formula::Kind::Exists:
        return quantify(f, 0, b, s, false);
    }
    return false;
  }

  bool holds(const Literal& l, const Binding& b, const State& s) const {
    if (l.is_binding()) {
      bool same = value(l.args[0], b) == value(l.args[1], b);
      return l.is_eq() ? same : !same;
    }
    std::string k = key(l, b);
    bool in = (l.fact || prob_.facts.count(l.predicate)) ? facts_.count(k) > 0 : s.count(k) > 0;
    return l.negated ? !in : in;
  }

  bool applicable(const Operator& op, const Binding& b, const State& s) const {
    return holds(op.primary.antecedent, b, s);
  }

  State apply(const Operator& op, const Binding& b, const State& s) const {
    std::vector<std::string> adds, dels;
    auto emit = [&](const Literal& l, const Binding& bb) {
      (l.negated ? dels : adds).push_back(key(l, bb));
    };
    for (const Literal& l : op.primary.effects) emit(l, b);
    for (const WhenClause& w : op.secondaries)
      for_each_instance(w.quantified, b, [&](const Binding& bb) {
        if (holds(w.antecedent, bb, s))
          for (const Literal& l : w.effects) emit(l, bb);
      });
    State out = s;
    for (const std::string& d : dels) out.erase(d);
    for (const std::string& a : adds) out.insert(a);
    return out;
  }

  template <class Fn>
  void for_each_instance(const std::vector<TypedVar>& vars, const Binding& b, Fn&& fn) const {
    if (vars.empty()) {
      fn(b);
      return;
    }
    std::vector<std::vector<std::string>> ranges;
    for (const TypedVar& v : vars) {
      ranges.emplace_back();
      for (const std::string& c : universe_.range(v.type)) ranges.back().push_back(lowercase(c));
      if (ranges.back().empty()) return;
    }
    std::vector<size_t> idx(vars.size(), 0);
    for (;;) {
      Binding bb = b;
      for (size_t i = 0; i < vars.size(); ++i) bb[vars[i].name] = ranges[i][idx[i]];
      fn(bb);
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == ranges[k].size()) idx[k++] = 0;
      if (k == idx.size()) return;
    }
  }

  bool goal(const State& s, const Binding& b) const { return holds(prob_.goal, b, s); }

 private:
  std::string value(const Term& t, const Binding& b) const {
    if (!t.is_variable()) return lowercase(t.name);
    auto it = b.find(t.name);
    if (it == b.end()) throw std::runtime_error("unbound variable " + t.name + " during simulation");
    return it->second;
  }

  std::string key(const Literal& l, const Binding& b) const {
    std::string k = l.predicate;
    for (const Term& t : l.args) k += " " + value(t, b);
    return k;
  }

  bool quantify(const Formula& f, size_t i, const Binding& b, const State& s, bool all) const {
    if (i == f.vars.size()) return holds(f.children[0], b, s);
    const TypedVar& v = f.vars[i];
    for (const std::string& c : all ? ranged(v.type) : constants_) {
      Binding bb = b;
      bb[v.name] = c;
      if (!all && !v.type.empty()) {
        Literal t;
        t.predicate = v.type;
        t.args.push_back(Term::variable(v.name));
        if (!holds(t, bb, s)) continue;
      }
      bool r = quantify(f, i + 1, bb, s, all);
      if (all && !r) return false;
      if (!all && r) return true;
    }
    return all;
  }

  std::vector<std::string> ranged(const std::string& type) const {
    std::vector<std::string> out;
    for (const std::string& c : universe_.range(type)) out.push_back(lowercase(c));
    return out;
  }

  const std::vector<Operator>& ops_;
  const Problem& prob_;
  Universe universe_;
  std::vector<std::string> constants_;
  std::set<std::string> facts_;
};

struct ValidationResult {
  bool ok = true;
  std::string message;
  long linearizations = 0;
  long instantiations = 0;
};

namespace detail {

inline void topo_orders(const Plan& p, std::vector<int>& cur, std::vector<char>& used,
                        std::vector<std::vector<int>>& out, size_t cap) {
  int n = p.num_steps();
  if (out.size() >= cap) return;
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int s = 0; s < n; ++s) {
    if (used[s]) continue;
    bool ready = true;
    for (int t = 0; t < n && ready; ++t)
      if (!used[t] && t != s && p.ordering.before(t, s)) ready = false;
    if (!ready) continue;
    used[s] = 1;
    cur.push_back(s);
    topo_orders(p, cur, used, out, cap);
    cur.pop_back();
    used[s] = 0;
    if (out.size() >= cap) return;
  }
}

}  // namespace detail

// Checks that a complete plan achieves the goal under every linearization
// and every ground instantiation of its unbound variables (both sampled when
// there are more than the caps).
inline ValidationResult validate_plan(const Task& task, const Plan& plan, size_t max_orders = 200,
                                      size_t max_instances = 64) {
  ValidationResult res;
  GroundSimulator sim(task.operators, task.problem);
  const Bindings& b = plan.bindings;

  std::vector<int> classes;
  for (int v = 0; v < b.num_vars(); ++v) {
    TermId r = b.resolve(var_term(v));
    if (is_var(r) && std::find(classes.begin(), classes.end(), var_index(r)) == classes.end())
      classes.push_back(var_index(r));
  }
  std::vector<std::vector<int>> candidates;
  size_t product = 1;
  for (int c : classes) {
    Domain d = b.domain(var_term(c));
    std::vector<int> vals;
    for (int k = 0; k < task.num_constants(); ++k)
      if (d.contains(k) && !b.known_distinct(var_term(c), k)) vals.push_back(k);
    if (vals.empty()) {
      res.ok = false;
      res.message = "variable with no admissible value";
      return res;
    }
    candidates.push_back(vals);
    product = product > max_instances ? product : product * vals.size();
  }
  std::vector<std::vector<int>> assignments;
  auto consistent = [&](const std::vector<int>& a) {
    for (const auto& [x, y] : b.neqs()) {
      auto val = [&](TermId t) {
        TermId r = b.resolve(t);
        if (!is_var(r)) return static_cast<int>(r);
        size_t i = std::find(classes.begin(), classes.end(), var_index(r)) - classes.begin();
        return a[i];
      };
      if (val(x) == val(y)) return false;
    }
    return true;
  };
  if (product <= max_instances) {
    std::vector<size_t> idx(classes.size(), 0);
    for (;;) {
      std::vector<int> a;
      for (size_t i = 0; i < classes.size(); ++i) a.push_back(candidates[i][idx[i]]);
      if (consistent(a)) assignments.push_back(a);
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == candidates[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  } else {
    std::mt19937 rng(7);
    for (size_t tries = 0; tries < max_instances * 20 && assignments.size() < max_instances; ++tries) {
      std::vector<int> a;
      for (size_t i = 0; i < classes.size(); ++i) a.push_back(candidates[i][rng() % candidates[i].size()]);
      if (consistent(a)) assignments.push_back(a);
    }
  }
  if (assignments.empty()) {
    res.ok = false;
    res.message = "no consistent instantiation";
    return res;
  }

  std::vector<std::vector<int>> orders;
  {
    std::vector<int> cur;
    std::vector<char> used(plan.num_steps(), 0);
    detail::topo_orders(plan, cur, used, orders, max_orders);
  }
  res.linearizations = static_cast<long>(orders.size());
  res.instantiations = static_cast<long>(assignments.size());

  for (const std::vector<int>& a : assignments) {
    auto value_of = [&](TermId t) {
      TermId r = b.resolve(t);
      if (!is_var(r)) return lowercase(task.constant_names[r]);
      size_t i = std::find(classes.begin(), classes.end(), var_index(r)) - classes.begin();
      return lowercase(task.constant_names[a[i]]);
    };
    auto binding_of = [&](int s) {
      GroundSimulator::Binding bind;
      const Step& st = plan.steps[s];
      const Schema& sc = task.schema(st.schema);
      for (int i = 0; i < sc.num_vars(); ++i) bind[sc.var_names[i]] = value_of(st.var(i));
      return bind;
    };
    for (const std::vector<int>& order : orders) {
      GroundSimulator::State state = sim.initial();
      for (int s : order) {
        if (s == kStartStep || s == kEndStep) continue;
        const Step& st = plan.steps[s];
        const Operator& op = task.operators[task.schema(st.schema).op_index];
        GroundSimulator::Binding bind = binding_of(s);
        if (!sim.applicable(op, bind, state)) {
          res.ok = false;
          res.message = "precondition fails for " + step_name(task, plan, s);
          return res;
        }
        state = sim.apply(op, bind, state);
      }
      if (!sim.goal(state, binding_of(kEndStep))) {
        res.ok = false;
        res.message = "goal not achieved";
        return res;
      }
    }
  }
  return res;
}

}  // namespace pocl
