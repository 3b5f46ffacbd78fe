#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pocl/const_set.hpp"
#include "pocl/op_lang.hpp"

namespace pocl {

inline constexpr int kMaxArity = 8;

// Compiled term: a constant id (>= 0) or a variable encoded as -(v + 1).
using TermId = int32_t;

inline bool is_var(TermId t) { return t < 0; }
inline TermId var_term(int v) { return -(v + 1); }
inline int var_index(TermId t) { return -t - 1; }

struct Atom {
  int pred = -1;
  uint8_t arity = 0;
  bool negated = false;
  std::array<TermId, kMaxArity> args{};

  Atom positive() const {
    Atom a = *this;
    a.negated = false;
    return a;
  }
  friend bool operator==(const Atom& a, const Atom& b) {
    if (a.pred != b.pred || a.arity != b.arity || a.negated != b.negated) return false;
    for (int i = 0; i < a.arity; ++i)
      if (a.args[i] != b.args[i]) return false;
    return true;
  }
};

// Maps schema-local variables onto plan variables starting at var_base.
inline TermId instantiate(TermId t, int var_base) {
  return is_var(t) ? var_term(var_base + var_index(t)) : t;
}

inline Atom instantiate(const Atom& a, int var_base) {
  Atom out = a;
  for (int i = 0; i < a.arity; ++i) out.args[i] = instantiate(a.args[i], var_base);
  return out;
}

struct GoalNode {
  enum class Kind : uint8_t { Atom, Fact, Eq, Neq, Or };
  Kind kind = Kind::Atom;
  pocl::Atom atom;
  std::vector<std::vector<GoalNode>> disjuncts;
};

struct EffectRef {
  int clause;
  int effect;
};

struct Clause {
  std::vector<GoalNode> antecedent;
  std::vector<Atom> effects;
  int source = 0;  // clause index in the normalized operator (0 = primary)
  std::vector<std::pair<std::string, int>> instantiation;
};

struct Schema {
  std::string name;
  int op_index = -1;
  std::vector<std::string> var_names;
  int num_params = 0;
  std::vector<GoalNode> preconditions;
  std::vector<Clause> clauses;                   // clauses[0] is the primary clause
  std::vector<std::vector<EffectRef>> by_pred;  // indexed by predicate id

  int num_vars() const { return static_cast<int>(var_names.size()); }
  const std::vector<EffectRef>& effects_for(int pred) const {
    static const std::vector<EffectRef> none;
    return pred < static_cast<int>(by_pred.size()) ? by_pred[pred] : none;
  }
};

inline constexpr int kStartSchema = -1;
inline constexpr int kEndSchema = -2;

struct Task {
  std::vector<std::string> constant_names;
  std::unordered_map<std::string, int> constant_ids;
  std::vector<std::string> predicate_names;
  std::unordered_map<std::string, int> predicate_ids;
  std::vector<bool> fact_predicate;
  std::vector<std::vector<std::vector<int>>> fact_rows;  // pred -> rows
  std::vector<Schema> schemas;
  Schema start;
  Schema end;
  std::vector<Operator> operators;  // as given (before universal expansion)
  Problem problem;
  Universe universe;

  const Schema& schema(int idx) const {
    if (idx == kStartSchema) return start;
    if (idx == kEndSchema) return end;
    return schemas[idx];
  }
  int num_constants() const { return static_cast<int>(constant_names.size()); }
  int constant(const std::string& name) const {
    auto it = constant_ids.find(lowercase(name));
    return it == constant_ids.end() ? -1 : it->second;
  }
  int predicate(const std::string& name) const {
    auto it = predicate_ids.find(lowercase(name));
    return it == predicate_ids.end() ? -1 : it->second;
  }
};

namespace detail {

class TaskBuilder {
 public:
  explicit TaskBuilder(Task& t) : task_(t) {}

  int constant(const std::string& name) {
    std::string key = lowercase(name);
    auto it = task_.constant_ids.find(key);
    if (it != task_.constant_ids.end()) return it->second;
    int id = static_cast<int>(task_.constant_names.size());
    if (id >= kMaxConstants) throw std::runtime_error("too many constants");
    task_.constant_ids.emplace(key, id);
    task_.constant_names.push_back(name);
    return id;
  }

  int predicate(const std::string& name) {
    auto it = task_.predicate_ids.find(name);
    if (it != task_.predicate_ids.end()) return it->second;
    int id = static_cast<int>(task_.predicate_names.size());
    task_.predicate_ids.emplace(name, id);
    task_.predicate_names.push_back(name);
    task_.fact_predicate.push_back(false);
    task_.fact_rows.emplace_back();
    return id;
  }

  int var(Schema& s, const std::string& name) {
    for (size_t i = 0; i < s.var_names.size(); ++i)
      if (s.var_names[i] == name) return static_cast<int>(i);
    s.var_names.push_back(name);
    return static_cast<int>(s.var_names.size()) - 1;
  }

  TermId term(Schema& s, const Term& t) {
    return t.is_variable() ? var_term(var(s, t.name)) : constant(t.name);
  }

  Atom atom(Schema& s, const Literal& l) {
    if (l.args.size() > static_cast<size_t>(kMaxArity))
      throw std::runtime_error("predicate arity above limit: " + l.predicate);
    Atom a;
    a.pred = predicate(l.predicate);
    a.arity = static_cast<uint8_t>(l.args.size());
    a.negated = l.negated;
    for (size_t i = 0; i < l.args.size(); ++i) a.args[i] = term(s, l.args[i]);
    return a;
  }

  GoalNode goal_literal(Schema& s, const Literal& l) {
    GoalNode g;
    if (l.is_eq() || l.is_neq()) {
      g.kind = (l.is_eq() != l.negated) ? GoalNode::Kind::Eq : GoalNode::Kind::Neq;
      g.atom.arity = 2;
      g.atom.args[0] = term(s, l.args[0]);
      g.atom.args[1] = term(s, l.args[1]);
      return g;
    }
    g.atom = atom(s, l);
    bool fact = l.fact || task_.fact_predicate[g.atom.pred];
    g.kind = fact ? GoalNode::Kind::Fact : GoalNode::Kind::Atom;
    return g;
  }

  void goal(Schema& s, const Formula& f, std::vector<GoalNode>& out) {
    switch (f.kind) {
      case Formula::Kind::Literal:
        out.push_back(goal_literal(s, f.literal));
        return;
      case Formula::Kind::And:
        for (const Formula& c : f.children) goal(s, c, out);
        return;
      case Formula::Kind::Exists:
        for (const TypedVar& v : f.vars) {
          var(s, v.name);
          if (!v.type.empty()) {
            Literal l;
            l.predicate = v.type;
            l.args.push_back(Term::variable(v.name));
            out.push_back(goal_literal(s, l));
          }
        }
        goal(s, f.children[0], out);
        return;
      case Formula::Kind::Or: {
        GoalNode g;
        g.kind = GoalNode::Kind::Or;
        for (const Formula& c : f.children) {
          g.disjuncts.emplace_back();
          goal(s, c, g.disjuncts.back());
        }
        if (g.disjuncts.size() == 1) {
          for (GoalNode& n : g.disjuncts[0]) out.push_back(std::move(n));
        } else {
          out.push_back(std::move(g));
        }
        return;
      }
      case Formula::Kind::Forall:
        throw std::runtime_error("universal quantifier left after expansion");
    }
  }

  static void index_effects(Schema& s, size_t num_preds) {
    s.by_pred.assign(num_preds, {});
    for (size_t c = 0; c < s.clauses.size(); ++c)
      for (size_t e = 0; e < s.clauses[c].effects.size(); ++e)
        s.by_pred[s.clauses[c].effects[e].pred].push_back({static_cast<int>(c), static_cast<int>(e)});
  }

 private:
  Task& task_;
};

}  // namespace detail

// Builds the planner's view: universals expanded, symbols interned.
inline Task compile_task(const std::vector<Operator>& ops, const Problem& prob,
                         std::optional<uint64_t> shuffle_seed = std::nullopt) {
  Task task;
  task.operators = ops;
  task.problem = prob;
  task.universe = make_universe(ops, prob);
  detail::TaskBuilder b(task);
  for (const std::string& c : task.universe.constants) b.constant(c);
  for (const auto& [pred, rows] : prob.facts) {
    int p = b.predicate(pred);
    task.fact_predicate[p] = true;
    for (const auto& row : rows) {
      std::vector<int> ids;
      for (const std::string& c : row) ids.push_back(b.constant(c));
      task.fact_rows[p].push_back(ids);
    }
  }

  task.start.name = "*start*";
  task.start.clauses.emplace_back();
  for (const Literal& l : prob.inits) task.start.clauses[0].effects.push_back(b.atom(task.start, l));

  std::mt19937_64 rng(shuffle_seed.value_or(0));
  for (size_t i = 0; i < ops.size(); ++i) {
    Operator op = expand_universals(ops[i], task.universe);
    Schema s;
    s.name = op.name;
    s.op_index = static_cast<int>(i);
    for (const std::string& p : op.parameters) b.var(s, p);
    s.num_params = static_cast<int>(op.parameters.size());
    b.goal(s, op.primary.antecedent, s.preconditions);
    if (shuffle_seed) std::shuffle(s.preconditions.begin(), s.preconditions.end(), rng);
    Clause primary;
    for (const Literal& l : op.primary.effects) primary.effects.push_back(b.atom(s, l));
    s.clauses.push_back(std::move(primary));
    for (const WhenClause& w : op.secondaries) {
      Clause c;
      b.goal(s, w.antecedent, c.antecedent);
      for (const GoalNode& g : c.antecedent)
        if (g.kind == GoalNode::Kind::Or) throw std::runtime_error("disjunctive when antecedent in " + op.name);
      for (const Literal& l : w.effects) c.effects.push_back(b.atom(s, l));
      c.source = w.source + 1;
      for (const auto& [v, k] : w.instantiation) c.instantiation.emplace_back(v, b.constant(k));
      s.clauses.push_back(std::move(c));
    }
    task.schemas.push_back(std::move(s));
  }

  task.end.name = "*end*";
  task.end.clauses.emplace_back();
  Formula goal = expand_universals(prob.goal, task.universe);
  b.goal(task.end, goal, task.end.preconditions);

  size_t np = task.predicate_names.size();
  detail::TaskBuilder::index_effects(task.start, np);
  detail::TaskBuilder::index_effects(task.end, np);
  for (Schema& s : task.schemas) detail::TaskBuilder::index_effects(s, np);
  return task;
}

inline std::string render_term(const Task& task, TermId t,
                               const std::vector<std::string>* var_names = nullptr) {
  if (!is_var(t)) return task.constant_names[t];
  int v = var_index(t);
  if (var_names && v < static_cast<int>(var_names->size())) return (*var_names)[v];
  return "?v" + std::to_string(v);
}

inline std::string render_atom(const Task& task, const Atom& a,
                               const std::vector<std::string>* var_names = nullptr) {
  std::string s = "(" + task.predicate_names[a.pred];
  for (int i = 0; i < a.arity; ++i) s += " " + render_term(task, a.args[i], var_names);
  s += ")";
  return a.negated ? "(not " + s + ")" : s;
}

}  // namespace pocl
