#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pocl/const_set.hpp"
#include "pocl/op_lang.hpp"

namespace pocl {

struct ClauseDomains {
  std::string op;
  int clause = 0;  // 0 = primary
  std::vector<std::string> vars;
  std::vector<Domain> domains;   // intersected domains, TOP when unconstrained
  std::vector<Domain> unions;    // union domains
  std::vector<Literal> unreachable;
  bool reachable = false;        // every relevant precondition was matched

  int var_index(const std::string& v) const {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == v) return static_cast<int>(i);
    return -1;
  }
};

struct DomainTable {
  std::vector<std::string> constants;  // display names, index = id
  std::unordered_map<std::string, int> constant_ids;
  std::vector<ClauseDomains> clauses;  // operators in order, clauses in order, then *end*
  int propagations = 0;                // number of W entries processed

  const ClauseDomains* find(const std::string& op, int clause) const {
    for (const ClauseDomains& c : clauses)
      if (c.op == op && c.clause == clause) return &c;
    return nullptr;
  }

  std::optional<Domain> domain(const std::string& op, int clause, const std::string& var) const {
    const ClauseDomains* c = find(op, clause);
    if (!c) return std::nullopt;
    int i = c->var_index(var);
    if (i < 0) return std::nullopt;
    return c->domains[i];
  }

  std::set<std::string> names(const Domain& d) const {
    std::set<std::string> out;
    for (int c : d.set.elements()) out.insert(constants[c]);
    return out;
  }

  int constant(const std::string& name) const {
    auto it = constant_ids.find(lowercase(name));
    return it == constant_ids.end() ? -1 : it->second;
  }
};

enum class PropagationVariant { Baseline, Improved };

namespace detail {

struct PreRec {
  int clause;                // owning clause record
  std::string pred;
  std::vector<int> args;     // >= 0 constant, < 0 variable -(i + 1) in the operator
  Literal source;
  bool matched = false;
  std::vector<int> vars;     // distinct variables
  std::vector<Domain> ids;   // individual domain per entry of vars
};

struct EffRec {
  std::string pred;
  std::vector<int> args;
};

struct ClauseRec {
  int op;
  int index;
  std::vector<int> relevant;    // precondition records (own + primary)
  std::vector<int> own;         // own precondition records
  std::vector<Literal> eqs;     // relevant equality literals
  std::vector<EffRec> effects;  // positive effects
  std::vector<char> relevant_var;
  std::vector<Domain> id;
  bool activated = false;
};

struct OpRec {
  std::string name;
  std::vector<std::string> vars;
  std::vector<int> clauses;
};

class DomainFinder {
 public:
  DomainFinder(const std::vector<Operator>& ops, const Problem& prob) {
    std::set<std::string> fact_preds;
    for (const auto& [p, rows] : prob.facts) fact_preds.insert(p);
    Universe u = make_universe(ops, prob);
    for (const std::string& c : u.constants) constant(c);
    for (const Literal& l : prob.inits) {
      EffRec e{l.predicate, {}};
      for (const Term& t : l.args) e.args.push_back(constant(t.name));
      inits_.push_back(e);
    }
    for (const Operator& raw : ops) add_operator(normalize_for_preprocessing(raw, fact_preds));
    Operator end;
    end.name = "*end*";
    end.primary.antecedent = normalize_goal(prob.goal, fact_preds);
    for (const Formula& f : end.primary.antecedent.children)
      for (const Term& t : f.literal.args)
        if (t.is_variable() && std::find(end.parameters.begin(), end.parameters.end(), t.name) ==
                                   end.parameters.end())
          end.parameters.push_back(t.name);
    add_operator(end);
  }

  DomainTable run(PropagationVariant variant,
                  std::vector<std::vector<Domain>>* snapshots = nullptr) {
    int props = 0;
    // Work items are (clause, effect) pairs; clause -1 is the initial state.
    std::vector<std::pair<int, int>> work;
    for (size_t e = 0; e < inits_.size(); ++e) work.emplace_back(-1, static_cast<int>(e));
    bool first_round = true;
    while (!work.empty() || first_round) {
      // Clauses without relevant preconditions are enabled from the start.
      std::vector<char> touched(clauses_.size(), first_round ? 1 : 0);
      first_round = false;
      for (const auto& [c, e] : work) {
        ++props;
        const EffRec& eff = c < 0 ? inits_[e] : clauses_[c].effects[e];
        propagate(eff, c, touched);
      }
      work.clear();
      for (size_t c = 0; c < clauses_.size(); ++c) {
        if (!touched[c]) continue;
        ClauseRec& cl = clauses_[c];
        bool all_matched = std::all_of(cl.relevant.begin(), cl.relevant.end(),
                                       [&](int p) { return pres_[p].matched; });
        if (!all_matched) continue;
        std::vector<char> enlarged(cl.id.size(), 0);
        bool any = false, nonempty = true;
        for (size_t v = 0; v < cl.id.size(); ++v) {
          if (!cl.relevant_var[v]) continue;
          Domain d = intersected(cl, static_cast<int>(v));
          if (!(d == cl.id[v])) {
            enlarged[v] = 1;
            any = true;
            cl.id[v] = d;
          }
          if (d.empty()) nonempty = false;
        }
        bool first = !cl.activated;
        if (!nonempty || !(any || first)) continue;
        cl.activated = true;
        for (size_t e = 0; e < cl.effects.size(); ++e) {
          bool send = first || variant == PropagationVariant::Baseline;
          for (int a : cl.effects[e].args)
            if (a < 0 && enlarged[-a - 1]) send = true;
          if (send) work.emplace_back(static_cast<int>(c), static_cast<int>(e));
        }
      }
      if (snapshots) {
        std::vector<Domain> snap;
        for (const ClauseRec& cl : clauses_)
          for (const Domain& d : cl.id) snap.push_back(d);
        snapshots->push_back(std::move(snap));
      }
    }
    apply_equalities();
    DomainTable table;
    table.constants = constants_;
    table.constant_ids = constant_ids_;
    table.propagations = props;
    for (size_t c = 0; c < clauses_.size(); ++c) {
      const ClauseRec& cl = clauses_[c];
      ClauseDomains out;
      out.op = ops_[cl.op].name;
      out.clause = cl.index;
      out.vars = ops_[cl.op].vars;
      out.domains = cl.id;
      out.reachable = std::all_of(cl.relevant.begin(), cl.relevant.end(),
                                  [&](int p) { return pres_[p].matched; });
      for (int p : cl.own)
        if (!pres_[p].matched) out.unreachable.push_back(pres_[p].source);
      table.clauses.push_back(std::move(out));
    }
    compute_unions(table);
    return table;
  }

 private:
  int constant(const std::string& name) {
    std::string key = lowercase(name);
    auto it = constant_ids_.find(key);
    if (it != constant_ids_.end()) return it->second;
    int id = static_cast<int>(constants_.size());
    if (id >= kMaxConstants) throw std::runtime_error("too many constants");
    constant_ids_.emplace(key, id);
    constants_.push_back(name);
    return id;
  }

  static int var_of(const OpRec& op, const std::string& v) {
    for (size_t i = 0; i < op.vars.size(); ++i)
      if (op.vars[i] == v) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> args(const OpRec& op, const Literal& l) {
    std::vector<int> out;
    for (const Term& t : l.args) {
      if (!t.is_variable()) {
        out.push_back(constant(t.name));
        continue;
      }
      int v = var_of(op, t.name);
      if (v < 0) throw std::runtime_error("undeclared variable " + t.name + " in " + op.name);
      out.push_back(-(v + 1));
    }
    return out;
  }

  void add_operator(const Operator& op) {
    int oi = static_cast<int>(ops_.size());
    ops_.push_back({op.name, op.parameters, {}});
    OpRec& rec = ops_.back();
    std::vector<int> primary_pres;
    std::vector<Literal> primary_eqs;
    auto add_pres = [&](const Formula& ante, int clause, std::vector<int>& into, std::vector<Literal>& eqs) {
      for (const Formula& f : ante.children) {
        const Literal& l = f.literal;
        if (l.is_eq() && !l.negated) {
          eqs.push_back(l);
          continue;
        }
        if (l.is_binding() || l.negated) continue;
        PreRec p;
        p.clause = clause;
        p.pred = l.predicate;
        p.args = args(rec, l);
        p.source = l;
        for (int a : p.args)
          if (a < 0 && std::find(p.vars.begin(), p.vars.end(), a) == p.vars.end()) p.vars.push_back(a);
        p.ids.assign(p.vars.size(), Domain::none());
        into.push_back(static_cast<int>(pres_.size()));
        pres_.push_back(std::move(p));
      }
    };
    auto make_clause = [&](int index, const std::vector<Literal>& effects) {
      ClauseRec c;
      c.op = oi;
      c.index = index;
      for (const Literal& l : effects)
        if (!l.negated) c.effects.push_back({l.predicate, args(rec, l)});
      return c;
    };

    int ci = static_cast<int>(clauses_.size());
    ClauseRec primary = make_clause(0, op.primary.effects);
    add_pres(op.primary.antecedent, ci, primary_pres, primary_eqs);
    primary.relevant = primary_pres;
    primary.own = primary_pres;
    primary.eqs = primary_eqs;
    clauses_.push_back(std::move(primary));
    rec.clauses.push_back(ci);
    for (size_t k = 0; k < op.secondaries.size(); ++k) {
      int cj = static_cast<int>(clauses_.size());
      ClauseRec c = make_clause(static_cast<int>(k) + 1, op.secondaries[k].effects);
      std::vector<int> own;
      std::vector<Literal> eqs = primary_eqs;
      add_pres(op.secondaries[k].antecedent, cj, own, eqs);
      c.own = own;
      c.relevant = primary_pres;
      c.relevant.insert(c.relevant.end(), own.begin(), own.end());
      c.eqs = eqs;
      clauses_.push_back(std::move(c));
      ops_[oi].clauses.push_back(cj);
    }
    for (int c : ops_[oi].clauses) {
      ClauseRec& cl = clauses_[c];
      size_t nv = ops_[oi].vars.size();
      cl.relevant_var.assign(nv, 0);
      for (int p : cl.relevant)
        for (int a : pres_[p].vars) cl.relevant_var[-a - 1] = 1;
      cl.id.assign(nv, Domain::any());
      for (size_t v = 0; v < nv; ++v)
        if (cl.relevant_var[v]) cl.id[v] = Domain::none();
      for (int p : cl.relevant) pre_clauses_[p].push_back(c);
    }
    by_pred_.clear();
    for (size_t p = 0; p < pres_.size(); ++p) by_pred_[pres_[p].pred].push_back(static_cast<int>(p));
  }

  Domain intersected(const ClauseRec& cl, int v) const {
    Domain acc = Domain::any();
    for (int p : cl.relevant) {
      const PreRec& pr = pres_[p];
      for (size_t i = 0; i < pr.vars.size(); ++i)
        if (-pr.vars[i] - 1 == v) acc.intersect(pr.ids[i]);
    }
    return acc;
  }

  // Matches one effect (with its clause's intersected domains) against every
  // precondition sharing its predicate.
  void propagate(const EffRec& eff, int c, std::vector<char>& touched) {
    auto it = by_pred_.find(eff.pred);
    if (it == by_pred_.end()) return;
    for (int p : it->second) {
      PreRec& pr = pres_[p];
      if (pr.args.size() != eff.args.size()) continue;
      std::vector<Domain> contrib;
      if (!match(eff, c, pr, contrib)) continue;
      bool changed = !pr.matched;
      pr.matched = true;
      for (size_t i = 0; i < pr.vars.size(); ++i) changed = pr.ids[i].unite(contrib[i]) || changed;
      if (changed)
        for (int cl : pre_clauses_[p]) touched[cl] = 1;
    }
  }

  bool match(const EffRec& eff, int c, const PreRec& pr, std::vector<Domain>& contrib) const {
    size_t n = eff.args.size();
    // Effect variables pinned to constants of the precondition.
    std::vector<std::pair<int, int>> pinned;
    auto eff_domain = [&](int u) -> Domain {
      for (const auto& [v, k] : pinned)
        if (v == u) return Domain::of(ConstSet{k});
      return clauses_[c].id[-u - 1];
    };
    for (size_t i = 0; i < n; ++i) {
      int e = eff.args[i], q = pr.args[i];
      if (e >= 0 && q >= 0) {
        if (e != q) return false;
      } else if (e < 0 && q >= 0) {
        if (!clauses_[c].id[-e - 1].contains(q)) return false;
        for (const auto& [v, k] : pinned)
          if (v == e && k != q) return false;
        pinned.emplace_back(e, q);
      }
    }
    contrib.assign(pr.vars.size(), Domain::any());
    for (size_t i = 0; i < n; ++i) {
      int e = eff.args[i], q = pr.args[i];
      if (q >= 0) continue;
      size_t slot = std::find(pr.vars.begin(), pr.vars.end(), q) - pr.vars.begin();
      contrib[slot].intersect(e >= 0 ? Domain::of(ConstSet{e}) : eff_domain(e));
    }
    for (const Domain& d : contrib)
      if (d.empty()) return false;
    return true;
  }

  void apply_equalities() {
    for (ClauseRec& cl : clauses_) {
      for (const Literal& l : cl.eqs) {
        const OpRec& op = ops_[cl.op];
        const Term& a = l.args[0];
        const Term& b = l.args[1];
        if (a.is_variable() && b.is_variable()) {
          int x = var_of(op, a.name), y = var_of(op, b.name);
          Domain d = cl.id[x];
          d.intersect(cl.id[y]);
          cl.id[x] = d;
          cl.id[y] = d;
        } else if (a.is_variable() || b.is_variable()) {
          const Term& v = a.is_variable() ? a : b;
          const Term& k = a.is_variable() ? b : a;
          int x = var_of(op, v.name);
          cl.id[x].intersect(Domain::of(ConstSet{constant_id(k.name)}));
        }
      }
    }
  }

  int constant_id(const std::string& name) const { return constant_ids_.at(lowercase(name)); }

  // Chains partially bound predications forward from the initial state,
  // one matched precondition at a time; wildcards are -1.
  void compute_unions(DomainTable& table) {
    for (size_t c = 0; c < clauses_.size(); ++c)
      table.clauses[c].unions.assign(clauses_[c].id.size(), Domain::none());
    std::set<std::pair<std::string, std::vector<int>>> seen;
    std::vector<std::pair<std::string, std::vector<int>>> queue;
    for (const EffRec& e : inits_)
      if (seen.insert({e.pred, e.args}).second) queue.emplace_back(e.pred, e.args);
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      auto item = queue[qi];
      auto it = by_pred_.find(item.first);
      if (it == by_pred_.end()) continue;
      for (int p : it->second) {
        const PreRec& pr = pres_[p];
        if (pr.args.size() != item.second.size()) continue;
        std::vector<int> bound(ops_[clauses_[pr.clause].op].vars.size(), -1);
        bool ok = true;
        for (size_t i = 0; i < pr.args.size() && ok; ++i) {
          int q = pr.args[i], k = item.second[i];
          if (q >= 0) {
            ok = k < 0 || k == q;
          } else if (k >= 0) {
            int& slot = bound[-q - 1];
            if (slot >= 0 && slot != k) ok = false;
            slot = k;
          }
        }
        if (!ok) continue;
        for (int cl : pre_clauses_[p]) {
          for (size_t v = 0; v < bound.size(); ++v)
            if (bound[v] >= 0) table.clauses[cl].unions[v].set.insert(bound[v]);
          for (const EffRec& e : clauses_[cl].effects) {
            std::vector<int> out;
            for (int a : e.args) out.push_back(a >= 0 ? a : bound[-a - 1]);
            if (seen.insert({e.pred, out}).second) queue.emplace_back(e.pred, out);
          }
        }
      }
    }
    // Equality constraints bind variables no precondition mentions.
    for (size_t c = 0; c < clauses_.size(); ++c) {
      const ClauseRec& cl = clauses_[c];
      std::vector<Domain>& un = table.clauses[c].unions;
      for (const Literal& l : cl.eqs) {
        const OpRec& op = ops_[cl.op];
        const Term& a = l.args[0];
        const Term& b = l.args[1];
        if (a.is_variable() && b.is_variable()) {
          int x = var_of(op, a.name), y = var_of(op, b.name);
          un[x].unite(un[y]);
          un[y] = un[x];
        } else if (a.is_variable() || b.is_variable()) {
          const Term& v = a.is_variable() ? a : b;
          const Term& k = a.is_variable() ? b : a;
          un[var_of(op, v.name)].unite(Domain::of(ConstSet{constant_id(k.name)}));
        }
      }
    }
  }

  std::vector<std::string> constants_;
  std::unordered_map<std::string, int> constant_ids_;
  std::vector<EffRec> inits_;
  std::vector<OpRec> ops_;
  std::vector<ClauseRec> clauses_;
  std::vector<PreRec> pres_;
  std::map<int, std::vector<int>> pre_clauses_;
  std::map<std::string, std::vector<int>> by_pred_;
};

}  // namespace detail

inline DomainTable find_parameter_domains(const std::vector<Operator>& ops, const Problem& prob,
                                          PropagationVariant variant = PropagationVariant::Baseline,
                                          std::vector<std::vector<Domain>>* snapshots = nullptr) {
  return detail::DomainFinder(ops, prob).run(variant, snapshots);
}

// Average intersected size over average union size, TOP entries and *end* excluded.
inline std::optional<double> domain_ratio(const DomainTable& t) {
  long inter = 0, uni = 0;
  for (const ClauseDomains& c : t.clauses) {
    if (c.op == "*end*") continue;
    for (size_t v = 0; v < c.vars.size(); ++v) {
      if (c.domains[v].top) continue;
      inter += c.domains[v].set.size();
      uni += c.unions[v].top ? 0 : c.unions[v].set.size();
    }
  }
  if (inter == 0 || uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::vector<std::string> sorted_names(const DomainTable& t, const Domain& d) {
  std::vector<std::string> out;
  for (int c : d.set.elements()) out.push_back(t.constants[c]);
  std::sort(out.begin(), out.end(),
            [](const std::string& a, const std::string& b) { return lowercase(a) < lowercase(b); });
  return out;
}

inline std::string render_clause_domains(const DomainTable& t, const ClauseDomains& c) {
  std::string s = "(" + c.op;
  for (size_t v = 0; v < c.vars.size(); ++v) {
    s += " (" + c.vars[v];
    if (c.domains[v].top) {
      s += " T";
    } else {
      for (const std::string& n : sorted_names(t, c.domains[v])) s += " " + n;
    }
    s += ")";
  }
  for (const Literal& l : c.unreachable) s += " " + render(l);
  return s + ")";
}

// One list per when-clause, in operator order; the goal pseudo-operator is
// listed only when it has variables or unreached goals.
inline std::string render_domain_report(const DomainTable& t) {
  std::string s;
  for (const ClauseDomains& c : t.clauses) {
    if (c.op == "*end*" && c.vars.empty() && c.unreachable.empty()) continue;
    s += render_clause_domains(t, c) + "\n";
  }
  return s;
}

}  // namespace pocl
