#pragma once

#include <optional>
#include <vector>

#include "pocl/plan.hpp"
#include "pocl/pruning.hpp"
#include "pocl/task.hpp"

namespace pocl {

enum class ThreatClass { Definite, Potential, Expired, Spurious };

struct Establisher {
  enum class Kind : uint8_t { NewStep, Reuse, ClosedWorld, Fact, Disjunct };
  Kind kind = Kind::NewStep;
  int schema = 0;
  int step = -1;
  int clause = 0;
  int effect = -1;
  int disjunct = -1;
  int var_base = 0;
  Bindings bindings;

  bool from_start() const {
    return kind == Kind::ClosedWorld || (kind == Kind::Reuse && step == kStartStep);
  }
};

// Plan refinement operations over one task.
class Refiner {
 public:
  Refiner(const Task& task, const DomainSeed* seed, bool use_domains, PruneCounters* counters = nullptr,
          bool domain_definite = false)
      : task_(task),
        seed_(use_domains ? seed : nullptr),
        use_domains_(use_domains && seed),
        domain_definite_(use_domains_ && domain_definite),
        counters_(counters) {}

  const Task& task() const { return task_; }
  bool use_domains() const { return use_domains_; }

  std::optional<Plan> initial_plan() const {
    Plan p;
    p.steps.push_back({kStartSchema, 0});
    p.steps.push_back({kEndSchema, 0});
    const Schema& end = task_.end;
    for (int i = 0; i < end.num_vars(); ++i) {
      Domain d = use_domains_ ? seed_->domain(kEndSchema, 0, i) : Domain::any();
      if (d.empty()) return std::nullopt;
      p.bindings.add_variable(d);
    }
    if (!fold(p.bindings, end.preconditions, 0)) return std::nullopt;
    push_goals(p, end.preconditions, 0, kEndStep);
    return p;
  }

  // ---- establishment ----------------------------------------------------

  // Calls fn(Establisher&&) for each viable way to achieve the open
  // condition; fn returns false to stop early.
  template <class Fn>
  void for_each_establisher(const Plan& plan, const OpenCondition& oc, Fn&& fn,
                            bool count_pruned = false) const {
    switch (oc.kind) {
      case OpenCondition::Kind::Or:
        for_each_disjunct(plan, oc, fn);
        return;
      case OpenCondition::Kind::Fact:
        for_each_fact(plan, oc, fn);
        return;
      case OpenCondition::Kind::Atom:
        break;
    }
    const Atom& g = oc.atom;
    // New steps.
    for (size_t si = 0; si < task_.schemas.size(); ++si) {
      const Schema& sc = task_.schemas[si];
      for (const EffectRef& r : sc.effects_for(g.pred)) {
        const Atom& eff = sc.clauses[r.clause].effects[r.effect];
        if (eff.negated != g.negated) continue;
        if (!constants_compatible(plan.bindings, eff, g, plan.bindings.num_vars())) continue;
        std::optional<Establisher> e = new_step(plan, static_cast<int>(si), r, g, use_domains_);
        if (!e) {
          if (count_pruned && use_domains_ && counters_ && new_step(plan, static_cast<int>(si), r, g, false))
            ++counters_->establishers_pruned;
          continue;
        }
        if (!fn(std::move(*e))) return;
      }
    }
    // Existing steps, start first.
    for (int s = 0; s < plan.num_steps(); ++s) {
      if (s == kEndStep || s == oc.step || plan.ordering.before(oc.step, s)) continue;
      const Step& st = plan.steps[s];
      const Schema& sc = task_.schema(st.schema);
      for (const EffectRef& r : sc.effects_for(g.pred)) {
        const Atom& eff = sc.clauses[r.clause].effects[r.effect];
        if (eff.negated != g.negated) continue;
        Atom inst = instantiate(eff, st.var_base);
        if (!constants_compatible(plan.bindings, inst, g, 0)) continue;
        std::optional<Establisher> e = reuse(plan, s, r, inst, g, use_domains_);
        if (!e) {
          if (count_pruned && use_domains_ && counters_ && reuse(plan, s, r, inst, g, false))
            ++counters_->establishers_pruned;
          continue;
        }
        if (!fn(std::move(*e))) return;
      }
    }
    if (g.negated) closed_world(plan, g, task_.start.effects_for(g.pred), task_.start.clauses[0].effects,
                                Establisher::Kind::ClosedWorld, fn);
  }

  std::vector<Plan> establish(const Plan& plan, size_t oc_index) const {
    std::vector<Plan> out;
    const OpenCondition oc = plan.open[oc_index];
    for_each_establisher(
        plan, oc,
        [&](Establisher&& e) {
          if (std::optional<Plan> c = build_child(plan, oc_index, oc, std::move(e))) out.push_back(std::move(*c));
          return true;
        },
        true);
    return out;
  }

  struct EstablisherCount {
    int count = 0;
    bool first_from_start = false;
  };

  EstablisherCount count_establishers(const Plan& plan, const OpenCondition& oc, int cap) const {
    EstablisherCount c;
    for_each_establisher(plan, oc, [&](Establisher&& e) {
      if (c.count == 0) c.first_from_start = e.from_start();
      return ++c.count < cap;
    });
    return c;
  }

  // ---- threats ----------------------------------------------------------

  Atom threat_effect(const Plan& plan, const Threat& t) const {
    const Step& st = plan.steps[t.step];
    return instantiate(task_.schema(st.schema).clauses[t.clause].effects[t.effect], st.var_base);
  }

  ThreatClass classify(const Plan& plan, const Threat& t) const {
    const CausalLink& l = plan.links[t.link];
    if (!plan.ordering.possibly_between(t.step, l.producer, l.consumer)) return ThreatClass::Expired;
    Atom eff = threat_effect(plan, t);
    std::optional<Mgu> m = plan.bindings.mgu(eff, l.condition, false);
    if (!m) return ThreatClass::Expired;
    if (use_domains_ && !plan.bindings.mgu(eff, l.condition, true)) return ThreatClass::Spurious;
    if (m->empty()) return ThreatClass::Definite;
    return domain_definite_ && forced_by_domains(plan.bindings, *m) ? ThreatClass::Definite : ThreatClass::Potential;
  }

  // Every pair of the unifier is pinned to one and the same constant.
  static bool forced_by_domains(const Bindings& b, const Mgu& m) {
    for (const auto& [x, y] : m) {
      Domain dx = b.domain(x), dy = b.domain(y);
      if (dx.top || dy.top || dx.set.size() != 1 || !(dx == dy)) return false;
    }
    return true;
  }

  // Removes threats that parameter domains show can never unify; returns
  // the number removed.
  int drop_spurious(Plan& plan) const {
    if (!use_domains_) return 0;
    size_t before = plan.threats.size();
    std::erase_if(plan.threats, [&](const Threat& t) { return classify(plan, t) == ThreatClass::Spurious; });
    int n = static_cast<int>(before - plan.threats.size());
    if (counters_) counters_->threats_dropped += n;
    return n;
  }

  bool has_spurious(const Plan& plan) const {
    if (!use_domains_) return false;
    for (const Threat& t : plan.threats)
      if (classify(plan, t) == ThreatClass::Spurious) return true;
    return false;
  }

  // Children in order: promotion, demotion, confrontation, separation.
  std::vector<Plan> resolve_threat(const Plan& plan, size_t ti, bool allow_separation) const {
    std::vector<Plan> out;
    const Threat t = plan.threats[ti];
    ThreatClass cls = classify(plan, t);
    Plan base = plan;
    base.threats.erase(base.threats.begin() + static_cast<long>(ti));
    if (cls == ThreatClass::Expired || cls == ThreatClass::Spurious) {
      if (cls == ThreatClass::Spurious && counters_) ++counters_->threats_dropped;
      out.push_back(std::move(base));
      return out;
    }
    const CausalLink& l = plan.links[t.link];
    {
      Plan c = base;
      if (c.ordering.constrain(l.consumer, t.step)) out.push_back(std::move(c));
    }
    {
      Plan c = base;
      if (c.ordering.constrain(t.step, l.producer)) out.push_back(std::move(c));
    }
    Atom eff = threat_effect(plan, t);
    Mgu m = *plan.bindings.mgu(eff, l.condition, use_domains_);
    const Step& st = plan.steps[t.step];
    if (t.clause > 0) {
      for (const GoalNode& n : task_.schema(st.schema).clauses[t.clause].antecedent) {
        if (n.kind == GoalNode::Kind::Fact) continue;
        Plan c = base;
        bool ok = true;
        for (const auto& [x, y] : m) ok = ok && c.bindings.add_eq(x, y);
        if (!ok) continue;
        if (!deny(c, n, st.var_base, t.step)) continue;
        out.push_back(std::move(c));
      }
    }
    if (cls == ThreatClass::Potential && allow_separation) {
      for (const auto& [x, y] : m) {
        Plan c = base;
        if (c.bindings.add_neq(x, y)) out.push_back(std::move(c));
      }
    }
    return out;
  }

  int threat_repair_cost(const Plan& plan, const Threat& t, bool allow_separation) const {
    ThreatClass cls = classify(plan, t);
    if (cls == ThreatClass::Expired || cls == ThreatClass::Spurious) return 0;
    const CausalLink& l = plan.links[t.link];
    int n = 0;
    if (l.consumer != t.step && !plan.ordering.before(t.step, l.consumer)) ++n;
    if (l.producer != t.step && !plan.ordering.before(l.producer, t.step)) ++n;
    Atom eff = threat_effect(plan, t);
    Mgu m = *plan.bindings.mgu(eff, l.condition, use_domains_);
    const Step& st = plan.steps[t.step];
    if (t.clause > 0) {
      for (const GoalNode& g : task_.schema(st.schema).clauses[t.clause].antecedent) {
        if (g.kind == GoalNode::Kind::Fact) continue;
        Bindings b = plan.bindings;
        bool ok = true;
        for (const auto& [x, y] : m) ok = ok && b.add_eq(x, y);
        if (!ok) continue;
        if (g.kind == GoalNode::Kind::Eq) {
          ok = b.add_neq(instantiate(g.atom.args[0], st.var_base), instantiate(g.atom.args[1], st.var_base));
        } else if (g.kind == GoalNode::Kind::Neq) {
          ok = b.add_eq(instantiate(g.atom.args[0], st.var_base), instantiate(g.atom.args[1], st.var_base));
        }
        if (ok) ++n;
      }
    }
    if (cls == ThreatClass::Potential && allow_separation) {
      for (const auto& [x, y] : m) {
        Bindings b = plan.bindings;
        if (b.add_neq(x, y)) ++n;
      }
    }
    return n;
  }

  bool is_complete(const Plan& plan) const {
    if (!plan.open.empty()) return false;
    for (const Threat& t : plan.threats) {
      ThreatClass c = classify(plan, t);
      if (c != ThreatClass::Expired && c != ThreatClass::Spurious) return false;
    }
    return true;
  }

  // Threats against one link from every other step.
  void detect_link_threats(Plan& p, int li, bool filter) const {
    const CausalLink l = p.links[li];
    for (int s = 2; s < p.num_steps(); ++s) {
      if (!p.ordering.possibly_between(s, l.producer, l.consumer)) continue;
      check_step_against_link(p, s, li, l, filter);
    }
  }

  // Threats from one step against every link except skip_link.
  void detect_step_threats(Plan& p, int s, bool filter, int skip_link) const {
    for (int li = 0; li < static_cast<int>(p.links.size()); ++li) {
      if (li == skip_link) continue;
      const CausalLink& l = p.links[li];
      if (!p.ordering.possibly_between(s, l.producer, l.consumer)) continue;
      check_step_against_link(p, s, li, l, filter);
    }
  }

 private:
  void check_step_against_link(Plan& p, int s, int li, const CausalLink& l, bool filter) const {
    const Step st = p.steps[s];
    const Schema& sc = task_.schema(st.schema);
    for (const EffectRef& r : sc.effects_for(l.condition.pred)) {
      const Atom& eff = sc.clauses[r.clause].effects[r.effect];
      if (eff.negated == l.condition.negated) continue;
      Atom inst = instantiate(eff, st.var_base);
      if (!constants_compatible(p.bindings, inst, l.condition, 0)) continue;
      bool check = filter && use_domains_;
      if (!p.bindings.mgu(inst, l.condition, check)) {
        if (check && counters_ && p.bindings.mgu(inst, l.condition, false)) ++counters_->threats_suppressed;
        continue;
      }
      p.threats.push_back({s, r.clause, r.effect, li, p.next_seq++});
    }
  }

  // Cheap rejection on constant clashes. Variables at or beyond fresh_from
  // are not in the store yet and are skipped.
  static bool constants_compatible(const Bindings& b, const Atom& eff, const Atom& g, int fresh_from) {
    if (eff.arity != g.arity) return false;
    for (int i = 0; i < eff.arity; ++i) {
      TermId e = eff.args[i];
      if (is_var(e) && (fresh_from > 0 || var_index(e) >= b.num_vars())) continue;
      TermId x = b.resolve(e), y = b.resolve(g.args[i]);
      if (!is_var(x) && !is_var(y) && x != y) return false;
    }
    return true;
  }

  bool fold(Bindings& b, const std::vector<GoalNode>& nodes, int base) const {
    for (const GoalNode& n : nodes) {
      if (n.kind == GoalNode::Kind::Eq) {
        if (!b.add_eq(instantiate(n.atom.args[0], base), instantiate(n.atom.args[1], base))) return false;
      } else if (n.kind == GoalNode::Kind::Neq) {
        if (!b.add_neq(instantiate(n.atom.args[0], base), instantiate(n.atom.args[1], base))) return false;
      }
    }
    return true;
  }

  static void push_goals(Plan& p, const std::vector<GoalNode>& nodes, int base, int step) {
    for (auto it = nodes.begin(); it != nodes.end(); ++it) {
      OpenCondition oc;
      oc.step = step;
      switch (it->kind) {
        case GoalNode::Kind::Atom:
          oc.kind = OpenCondition::Kind::Atom;
          oc.atom = instantiate(it->atom, base);
          break;
        case GoalNode::Kind::Fact:
          oc.kind = OpenCondition::Kind::Fact;
          oc.atom = instantiate(it->atom, base);
          break;
        case GoalNode::Kind::Or:
          oc.kind = OpenCondition::Kind::Or;
          oc.node = &*it;
          oc.var_base = base;
          break;
        default:
          continue;
      }
      oc.seq = p.next_seq++;
      p.open.push_back(oc);
    }
  }

  // Adds the negation of an antecedent literal of step s.
  bool deny(Plan& c, const GoalNode& n, int base, int s) const {
    TermId a = instantiate(n.atom.args[0], base), b = instantiate(n.atom.args[1], base);
    switch (n.kind) {
      case GoalNode::Kind::Eq:
        return c.bindings.add_neq(a, b);
      case GoalNode::Kind::Neq:
        return c.bindings.add_eq(a, b);
      case GoalNode::Kind::Atom: {
        OpenCondition oc;
        oc.kind = OpenCondition::Kind::Atom;
        oc.atom = instantiate(n.atom, base);
        oc.atom.negated = !oc.atom.negated;
        oc.step = s;
        oc.seq = c.next_seq++;
        c.open.push_back(oc);
        return true;
      }
      default:
        return false;
    }
  }

  Domain seed_domain(int schema, int clause, int var) const {
    Domain d = seed_->domain(schema, 0, var);
    if (clause > 0) d.intersect(seed_->domain(schema, clause, var));
    return d;
  }

  std::optional<Establisher> new_step(const Plan& plan, int si, const EffectRef& r, const Atom& g,
                                      bool domains) const {
    if (domains && (!seed_->viable(si, 0) || !seed_->viable(si, r.clause))) return std::nullopt;
    const Schema& sc = task_.schemas[si];
    Establisher e;
    e.kind = Establisher::Kind::NewStep;
    e.schema = si;
    e.clause = r.clause;
    e.effect = r.effect;
    e.bindings = plan.bindings;
    e.var_base = e.bindings.num_vars();
    for (int i = 0; i < sc.num_vars(); ++i) {
      Domain d = domains ? seed_domain(si, r.clause, i) : Domain::any();
      if (d.empty()) return std::nullopt;
      e.bindings.add_variable(d);
    }
    if (!fold(e.bindings, sc.preconditions, e.var_base)) return std::nullopt;
    if (r.clause > 0 && !fold(e.bindings, sc.clauses[r.clause].antecedent, e.var_base)) return std::nullopt;
    Atom inst = instantiate(sc.clauses[r.clause].effects[r.effect], e.var_base);
    if (!e.bindings.unify(inst, g, true)) return std::nullopt;
    return e;
  }

  std::optional<Establisher> reuse(const Plan& plan, int s, const EffectRef& r, const Atom& inst,
                                   const Atom& g, bool domains) const {
    const Step& st = plan.steps[s];
    Establisher e;
    e.kind = Establisher::Kind::Reuse;
    e.step = s;
    e.schema = st.schema;
    e.clause = r.clause;
    e.effect = r.effect;
    e.var_base = st.var_base;
    e.bindings = plan.bindings;
    if (r.clause > 0) {
      if (st.schema >= 0 && domains) {
        if (!seed_->viable(st.schema, r.clause)) return std::nullopt;
        const Schema& sc = task_.schema(st.schema);
        for (int i = 0; i < sc.num_vars(); ++i)
          if (!e.bindings.restrict(st.var(i), seed_->domain(st.schema, r.clause, i))) return std::nullopt;
      }
      if (!fold(e.bindings, task_.schema(st.schema).clauses[r.clause].antecedent, st.var_base))
        return std::nullopt;
    }
    if (!e.bindings.unify(inst, g, domains || !use_domains_)) return std::nullopt;
    return e;
  }

  // A negative goal holds initially (or against a fact table) when it
  // differs from every matching positive atom: one child per combination of
  // chosen non-codesignations.
  template <class Fn>
  bool closed_world(const Plan& plan, const Atom& g, const std::vector<EffectRef>& refs,
                    const std::vector<Atom>& atoms, Establisher::Kind kind, Fn&& fn) const {
    std::vector<Mgu> mgus;
    Atom pos = g.positive();
    for (const EffectRef& r : refs) {
      const Atom& a = atoms[r.effect];
      if (a.negated) continue;
      std::optional<Mgu> m = plan.bindings.mgu(pos, a, true);
      if (!m) continue;
      if (m->empty()) return true;
      mgus.push_back(std::move(*m));
    }
    Establisher e;
    e.kind = kind;
    e.step = kStartStep;
    e.schema = kStartSchema;
    e.bindings = plan.bindings;
    return choose_neqs(mgus, 0, e, fn);
  }

  template <class Fn>
  bool choose_neqs(const std::vector<Mgu>& mgus, size_t k, const Establisher& e, Fn&& fn) const {
    if (k == mgus.size()) {
      Establisher copy = e;
      return fn(std::move(copy));
    }
    // Already excluded by earlier choices.
    for (const auto& [x, y] : mgus[k])
      if (e.bindings.known_distinct(x, y)) return choose_neqs(mgus, k + 1, e, fn);
    for (const auto& [x, y] : mgus[k]) {
      Establisher next = e;
      if (!next.bindings.add_neq(x, y)) continue;
      if (!choose_neqs(mgus, k + 1, next, fn)) return false;
    }
    return true;
  }

  template <class Fn>
  void for_each_fact(const Plan& plan, const OpenCondition& oc, Fn&& fn) const {
    const Atom& g = oc.atom;
    const auto& rows = task_.fact_rows[g.pred];
    if (g.negated) {
      std::vector<Atom> atoms;
      std::vector<EffectRef> refs;
      for (const auto& row : rows) {
        Atom a;
        a.pred = g.pred;
        a.arity = static_cast<uint8_t>(row.size());
        for (size_t i = 0; i < row.size(); ++i) a.args[i] = row[i];
        refs.push_back({0, static_cast<int>(atoms.size())});
        atoms.push_back(a);
      }
      closed_world(plan, g, refs, atoms, Establisher::Kind::Fact, fn);
      return;
    }
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != g.arity) continue;
      bool ok = true;
      for (int i = 0; i < g.arity && ok; ++i) {
        TermId x = plan.bindings.resolve(g.args[i]);
        if (!is_var(x) && x != row[i]) ok = false;
      }
      if (!ok) continue;
      Establisher e;
      e.kind = Establisher::Kind::Fact;
      e.bindings = plan.bindings;
      for (int i = 0; i < g.arity && ok; ++i) ok = e.bindings.add_eq(g.args[i], row[i]);
      if (!ok) continue;
      if (!fn(std::move(e))) return;
    }
  }

  template <class Fn>
  void for_each_disjunct(const Plan& plan, const OpenCondition& oc, Fn&& fn) const {
    for (size_t d = 0; d < oc.node->disjuncts.size(); ++d) {
      Establisher e;
      e.kind = Establisher::Kind::Disjunct;
      e.disjunct = static_cast<int>(d);
      e.bindings = plan.bindings;
      if (!fold(e.bindings, oc.node->disjuncts[d], oc.var_base)) continue;
      if (!fn(std::move(e))) return;
    }
  }

  std::optional<Plan> build_child(const Plan& plan, size_t oc_index, const OpenCondition& oc,
                                  Establisher&& e) const {
    Plan c = plan;
    c.bindings = std::move(e.bindings);
    c.open.erase(c.open.begin() + static_cast<long>(oc_index));
    switch (e.kind) {
      case Establisher::Kind::NewStep: {
        int s = c.num_steps();
        c.steps.push_back({e.schema, e.var_base});
        c.ordering.add_step();
        const Schema& sc = task_.schemas[e.schema];
        if (e.clause > 0) push_goals(c, sc.clauses[e.clause].antecedent, e.var_base, s);
        push_goals(c, sc.preconditions, e.var_base, s);
        if (!c.ordering.constrain(s, oc.step)) return std::nullopt;
        c.links.push_back({s, oc.atom, oc.step});
        int li = static_cast<int>(c.links.size()) - 1;
        detect_link_threats(c, li, false);
        detect_step_threats(c, s, true, li);
        break;
      }
      case Establisher::Kind::Reuse:
      case Establisher::Kind::ClosedWorld: {
        if (!c.ordering.constrain(e.step, oc.step)) return std::nullopt;
        if (e.kind == Establisher::Kind::Reuse && e.clause > 0)
          push_goals(c, task_.schema(e.schema).clauses[e.clause].antecedent, e.var_base, e.step);
        c.links.push_back({e.step, oc.atom, oc.step});
        detect_link_threats(c, static_cast<int>(c.links.size()) - 1, true);
        break;
      }
      case Establisher::Kind::Fact:
        break;
      case Establisher::Kind::Disjunct:
        push_goals(c, oc.node->disjuncts[e.disjunct], oc.var_base, oc.step);
        break;
    }
    return c;
  }

  const Task& task_;
  const DomainSeed* seed_;
  bool use_domains_;
  bool domain_definite_;
  PruneCounters* counters_;
};

}  // namespace pocl
