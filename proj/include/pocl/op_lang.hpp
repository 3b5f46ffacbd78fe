#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pocl/sexpr.hpp"

namespace pocl {

struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  std::string name;

  static Term variable(std::string n) { return Term{Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return Term{Kind::Constant, std::move(n)}; }
  bool is_variable() const { return kind == Kind::Variable; }
  // Symbols compare case-insensitively; variables are stored lowercased.
  std::string key() const { return is_variable() ? name : lowercase(name); }
  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.key() == b.key();
  }
};

struct Literal {
  std::string predicate;
  std::vector<Term> args;
  bool negated = false;
  bool fact = false;
  int line = 0;
  int column = 0;

  bool is_eq() const { return predicate == "eq"; }
  bool is_neq() const { return predicate == "neq"; }
  bool is_binding() const { return is_eq() || is_neq(); }
  bool is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
  }
  friend bool operator==(const Literal& a, const Literal& b) {
    return a.predicate == b.predicate && a.args == b.args && a.negated == b.negated &&
           a.fact == b.fact;
  }
};

struct TypedVar {
  std::string name;
  std::string type;  // empty when untyped
  friend bool operator==(const TypedVar&, const TypedVar&) = default;
};

struct Formula {
  enum class Kind { Literal, And, Or, Forall, Exists };
  Kind kind = Kind::And;
  pocl::Literal literal;
  std::vector<Formula> children;
  std::vector<TypedVar> vars;

  static Formula conj(std::vector<Formula> c = {}) {
    Formula f;
    f.kind = Kind::And;
    f.children = std::move(c);
    return f;
  }
  static Formula lit(pocl::Literal l) {
    Formula f;
    f.kind = Kind::Literal;
    f.literal = std::move(l);
    return f;
  }
  bool is_literal() const { return kind == Kind::Literal; }
  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Literal) return a.literal == b.literal;
    return a.children == b.children && a.vars == b.vars;
  }
};

struct WhenClause {
  std::vector<TypedVar> quantified;
  Formula antecedent;
  std::vector<Literal> effects;
  // Set by expand_universals: index of the originating secondary clause and
  // the constants substituted for its quantified variables.
  int source = -1;
  std::vector<std::pair<std::string, std::string>> instantiation;

  friend bool operator==(const WhenClause& a, const WhenClause& b) {
    return a.quantified == b.quantified && a.antecedent == b.antecedent && a.effects == b.effects;
  }
};

struct Operator {
  std::string name;
  std::vector<std::string> parameters;
  WhenClause primary;
  std::vector<WhenClause> secondaries;
  int line = 0;
  int column = 0;

  friend bool operator==(const Operator& a, const Operator& b) {
    return a.name == b.name && a.parameters == b.parameters && a.primary == b.primary &&
           a.secondaries == b.secondaries;
  }
};

using FactTables = std::map<std::string, std::vector<std::vector<std::string>>>;

struct Problem {
  std::string name;
  std::string domain;
  std::vector<Literal> inits;
  Formula goal;
  FactTables facts;

  friend bool operator==(const Problem& a, const Problem& b) {
    return a.name == b.name && a.inits == b.inits && a.goal == b.goal && a.facts == b.facts;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline bool is_var_symbol(const std::string& s) { return !s.empty() && s[0] == '?'; }

inline std::string strip_colon(const std::string& s) {
  std::string l = lowercase(s);
  if (!l.empty() && l[0] == ':') l.erase(0, 1);
  return l;
}

[[noreturn]] inline void fail(const SExpr& at, const std::string& what) {
  throw ParseError(what, at.line, at.column);
}

inline std::string head_of(const SExpr& e) {
  if (!e.is_list || e.items.empty() || !e.items[0].is_atom()) return "";
  return strip_colon(e.items[0].atom);
}

class Parser {
 public:
  // Scope maps a source variable name to its (possibly renamed) name.
  using Scope = std::vector<std::pair<std::string, std::string>>;

  std::map<std::string, size_t> arity;

  Term term(const SExpr& e, const Scope& scope) {
    if (e.is_list) fail(e, "expected a term, found a list");
    if (is_var_symbol(e.atom)) {
      std::string v = lowercase(e.atom);
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (it->first == v) return Term::variable(it->second);
      note_var(v);
      return Term::variable(v);
    }
    return Term::constant(e.atom);
  }

  Literal atom(const SExpr& e, const Scope& scope) {
    if (!e.is_list || e.items.empty() || e.items[0].is_list) fail(e, "malformed literal");
    Literal l;
    l.predicate = lowercase(e.items[0].atom);
    if (l.predicate == ":eq" || l.predicate == "=") l.predicate = "eq";
    if (l.predicate == ":neq") l.predicate = "neq";
    l.line = e.line;
    l.column = e.column;
    for (size_t i = 1; i < e.size(); ++i) l.args.push_back(term(e[i], scope));
    if (l.is_binding()) {
      if (l.args.size() != 2) fail(e, "eq/neq take two arguments");
    } else {
      check_arity(l, e);
    }
    return l;
  }

  void check_arity(const Literal& l, const SExpr& at) {
    auto [it, inserted] = arity.emplace(l.predicate, l.args.size());
    if (!inserted && it->second != l.args.size())
      fail(at, "predicate '" + l.predicate + "' used with arity " + std::to_string(l.args.size()) +
                   " but earlier with arity " + std::to_string(it->second));
  }

  // "(?x ?y)", "(type ?x)", or "((type ?x) ?y)".
  std::vector<TypedVar> var_list(const SExpr& e) {
    std::vector<TypedVar> out;
    if (e.is_atom()) {
      if (!is_var_symbol(e.atom)) fail(e, "expected a variable");
      out.push_back({lowercase(e.atom), ""});
      return out;
    }
    if (e.size() == 2 && e[0].is_atom() && !is_var_symbol(e[0].atom) && e[1].is_atom() &&
        is_var_symbol(e[1].atom)) {
      out.push_back({lowercase(e[1].atom), lowercase(e[0].atom)});
      return out;
    }
    for (const SExpr& item : e.items) {
      if (item.is_atom()) {
        if (!is_var_symbol(item.atom)) fail(item, "expected a variable");
        out.push_back({lowercase(item.atom), ""});
      } else if (item.size() == 2 && item[0].is_atom() && item[1].is_atom() &&
                 is_var_symbol(item[1].atom)) {
        out.push_back({lowercase(item[1].atom), lowercase(item[0].atom)});
      } else {
        fail(item, "malformed variable declaration");
      }
    }
    return out;
  }

  // Binds quantified variables, renaming any that clash with names in use.
  std::vector<TypedVar> bind(std::vector<TypedVar> vars, Scope& scope) {
    for (TypedVar& v : vars) {
      std::string name = v.name;
      if (used_.count(name)) {
        for (int k = 1;; ++k) {
          std::string cand = name + "_" + std::to_string(k);
          if (!used_.count(cand)) {
            name = cand;
            break;
          }
        }
      }
      used_.insert(name);
      scope.emplace_back(v.name, name);
      v.name = name;
    }
    return vars;
  }

  Formula formula(const SExpr& e, Scope scope) {
    if (e.is_atom()) {
      std::string a = strip_colon(e.atom);
      if (a == "nil" || a == "t") return Formula::conj();
      fail(e, "expected a formula");
    }
    if (e.items.empty()) return Formula::conj();
    std::string h = head_of(e);
    if (h == "and" || h == "or") {
      Formula f;
      f.kind = h == "and" ? Formula::Kind::And : Formula::Kind::Or;
      for (size_t i = 1; i < e.size(); ++i) f.children.push_back(formula(e[i], scope));
      return f;
    }
    if (h == "not") {
      if (e.size() != 2) fail(e, "not takes one argument");
      return negate(formula(e[1], scope));
    }
    if (h == "forall" || h == "exists") {
      if (e.size() != 3) fail(e, h + " takes a variable list and a body");
      Formula f;
      f.kind = h == "forall" ? Formula::Kind::Forall : Formula::Kind::Exists;
      f.vars = bind(var_list(e[1]), scope);
      f.children.push_back(formula(e[2], scope));
      return f;
    }
    if (h == "fact") {
      if (e.size() != 2) fail(e, "fact takes one literal");
      Literal l = atom(e[1], scope);
      l.fact = true;
      return Formula::lit(l);
    }
    return Formula::lit(atom(e, scope));
  }

  static Formula negate(Formula f) {
    switch (f.kind) {
      case Formula::Kind::Literal:
        if (f.literal.is_eq()) {
          f.literal.predicate = "neq";
        } else if (f.literal.is_neq()) {
          f.literal.predicate = "eq";
        } else {
          f.literal.negated = !f.literal.negated;
        }
        return f;
      case Formula::Kind::And:
      case Formula::Kind::Or:
        f.kind = f.kind == Formula::Kind::And ? Formula::Kind::Or : Formula::Kind::And;
        for (Formula& c : f.children) c = negate(std::move(c));
        return f;
      case Formula::Kind::Forall:
      case Formula::Kind::Exists:
        f.kind = f.kind == Formula::Kind::Forall ? Formula::Kind::Exists : Formula::Kind::Forall;
        f.children[0] = negate(std::move(f.children[0]));
        return f;
    }
    return f;
  }

  Literal effect_literal(const SExpr& e, const Scope& scope) {
    if (head_of(e) == "not") {
      if (e.size() != 2) fail(e, "not takes one argument");
      Literal l = atom(e[1], scope);
      if (l.is_binding()) fail(e, "eq/neq cannot be an effect");
      l.negated = true;
      return l;
    }
    Literal l = atom(e, scope);
    if (l.is_binding()) fail(e, "eq/neq cannot be an effect");
    return l;
  }

  void effect(const SExpr& e, Scope scope, std::vector<TypedVar> quantified, Operator& op) {
    if (e.is_atom()) {
      std::string a = strip_colon(e.atom);
      if (a == "nil") return;
      fail(e, "expected an effect");
    }
    if (e.items.empty()) return;
    std::string h = head_of(e);
    if (h == "and") {
      for (size_t i = 1; i < e.size(); ++i) effect(e[i], scope, quantified, op);
      return;
    }
    if (h == "forall") {
      if (e.size() != 3) fail(e, "forall takes a variable list and a body");
      for (TypedVar& v : bind(var_list(e[1]), scope)) quantified.push_back(v);
      effect(e[2], scope, quantified, op);
      return;
    }
    if (h == "when") {
      if (e.size() != 3) fail(e, "when takes an antecedent and an effect");
      WhenClause w;
      w.quantified = quantified;
      w.antecedent = formula(e[1], scope);
      if (!flat_conjunction(w.antecedent)) fail(e[1], "when antecedent must be a conjunction of literals");
      w.antecedent = flatten(w.antecedent);
      collect_literals(e[2], scope, w.effects);
      op.secondaries.push_back(std::move(w));
      return;
    }
    Literal l = effect_literal(e, scope);
    if (quantified.empty()) {
      op.primary.effects.push_back(l);
    } else {
      WhenClause w;
      w.quantified = quantified;
      w.effects.push_back(l);
      op.secondaries.push_back(std::move(w));
    }
  }

  void collect_literals(const SExpr& e, const Scope& scope, std::vector<Literal>& out) {
    if (e.is_list && head_of(e) == "and") {
      for (size_t i = 1; i < e.size(); ++i) collect_literals(e[i], scope, out);
      return;
    }
    if (e.is_list && e.items.empty()) return;
    std::string h = head_of(e);
    if (h == "when" || h == "forall") fail(e, "nested conditional effects are not supported");
    out.push_back(effect_literal(e, scope));
  }

  static bool flat_conjunction(const Formula& f) {
    if (f.kind == Formula::Kind::Literal) return true;
    if (f.kind != Formula::Kind::And) return false;
    return std::all_of(f.children.begin(), f.children.end(), flat_conjunction);
  }

  static void flatten_into(const Formula& f, std::vector<Formula>& out) {
    if (f.kind == Formula::Kind::And) {
      for (const Formula& c : f.children) flatten_into(c, out);
    } else {
      out.push_back(f);
    }
  }

  static Formula flatten(const Formula& f) {
    std::vector<Formula> out;
    flatten_into(f, out);
    return Formula::conj(std::move(out));
  }

  void reset_vars() { used_.clear(); }
  void note_var(const std::string& v) { used_.insert(v); }

  Operator operator_body(const std::string& name, const SExpr& form, size_t first, const SExpr& at) {
    Operator op;
    op.name = lowercase(name);
    op.line = at.line;
    op.column = at.column;
    reset_vars();
    std::vector<Formula> type_preconds;
    const SExpr* pre = nullptr;
    const SExpr* eff = nullptr;
    for (size_t i = first; i < form.size(); i += 2) {
      if (!form[i].is_atom()) fail(form[i], "expected a keyword");
      std::string key = strip_colon(form[i].atom);
      if (i + 1 >= form.size()) fail(form[i], "keyword without value");
      const SExpr& val = form[i + 1];
      if (key == "parameters") {
        if (val.is_atom()) {
          if (strip_colon(val.atom) != "nil") fail(val, "parameters must be a list");
          continue;
        }
        for (const SExpr& p : val.items) {
          for (TypedVar& v : var_list(p)) {
            if (std::find(op.parameters.begin(), op.parameters.end(), v.name) != op.parameters.end())
              fail(p, "duplicate parameter " + v.name);
            op.parameters.push_back(v.name);
            note_var(v.name);
            if (!v.type.empty()) {
              Literal l;
              l.predicate = v.type;
              l.args.push_back(Term::variable(v.name));
              l.line = p.line;
              l.column = p.column;
              check_arity(l, p);
              type_preconds.push_back(Formula::lit(l));
            }
          }
        }
      } else if (key == "precondition") {
        pre = &val;
      } else if (key == "effect") {
        eff = &val;
      } else {
        fail(form[i], "unknown operator keyword :" + key);
      }
    }
    Formula precondition = pre ? formula(*pre, {}) : Formula::conj();
    if (type_preconds.empty()) {
      op.primary.antecedent = precondition.kind == Formula::Kind::And
                                  ? precondition
                                  : Formula::conj({precondition});
    } else {
      std::vector<Formula> all = type_preconds;
      if (precondition.kind == Formula::Kind::And) {
        for (Formula& c : precondition.children) all.push_back(c);
      } else {
        all.push_back(precondition);
      }
      op.primary.antecedent = Formula::conj(std::move(all));
    }
    if (eff) effect(*eff, {}, {}, op);
    return op;
  }

 private:
  std::set<std::string> used_;
};

}  // namespace detail

inline std::vector<Operator> parse_domain(const std::string& text) {
  std::vector<Operator> ops;
  detail::Parser p;
  std::set<std::string> names;
  auto add = [&](Operator op, const SExpr& at) {
    if (!names.insert(op.name).second) detail::fail(at, "duplicate operator " + op.name);
    ops.push_back(std::move(op));
  };
  for (const SExpr& form : read_sexprs(text)) {
    if (form.is_atom()) detail::fail(form, "expected a definition");
    if (form.items.empty()) continue;
    std::string h = detail::head_of(form);
    if (h == "define") {
      if (form.size() < 2 || !form[1].is_list || form[1].size() != 2)
        detail::fail(form, "malformed define");
      std::string kind = detail::strip_colon(form[1][0].atom);
      if (kind == "operator") {
        add(p.operator_body(form[1][1].atom, form, 2, form), form);
      } else if (kind == "domain") {
        for (size_t i = 2; i < form.size(); ++i) {
          const SExpr& d = form[i];
          if (detail::head_of(d) != "operator" && detail::head_of(d) != "action")
            detail::fail(d, "expected an operator definition");
          if (d.size() < 2 || !d[1].is_atom()) detail::fail(d, "operator needs a name");
          add(p.operator_body(d[1].atom, d, 2, d), d);
        }
      } else {
        detail::fail(form[1], "unknown definition kind " + kind);
      }
    } else {
      detail::fail(form, "expected (define ...)");
    }
  }
  return ops;
}

// Collects predicate arities used by a domain.
inline std::map<std::string, size_t> predicate_arities(const std::vector<Operator>& ops);

inline Problem parse_problem(const std::string& text, const std::vector<Operator>* domain = nullptr) {
  detail::Parser p;
  if (domain) p.arity = predicate_arities(*domain);
  std::vector<SExpr> forms = read_sexprs(text);
  if (forms.size() != 1 || !forms[0].is_list) {
    int line = forms.empty() ? 1 : forms[0].line;
    int col = forms.empty() ? 1 : forms[0].column;
    throw ParseError("expected a single (define (problem ...)) form", line, col);
  }
  const SExpr& form = forms[0];
  if (detail::head_of(form) != "define" || form.size() < 2 || !form[1].is_list ||
      form[1].size() != 2 || detail::strip_colon(form[1][0].atom) != "problem")
    detail::fail(form, "expected (define (problem NAME) ...)");
  Problem prob;
  prob.name = lowercase(form[1][1].atom);
  prob.goal = Formula::conj();
  for (size_t i = 2; i < form.size(); i += 2) {
    if (!form[i].is_atom()) detail::fail(form[i], "expected a keyword");
    std::string key = detail::strip_colon(form[i].atom);
    if (i + 1 >= form.size()) detail::fail(form[i], "keyword without value");
    const SExpr& val = form[i + 1];
    if (key == "domain") {
      prob.domain = val.is_atom() ? lowercase(val.atom) : "";
    } else if (key == "inits" || key == "init") {
      if (!val.is_list) detail::fail(val, "inits must be a list");
      for (const SExpr& a : val.items) {
        if (detail::head_of(a) == "not") detail::fail(a, "negated literal in inits");
        Literal l = p.atom(a, {});
        if (l.is_binding()) detail::fail(a, "eq/neq in inits");
        if (!l.is_ground()) detail::fail(a, "non-ground literal in inits");
        prob.inits.push_back(l);
      }
    } else if (key == "goal" || key == "goals") {
      p.reset_vars();
      prob.goal = p.formula(val, {});
      if (prob.goal.kind != Formula::Kind::And) prob.goal = Formula::conj({prob.goal});
    } else if (key == "facts") {
      if (!val.is_list) detail::fail(val, "facts must be a list");
      for (const SExpr& a : val.items) {
        Literal l = p.atom(a, {});
        if (!l.is_ground()) detail::fail(a, "non-ground fact");
        std::vector<std::string> row;
        for (const Term& t : l.args) row.push_back(t.name);
        prob.facts[l.predicate].push_back(row);
      }
    } else {
      detail::fail(form[i], "unknown problem keyword :" + key);
    }
  }
  for (const Literal& l : prob.inits)
    if (prob.facts.count(l.predicate))
      throw ParseError("predicate '" + l.predicate + "' is both a fact and a fluent", l.line, l.column);
  return prob;
}

// ---------------------------------------------------------------------------
// Traversal helpers

template <class Fn>
void for_each_literal(const Formula& f, Fn&& fn) {
  if (f.kind == Formula::Kind::Literal) {
    fn(f.literal);
    return;
  }
  for (const Formula& c : f.children) for_each_literal(c, fn);
}

inline std::map<std::string, size_t> predicate_arities(const std::vector<Operator>& ops) {
  std::map<std::string, size_t> out;
  auto note = [&](const Literal& l) {
    if (!l.is_binding()) out.emplace(l.predicate, l.args.size());
  };
  for (const Operator& op : ops) {
    for_each_literal(op.primary.antecedent, note);
    for (const Literal& l : op.primary.effects) note(l);
    for (const WhenClause& w : op.secondaries) {
      for_each_literal(w.antecedent, note);
      for (const Literal& l : w.effects) note(l);
    }
  }
  return out;
}

inline std::vector<Literal> conjunct_literals(const Formula& f) {
  std::vector<Literal> out;
  for_each_literal(f, [&](const Literal& l) { out.push_back(l); });
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string render(const Term& t) { return t.name; }

inline std::string render(const Literal& l) {
  std::string s = "(" + l.predicate;
  for (const Term& t : l.args) s += " " + t.name;
  s += ")";
  if (l.fact) s = "(fact " + s + ")";
  if (l.negated) s = "(not " + s + ")";
  return s;
}

inline std::string render_vars(const std::vector<TypedVar>& vs) {
  std::string s = "(";
  for (size_t i = 0; i < vs.size(); ++i) {
    if (i) s += " ";
    s += vs[i].type.empty() ? vs[i].name : "(" + vs[i].type + " " + vs[i].name + ")";
  }
  return s + ")";
}

inline std::string render(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Literal:
      return render(f.literal);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string s = f.kind == Formula::Kind::And ? "(and" : "(or";
      for (const Formula& c : f.children) s += " " + render(c);
      return s + ")";
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return std::string(f.kind == Formula::Kind::Forall ? "(forall " : "(exists ") +
             render_vars(f.vars) + " " + render(f.children[0]) + ")";
  }
  return "";
}

inline std::string render_effects(const std::vector<Literal>& effs) {
  if (effs.size() == 1) return render(effs[0]);
  std::string s = "(and";
  for (const Literal& l : effs) s += " " + render(l);
  return s + ")";
}

inline std::string render(const WhenClause& w) {
  bool plain = w.antecedent.kind == Formula::Kind::And && w.antecedent.children.empty();
  std::string body = plain ? render_effects(w.effects)
                           : "(when " + render(w.antecedent) + " " + render_effects(w.effects) + ")";
  if (w.quantified.empty()) return body;
  return "(forall " + render_vars(w.quantified) + " " + body + ")";
}

inline std::string render(const Operator& op) {
  std::ostringstream o;
  o << "(define (operator " << op.name << ")\n  :parameters (";
  for (size_t i = 0; i < op.parameters.size(); ++i) o << (i ? " " : "") << op.parameters[i];
  o << ")\n  :precondition " << render(op.primary.antecedent) << "\n  :effect (and";
  for (const Literal& l : op.primary.effects) o << " " << render(l);
  for (const WhenClause& w : op.secondaries) o << "\n    " << render(w);
  o << "))\n";
  return o.str();
}

inline std::string render_domain(const std::vector<Operator>& ops) {
  std::string s;
  for (const Operator& op : ops) s += render(op) + "\n";
  return s;
}

inline std::string render(const Problem& p) {
  std::ostringstream o;
  o << "(define (problem " << p.name << ")\n";
  if (!p.domain.empty()) o << "  :domain " << p.domain << "\n";
  o << "  :inits (";
  for (size_t i = 0; i < p.inits.size(); ++i) o << (i ? " " : "") << render(p.inits[i]);
  o << ")\n";
  if (!p.facts.empty()) {
    o << "  :facts (";
    bool first = true;
    for (const auto& [pred, rows] : p.facts) {
      for (const auto& row : rows) {
        o << (first ? "" : " ") << "(" << pred;
        for (const std::string& c : row) o << " " << c;
        o << ")";
        first = false;
      }
    }
    o << ")\n";
  }
  o << "  :goal " << render(p.goal) << ")\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Normalization for preprocessing

namespace detail {

inline void add_param(std::vector<std::string>& params, const std::string& v) {
  if (std::find(params.begin(), params.end(), v) == params.end()) params.push_back(v);
}

inline Literal type_literal(const TypedVar& v) {
  Literal l;
  l.predicate = v.type;
  l.args.push_back(Term::variable(v.name));
  return l;
}

// Keeps literals reachable through and/exists; drops or, forall and facts.
inline void preprocessing_literals(const Formula& f, const std::set<std::string>& fact_preds,
                                   std::vector<Formula>& out) {
  switch (f.kind) {
    case Formula::Kind::Literal:
      if (!f.literal.fact && !fact_preds.count(f.literal.predicate)) out.push_back(f);
      return;
    case Formula::Kind::And:
      for (const Formula& c : f.children) preprocessing_literals(c, fact_preds, out);
      return;
    case Formula::Kind::Exists:
      for (const TypedVar& v : f.vars)
        if (!v.type.empty() && !fact_preds.count(v.type)) out.push_back(Formula::lit(type_literal(v)));
      preprocessing_literals(f.children[0], fact_preds, out);
      return;
    case Formula::Kind::Or:
    case Formula::Kind::Forall:
      return;
  }
}

inline void note_vars(const Literal& l, std::vector<std::string>& params) {
  for (const Term& t : l.args)
    if (t.is_variable()) add_param(params, t.name);
}

}  // namespace detail

inline Formula normalize_goal(const Formula& goal, const std::set<std::string>& fact_preds = {}) {
  std::vector<Formula> lits;
  detail::preprocessing_literals(goal, fact_preds, lits);
  return Formula::conj(std::move(lits));
}

inline Operator normalize_for_preprocessing(const Operator& op,
                                            const std::set<std::string>& fact_preds = {}) {
  Operator out;
  out.name = op.name;
  out.line = op.line;
  out.column = op.column;
  out.parameters = op.parameters;
  out.primary.antecedent = normalize_goal(op.primary.antecedent, fact_preds);
  out.primary.effects = op.primary.effects;
  for (const Formula& f : out.primary.antecedent.children) detail::note_vars(f.literal, out.parameters);
  for (const Literal& l : out.primary.effects) detail::note_vars(l, out.parameters);
  for (const WhenClause& w : op.secondaries) {
    WhenClause n;
    std::vector<Formula> ante;
    for (const TypedVar& v : w.quantified)
      if (!v.type.empty() && !fact_preds.count(v.type)) ante.push_back(Formula::lit(detail::type_literal(v)));
    detail::preprocessing_literals(w.antecedent, fact_preds, ante);
    n.antecedent = Formula::conj(std::move(ante));
    n.effects = w.effects;
    for (const TypedVar& v : w.quantified) detail::add_param(out.parameters, v.name);
    for (const Formula& f : n.antecedent.children) detail::note_vars(f.literal, out.parameters);
    for (const Literal& l : n.effects) detail::note_vars(l, out.parameters);
    out.secondaries.push_back(std::move(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Universal expansion for the planner

struct Universe {
  std::vector<std::string> constants;                          // display spelling
  std::map<std::string, std::vector<std::string>> members;     // unary init predicate -> constants

  const std::vector<std::string>& range(const std::string& type) const {
    if (type.empty()) return constants;
    static const std::vector<std::string> none;
    auto it = members.find(type);
    return it == members.end() ? none : it->second;
  }
};

namespace detail {

inline void note_constant(std::vector<std::string>& cs, std::set<std::string>& seen, const std::string& c) {
  if (seen.insert(lowercase(c)).second) cs.push_back(c);
}

inline void formula_constants(const Formula& f, std::vector<std::string>& cs, std::set<std::string>& seen) {
  for_each_literal(f, [&](const Literal& l) {
    for (const Term& t : l.args)
      if (!t.is_variable()) note_constant(cs, seen, t.name);
  });
}

}  // namespace detail

inline Universe make_universe(const std::vector<Operator>& ops, const Problem& prob) {
  Universe u;
  std::set<std::string> seen;
  for (const Literal& l : prob.inits) {
    for (const Term& t : l.args) detail::note_constant(u.constants, seen, t.name);
    if (l.args.size() == 1) {
      auto& m = u.members[l.predicate];
      bool dup = false;
      for (const std::string& c : m) dup = dup || lowercase(c) == l.args[0].key();
      if (!dup) m.push_back(l.args[0].name);
    }
  }
  for (const auto& [pred, rows] : prob.facts) {
    for (const auto& row : rows) {
      for (const std::string& c : row) detail::note_constant(u.constants, seen, c);
      if (row.size() == 1) u.members[pred].push_back(row[0]);
    }
  }
  detail::formula_constants(prob.goal, u.constants, seen);
  for (const Operator& op : ops) {
    detail::formula_constants(op.primary.antecedent, u.constants, seen);
    for (const Literal& l : op.primary.effects)
      for (const Term& t : l.args)
        if (!t.is_variable()) detail::note_constant(u.constants, seen, t.name);
    for (const WhenClause& w : op.secondaries) {
      detail::formula_constants(w.antecedent, u.constants, seen);
      for (const Literal& l : w.effects)
        for (const Term& t : l.args)
          if (!t.is_variable()) detail::note_constant(u.constants, seen, t.name);
    }
  }
  return u;
}

using Substitution = std::map<std::string, Term>;

inline Term substitute(const Term& t, const Substitution& s) {
  if (!t.is_variable()) return t;
  auto it = s.find(t.name);
  return it == s.end() ? t : it->second;
}

inline Literal substitute(Literal l, const Substitution& s) {
  for (Term& t : l.args) t = substitute(t, s);
  return l;
}

inline Formula substitute(const Formula& f, const Substitution& s) {
  if (f.kind == Formula::Kind::Literal) return Formula::lit(substitute(f.literal, s));
  Formula out = f;
  for (Formula& c : out.children) c = substitute(c, s);
  return out;
}

namespace detail {

// Expands forall over the universe; bound variables of nested quantifiers in
// each copy get a per-instance suffix so copies stay independent.
inline Formula expand(const Formula& f, const Universe& u, Substitution s, int& counter) {
  switch (f.kind) {
    case Formula::Kind::Literal:
      return Formula::lit(substitute(f.literal, s));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      Formula out;
      out.kind = f.kind;
      for (const Formula& c : f.children) out.children.push_back(expand(c, u, s, counter));
      return out;
    }
    case Formula::Kind::Exists: {
      Formula out;
      out.kind = f.kind;
      for (const TypedVar& v : f.vars) {
        TypedVar nv = v;
        if (s.count(v.name) || counter > 0) nv.name = v.name + "." + std::to_string(counter);
        s[v.name] = Term::variable(nv.name);
        out.vars.push_back(nv);
      }
      out.children.push_back(expand(f.children[0], u, s, counter));
      return out;
    }
    case Formula::Kind::Forall: {
      std::vector<Formula> parts;
      std::vector<std::vector<std::string>> ranges;
      for (const TypedVar& v : f.vars) ranges.push_back(u.range(v.type));
      std::vector<size_t> idx(f.vars.size(), 0);
      for (const auto& r : ranges)
        if (r.empty()) return Formula::conj();
      for (;;) {
        Substitution inner = s;
        for (size_t i = 0; i < f.vars.size(); ++i)
          inner[f.vars[i].name] = Term::constant(ranges[i][idx[i]]);
        ++counter;
        parts.push_back(expand(f.children[0], u, inner, counter));
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == ranges[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
      return Formula::conj(std::move(parts));
    }
  }
  return f;
}

}  // namespace detail

inline Formula expand_universals(const Formula& f, const Universe& u) {
  int counter = 0;
  return detail::expand(f, u, {}, counter);
}

inline Operator expand_universals(const Operator& op, const Universe& u) {
  Operator out = op;
  out.primary.antecedent = expand_universals(op.primary.antecedent, u);
  out.secondaries.clear();
  for (size_t k = 0; k < op.secondaries.size(); ++k) {
    const WhenClause& w = op.secondaries[k];
    if (w.quantified.empty()) {
      WhenClause n = w;
      n.antecedent = expand_universals(w.antecedent, u);
      n.source = static_cast<int>(k);
      out.secondaries.push_back(std::move(n));
      continue;
    }
    std::vector<std::vector<std::string>> ranges;
    bool empty = false;
    for (const TypedVar& v : w.quantified) {
      ranges.push_back(u.range(v.type));
      empty = empty || ranges.back().empty();
    }
    if (empty) continue;
    std::vector<size_t> idx(w.quantified.size(), 0);
    for (;;) {
      Substitution s;
      WhenClause n;
      n.source = static_cast<int>(k);
      for (size_t i = 0; i < w.quantified.size(); ++i) {
        s[w.quantified[i].name] = Term::constant(ranges[i][idx[i]]);
        n.instantiation.emplace_back(w.quantified[i].name, ranges[i][idx[i]]);
      }
      n.antecedent = expand_universals(substitute(w.antecedent, s), u);
      for (const Literal& l : w.effects) n.effects.push_back(substitute(l, s));
      out.secondaries.push_back(std::move(n));
      size_t j = 0;
      while (j < idx.size() && ++idx[j] == ranges[j].size()) idx[j++] = 0;
      if (j == idx.size()) break;
    }
  }
  return out;
}

}  // namespace pocl
