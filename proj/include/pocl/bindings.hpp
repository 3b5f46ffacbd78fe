#pragma once

#include <climits>
#include <optional>
#include <utility>
#include <vector>

#include "pocl/const_set.hpp"
#include "pocl/task.hpp"

namespace pocl {

using Mgu = std::vector<std::pair<TermId, TermId>>;

// Codesignation store: union-find over plan variables, a domain per class,
// and pairwise non-codesignation constraints.
class Bindings {
 public:
  static constexpr TermId kUnbound = INT_MIN;

  int num_vars() const { return static_cast<int>(parent_.size()); }

  int add_variable(const Domain& d = Domain::any()) {
    int v = num_vars();
    parent_.push_back(v);
    rank_.push_back(0);
    value_.push_back(kUnbound);
    domain_.push_back(d);
    return v;
  }

  int root(int v) const {
    while (parent_[v] != v) v = parent_[v];
    return v;
  }

  // A constant id, or the variable term of the class root.
  TermId resolve(TermId t) const {
    if (!is_var(t)) return t;
    int r = root(var_index(t));
    return value_[r] != kUnbound ? value_[r] : var_term(r);
  }

  Domain domain(TermId t) const {
    TermId r = resolve(t);
    if (!is_var(r)) return Domain::of(ConstSet{r});
    return domain_[var_index(r)];
  }

  bool same(TermId a, TermId b) const { return resolve(a) == resolve(b); }

  bool known_distinct(TermId a, TermId b) const {
    TermId ra = resolve(a), rb = resolve(b);
    if (ra == rb) return false;
    if (!is_var(ra) && !is_var(rb)) return true;
    for (const auto& [x, y] : neq_) {
      TermId rx = resolve(x), ry = resolve(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
    }
    if (is_var(ra) && !is_var(rb)) return !domain_[var_index(ra)].contains(rb);
    if (is_var(rb) && !is_var(ra)) return !domain_[var_index(rb)].contains(ra);
    return false;
  }

  const std::vector<std::pair<TermId, TermId>>& neqs() const { return neq_; }

  bool add_eq(TermId a, TermId b, bool check_domains = true) {
    TermId ra = resolve(a), rb = resolve(b);
    if (ra == rb) return true;
    if (!is_var(ra) && !is_var(rb)) return false;
    if (!is_var(ra)) std::swap(ra, rb);
    int x = var_index(ra);
    if (!is_var(rb)) {
      if (check_domains && !domain_[x].contains(rb)) return false;
      value_[x] = rb;
      domain_[x] = Domain::of(ConstSet{rb});
    } else {
      int y = var_index(rb);
      if (rank_[x] < rank_[y]) std::swap(x, y);
      parent_[y] = x;
      if (rank_[x] == rank_[y]) ++rank_[x];
      domain_[x].intersect(domain_[y]);
      if (check_domains && domain_[x].empty()) return false;
    }
    return normalize(check_domains);
  }

  bool add_neq(TermId a, TermId b) {
    TermId ra = resolve(a), rb = resolve(b);
    if (ra == rb) return false;
    if (!is_var(ra) && !is_var(rb)) return true;
    neq_.emplace_back(ra, rb);
    return normalize(true);
  }

  bool restrict(TermId t, const Domain& d) {
    TermId r = resolve(t);
    if (!is_var(r)) return d.contains(r);
    Domain& dom = domain_[var_index(r)];
    dom.intersect(d);
    if (dom.empty()) return false;
    return normalize(true);
  }

  // Equalities needed to unify two atoms (sign ignored), or nullopt.
  std::optional<Mgu> mgu(const Atom& a, const Atom& b, bool check_domains) const {
    if (a.pred != b.pred || a.arity != b.arity) return std::nullopt;
    Mgu out;
    for (int i = 0; i < a.arity; ++i) {
      TermId x = resolve(a.args[i]), y = resolve(b.args[i]);
      if (x == y) continue;
      if (!is_var(x) && !is_var(y)) return std::nullopt;
      if (check_domains) {
        if (is_var(x) && !is_var(y) && !domain_[var_index(x)].contains(y)) return std::nullopt;
        if (is_var(y) && !is_var(x) && !domain_[var_index(y)].contains(x)) return std::nullopt;
      }
      out.emplace_back(x, y);
    }
    if (out.empty()) return out;
    Bindings probe = *this;
    for (const auto& [x, y] : out)
      if (!probe.add_eq(x, y, check_domains)) return std::nullopt;
    return out;
  }

  bool unify(const Atom& a, const Atom& b, bool check_domains = true) {
    if (a.pred != b.pred || a.arity != b.arity) return false;
    for (int i = 0; i < a.arity; ++i)
      if (!add_eq(a.args[i], b.args[i], check_domains)) return false;
    return true;
  }

 private:
  // Applies non-codesignations to finite domains and checks consistency.
  bool normalize(bool check_domains) {
    bool var_pairs = false;
    size_t keep = 0;
    for (size_t i = 0; i < neq_.size(); ++i) {
      TermId x = resolve(neq_[i].first), y = resolve(neq_[i].second);
      if (x == y) return false;
      if (!is_var(x) && !is_var(y)) continue;
      if (!is_var(x)) std::swap(x, y);
      if (!is_var(y)) {
        Domain& d = domain_[var_index(x)];
        if (!d.top) {
          d.set.erase(y);
          if (check_domains && d.set.empty()) return false;
          continue;
        }
      } else if (!domain_[var_index(x)].top && !domain_[var_index(y)].top) {
        var_pairs = true;
      }
      neq_[keep++] = {x, y};
    }
    neq_.resize(keep);
    if (var_pairs && check_domains) return colorable();
    return true;
  }

  // Finite-domain classes joined by non-codesignations must admit distinct
  // values; TOP classes can always pick an unused constant.
  bool colorable() const {
    std::vector<int> nodes;
    std::vector<std::pair<int, int>> edges;
    auto node_of = [&](int r) {
      for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == r) return static_cast<int>(i);
      nodes.push_back(r);
      return static_cast<int>(nodes.size()) - 1;
    };
    for (const auto& [x, y] : neq_) {
      if (!is_var(x) || !is_var(y)) continue;
      int rx = var_index(x), ry = var_index(y);
      if (domain_[rx].top || domain_[ry].top) continue;
      edges.emplace_back(node_of(rx), node_of(ry));
    }
    size_t n = nodes.size();
    std::vector<ConstSet> dom(n);
    std::vector<char> alive(n, 1);
    for (size_t i = 0; i < n; ++i) dom[i] = domain_[nodes[i]].set;
    // Peel nodes with more values than live neighbours.
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<int> deg(n, 0);
      for (const auto& [a, b] : edges)
        if (alive[a] && alive[b]) {
          ++deg[a];
          ++deg[b];
        }
      for (size_t i = 0; i < n; ++i)
        if (alive[i] && dom[i].size() > deg[i]) {
          alive[i] = 0;
          changed = true;
        }
    }
    std::vector<int> order;
    for (size_t i = 0; i < n; ++i)
      if (alive[i]) order.push_back(static_cast<int>(i));
    if (order.empty()) return true;
    std::vector<int> value(n, -1);
    long budget = 200000;
    return search_coloring(order, 0, edges, dom, value, budget);
  }

  static bool search_coloring(const std::vector<int>& order, size_t k,
                              const std::vector<std::pair<int, int>>& edges,
                              const std::vector<ConstSet>& dom, std::vector<int>& value,
                              long& budget) {
    if (k == order.size()) return true;
    if (--budget < 0) return true;
    int v = order[k];
    for (int c : dom[v].elements()) {
      bool ok = true;
      for (const auto& [a, b] : edges) {
        if (a == v && value[b] == c) ok = false;
        if (b == v && value[a] == c) ok = false;
        if (!ok) break;
      }
      if (!ok) continue;
      value[v] = c;
      if (search_coloring(order, k + 1, edges, dom, value, budget)) return true;
      value[v] = -1;
    }
    return false;
  }

  std::vector<int> parent_;
  std::vector<uint8_t> rank_;
  std::vector<TermId> value_;
  std::vector<Domain> domain_;
  std::vector<std::pair<TermId, TermId>> neq_;
};

// Functional forms: return the extended store or nullopt on inconsistency.
inline std::optional<Bindings> add_binding(Bindings b, TermId x, TermId y, bool equal) {
  bool ok = equal ? b.add_eq(x, y) : b.add_neq(x, y);
  if (!ok) return std::nullopt;
  return b;
}

inline std::optional<Bindings> unify(const Atom& a, const Atom& b, Bindings bindings,
                                     bool check_domains = true) {
  if (!bindings.unify(a, b, check_domains)) return std::nullopt;
  return bindings;
}

}  // namespace pocl
