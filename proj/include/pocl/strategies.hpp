#pragma once

#include <cctype>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pocl/plan.hpp"
#include "pocl/rational.hpp"
#include "pocl/refine.hpp"

namespace pocl {

enum class Strategy { Lifo, Zlifo, ZlifoStar, Lcfr, Lc };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Lifo: return "lifo";
    case Strategy::Zlifo: return "zlifo";
    case Strategy::ZlifoStar: return "zlifo-star";
    case Strategy::Lcfr: return "lcfr";
    case Strategy::Lc: return "lc";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  std::string n = lowercase(name);
  if (n == "lifo") return Strategy::Lifo;
  if (n == "zlifo") return Strategy::Zlifo;
  if (n == "zlifo-star" || n == "zlifo*") return Strategy::ZlifoStar;
  if (n == "lcfr") return Strategy::Lcfr;
  if (n == "lc") return Strategy::Lc;
  throw std::invalid_argument("unknown strategy " + name);
}

// Delayed separation is on by default except for LCFR.
inline bool default_d_sep(Strategy s) { return s != Strategy::Lcfr; }

struct RankWeights {
  Rational s{1}, oc{1}, uc{1}, cl{0}, f{0};

  // Expressions such as "s+oc+0.1uc+f" or "2s+oc".
  static RankWeights parse(const std::string& text) {
    RankWeights w{Rational(0), Rational(0), Rational(0), Rational(0), Rational(0)};
    std::string t = lowercase(text);
    if (t.empty()) throw std::invalid_argument("empty rank expression");
    size_t i = 0;
    while (i < t.size()) {
      size_t j = t.find('+', i);
      std::string term = t.substr(i, j == std::string::npos ? std::string::npos : j - i);
      i = j == std::string::npos ? t.size() : j + 1;
      size_t k = 0;
      while (k < term.size() && (std::isdigit(static_cast<unsigned char>(term[k])) || term[k] == '.' || term[k] == '/')) ++k;
      Rational coef = k == 0 ? Rational(1) : Rational::parse(term.substr(0, k));
      std::string name = term.substr(k);
      if (name == "s") w.s = w.s + coef;
      else if (name == "oc") w.oc = w.oc + coef;
      else if (name == "uc") w.uc = w.uc + coef;
      else if (name == "cl") w.cl = w.cl + coef;
      else if (name == "f") w.f = w.f + coef;
      else throw std::invalid_argument("bad rank term '" + term + "'");
    }
    return w;
  }

  // Five comma-separated weights: S, OC, UC, CL, F.
  static RankWeights from_list(const std::string& text) {
    std::vector<Rational> v;
    size_t i = 0;
    while (i <= text.size()) {
      size_t j = text.find(',', i);
      v.push_back(Rational::parse(text.substr(i, j == std::string::npos ? std::string::npos : j - i)));
      if (j == std::string::npos) break;
      i = j + 1;
    }
    if (v.size() != 5) throw std::invalid_argument("custom weights need five values");
    return RankWeights{v[0], v[1], v[2], v[3], v[4]};
  }

  std::string str() const {
    std::string out;
    auto add = [&](const Rational& r, const char* n) {
      if (r.num == 0) return;
      if (!out.empty()) out += "+";
      if (!(r == Rational(1))) out += r.str();
      out += n;
    };
    add(s, "s");
    add(oc, "oc");
    add(uc, "uc");
    add(cl, "cl");
    add(f, "f");
    return out.empty() ? "0" : out;
  }
};

inline Rational rank_plan(const Plan& p, const RankWeights& w) {
  PlanMetrics m = metrics(p);
  return w.s * Rational(m.steps) + w.oc * Rational(m.open) + w.uc * Rational(m.threats) +
         w.cl * Rational(m.links) + w.f * Rational(m.facts);
}

struct Flaw {
  enum class Kind { None, Open, Threat };
  Kind kind = Kind::None;
  size_t index = 0;
  bool allow_separation = false;
};

inline int repair_cost(const Refiner& r, const Plan& p, const Flaw& f) {
  if (f.kind == Flaw::Kind::Open)
    return r.count_establishers(p, p.open[f.index], std::numeric_limits<int>::max()).count;
  if (f.kind == Flaw::Kind::Threat) return r.threat_repair_cost(p, p.threats[f.index], f.allow_separation);
  return 0;
}

namespace detail {

struct ThreatView {
  std::vector<ThreatClass> cls;
  int expired = -1;       // most recent expired or spurious
  int actionable = -1;    // most recent definite (or any live threat without d-sep)
  int any_live = -1;      // most recent live threat
};

inline ThreatView view_threats(const Refiner& r, const Plan& p, bool d_sep) {
  ThreatView v;
  v.cls.reserve(p.threats.size());
  for (const Threat& t : p.threats) v.cls.push_back(r.classify(p, t));
  for (int i = static_cast<int>(p.threats.size()) - 1; i >= 0; --i) {
    ThreatClass c = v.cls[i];
    bool dead = c == ThreatClass::Expired || c == ThreatClass::Spurious;
    if (dead) {
      if (v.expired < 0) v.expired = i;
      continue;
    }
    if (v.any_live < 0) v.any_live = i;
    if (v.actionable < 0 && (!d_sep || c == ThreatClass::Definite)) v.actionable = i;
  }
  return v;
}

inline Flaw threat_flaw(int i, bool allow_sep) { return Flaw{Flaw::Kind::Threat, static_cast<size_t>(i), allow_sep}; }
inline Flaw open_flaw(size_t i) { return Flaw{Flaw::Kind::Open, i, false}; }

}  // namespace detail

// Picks the next flaw. Expired and spurious threats are discarded first;
// potential threats under delayed separation wait until nothing else is left.
inline Flaw select_flaw(const Refiner& r, const Plan& p, Strategy strategy, bool d_sep) {
  detail::ThreatView tv = detail::view_threats(r, p, d_sep);
  if (tv.expired >= 0) return detail::threat_flaw(tv.expired, false);
  bool sep = !d_sep;
  auto forced = [&]() -> Flaw {
    if (tv.any_live >= 0) return detail::threat_flaw(tv.any_live, true);
    return Flaw{};
  };
  size_t n_open = p.open.size();
  switch (strategy) {
    case Strategy::Lifo:
      if (tv.actionable >= 0) return detail::threat_flaw(tv.actionable, sep);
      if (n_open) return detail::open_flaw(n_open - 1);
      return forced();
    case Strategy::Zlifo: {
      if (tv.actionable >= 0) return detail::threat_flaw(tv.actionable, sep);
      int one_new = -1, one_start = -1;
      for (int i = static_cast<int>(n_open) - 1; i >= 0; --i) {
        auto c = r.count_establishers(p, p.open[i], 2);
        if (c.count == 0) return detail::open_flaw(i);
        if (c.count == 1) {
          if (c.first_from_start) {
            if (one_start < 0) one_start = i;
          } else if (one_new < 0) {
            one_new = i;
          }
        }
      }
      if (one_new >= 0) return detail::open_flaw(one_new);
      if (one_start >= 0) return detail::open_flaw(one_start);
      if (n_open) return detail::open_flaw(n_open - 1);
      return forced();
    }
    case Strategy::ZlifoStar: {
      int one = -1;
      for (int i = static_cast<int>(n_open) - 1; i >= 0; --i) {
        auto c = r.count_establishers(p, p.open[i], 2);
        if (c.count == 0) return detail::open_flaw(i);
        if (c.count == 1 && one < 0) one = i;
      }
      if (one >= 0) return detail::open_flaw(one);
      if (tv.actionable >= 0) return detail::threat_flaw(tv.actionable, sep);
      if (n_open) return detail::open_flaw(n_open - 1);
      return forced();
    }
    case Strategy::Lc: {
      if (tv.actionable >= 0) return detail::threat_flaw(tv.actionable, sep);
      int best = -1, best_cost = std::numeric_limits<int>::max();
      for (int i = static_cast<int>(n_open) - 1; i >= 0 && best_cost > 0; --i) {
        int c = r.count_establishers(p, p.open[i], best_cost).count;
        if (c < best_cost) {
          best = i;
          best_cost = c;
        }
      }
      if (best >= 0) return detail::open_flaw(best);
      return forced();
    }
    case Strategy::Lcfr: {
      // Most recent flaw of least repair cost, threats and open conditions
      // merged by insertion order.
      Flaw best;
      int best_cost = std::numeric_limits<int>::max();
      int ti = static_cast<int>(p.threats.size()) - 1;
      int oi = static_cast<int>(n_open) - 1;
      while ((ti >= 0 || oi >= 0) && best_cost > 0) {
        bool take_threat = oi < 0 || (ti >= 0 && p.threats[ti].seq > p.open[oi].seq);
        if (take_threat) {
          int i = ti--;
          bool live_ok = !d_sep || tv.cls[i] == ThreatClass::Definite;
          if (!live_ok) continue;
          int c = r.threat_repair_cost(p, p.threats[i], sep);
          if (c < best_cost) {
            best = detail::threat_flaw(i, sep);
            best_cost = c;
          }
        } else {
          int i = oi--;
          int c = r.count_establishers(p, p.open[i], best_cost).count;
          if (c < best_cost) {
            best = detail::open_flaw(i);
            best_cost = c;
          }
        }
      }
      if (best.kind != Flaw::Kind::None) return best;
      return forced();
    }
  }
  return Flaw{};
}

}  // namespace pocl
