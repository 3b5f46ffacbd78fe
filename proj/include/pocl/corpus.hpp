#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pocl/op_lang.hpp"

namespace pocl {

struct BenchmarkCase {
  std::string name;
  std::string domain_text;
  std::string problem_text;
  std::set<std::string> tags;
  std::string provenance;
};

struct ParsedCase {
  std::vector<Operator> ops;
  Problem problem;
};

inline ParsedCase parse_case(const BenchmarkCase& c) {
  ParsedCase p;
  p.ops = parse_domain(c.domain_text);
  p.problem = parse_problem(c.problem_text, &p.ops);
  return p;
}

struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace detail {

inline bool formula_has(const Formula& f, Formula::Kind k) {
  if (f.kind == k) return true;
  for (const Formula& c : f.children)
    if (formula_has(c, k)) return true;
  return false;
}

inline bool formula_has_fact(const Formula& f) {
  if (f.is_literal()) return f.literal.fact;
  for (const Formula& c : f.children)
    if (formula_has_fact(c)) return true;
  return false;
}

}  // namespace detail

// Structural tags derived from the parsed operators and problem.
inline std::set<std::string> derive_tags(const std::vector<Operator>& ops, const Problem& prob) {
  std::set<std::string> tags;
  if (!prob.facts.empty()) tags.insert("has-facts");
  for (const Operator& op : ops) {
    if (!op.secondaries.empty()) tags.insert("has-conditional-effects");
    bool universal = detail::formula_has(op.primary.antecedent, Formula::Kind::Forall);
    for (const WhenClause& w : op.secondaries) {
      if (!w.quantified.empty() || detail::formula_has(w.antecedent, Formula::Kind::Forall)) universal = true;
      if (detail::formula_has_fact(w.antecedent)) tags.insert("has-facts");
    }
    if (universal) tags.insert("has-universals");
    if (detail::formula_has_fact(op.primary.antecedent)) tags.insert("has-facts");
  }
  if (detail::formula_has(prob.goal, Formula::Kind::Forall)) tags.insert("has-universals");
  return tags;
}

// Reads corpus/<name>/{domain,problem}.sexp.
inline BenchmarkCase load_case(const std::filesystem::path& dir) {
  BenchmarkCase c;
  c.name = dir.filename().string();
  if (c.name.empty()) c.name = dir.parent_path().filename().string();
  c.domain_text = read_file(dir / "domain.sexp");
  c.problem_text = read_file(dir / "problem.sexp");
  ParsedCase p = parse_case(c);
  c.tags = derive_tags(p.ops, p.problem);
  return c;
}

inline constexpr int kArtWidth = 10;

// Two layers of ten operators. a<i>-1 needs (i<i>) and adds (p<i>); a<i>-2
// needs (p<i>) and adds (g<i>). In each layer n_est operators also add their
// right neighbour's precondition, and a run of n_clob consecutive operators
// each delete their left neighbour's precondition, which orders the run.
// The seed picks the establishers, the start of the clobbering run and the
// goal order.
inline BenchmarkCase generate_art(int n_est, int n_clob, uint64_t seed) {
  if (n_est < 0 || n_est > 9 || n_clob < 0 || n_clob > 9)
    throw std::invalid_argument("ART parameters must lie in 0..9");
  std::mt19937_64 rng(seed);
  auto below = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };

  struct Layer {
    std::vector<char> est, clob;
  };
  Layer layers[2];
  for (Layer& l : layers) {
    std::vector<int> idx(kArtWidth - 1);
    for (int i = 0; i < kArtWidth - 1; ++i) idx[i] = i;
    for (int i = kArtWidth - 2; i > 0; --i) std::swap(idx[i], idx[below(i + 1)]);
    l.est.assign(kArtWidth, 0);
    for (int k = 0; k < n_est; ++k) l.est[idx[k]] = 1;
    l.clob.assign(kArtWidth, 0);
    int start = 1 + below(kArtWidth - n_clob);
    for (int k = 0; k < n_clob; ++k) l.clob[start + k] = 1;
  }

  auto pre = [](int layer, int i) { return std::string(layer == 0 ? "(i" : "(p") + std::to_string(i) + ")"; };
  auto add = [](int layer, int i) { return std::string(layer == 0 ? "(p" : "(g") + std::to_string(i) + ")"; };

  std::ostringstream d;
  d << "(define (domain art-" << n_est << "-" << n_clob << ")\n";
  for (int layer = 0; layer < 2; ++layer)
    for (int i = 0; i < kArtWidth; ++i) {
      d << "  (:operator a" << i << "-" << layer + 1 << "\n   :parameters ()\n   :precondition " << pre(layer, i)
        << "\n   :effect (and " << add(layer, i);
      if (layers[layer].est[i]) d << " " << pre(layer, i + 1);
      if (layers[layer].clob[i]) d << " (not " << pre(layer, i - 1) << ")";
      d << "))\n";
    }
  d << ")\n";

  std::vector<int> goals(kArtWidth);
  for (int i = 0; i < kArtWidth; ++i) goals[i] = i;
  for (int i = kArtWidth - 1; i > 0; --i) std::swap(goals[i], goals[below(i + 1)]);
  std::ostringstream p;
  p << "(define (problem art-" << n_est << "-" << n_clob << "-" << seed << ")\n  :domain art-" << n_est << "-"
    << n_clob << "\n  :inits (";
  for (int i = 0; i < kArtWidth; ++i) p << (i ? " " : "") << "(i" << i << ")";
  p << ")\n  :goal (and";
  for (int g : goals) p << " (g" << g << ")";
  p << "))\n";

  BenchmarkCase c;
  c.name = "art-" + std::to_string(n_est) + "-" + std::to_string(n_clob) + "-s" + std::to_string(seed);
  c.domain_text = d.str();
  c.problem_text = p.str();
  c.provenance = "generated";
  return c;
}

}  // namespace pocl
