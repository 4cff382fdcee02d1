#pragma once

// Test-only reference machinery: a direct recursive evaluator for path
// formulae over explicit lasso paths, a brute-force existence oracle built
// on maximal-path enumeration, and random system/formula generators. The
// evaluator deliberately shares nothing with the library's product search.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "alspec/kts.hpp"
#include "alspec/logic.hpp"

namespace oracle {

using namespace alspec;

// Positions of a path: prefix positions, then loop positions cycling; a
// finite path has one past-the-end position with no transition.
struct PathView {
  const Kts& kts;
  const Path& path;

  std::size_t plen() const { return path.prefix.size(); }
  std::size_t llen() const { return path.loop.size(); }

  std::size_t canonical(std::size_t pos) const {
    if (llen() == 0 || pos < plen()) return pos;
    return plen() + (pos - plen()) % llen();
  }

  bool has_step(std::size_t pos) const {
    if (llen() > 0) return true;
    return pos < plen();
  }

  const PathStep* step_at(std::size_t pos) const {
    const std::size_t c = canonical(pos);
    if (c < plen()) return &path.prefix[c];
    if (llen() > 0) return &path.loop[c - plen()];
    return nullptr;
  }

  int state_at(std::size_t pos) const {
    const std::size_t c = canonical(pos);
    if (const PathStep* s = step_at(c)) return s->src;
    return path.prefix.empty() ? path.start : path.prefix.back().dst;
  }

  // number of distinct positions
  std::size_t horizon() const { return plen() + (llen() ? llen() : 1); }
};

inline bool action_spec_matches(const ActionSpec& a, const std::vector<ActionToken>& alpha,
                                const Env& env) {
  if (a.exact) {
    for (const ActionToken& t : alpha)
      if (t == *a.exact) return true;
    return false;
  }
  Term comp = a.component ? *a.component : env.components.at(*a.ref);
  for (const ActionToken& t : alpha)
    for (const Term& part : t.parts)
      if (part == comp) return true;
  return false;
}

// Direct recursion over the path positions per the path-formula semantics;
// formulas must be in core form (expand_derived applied by the caller).
inline bool eval_path_at(const PathView& v, std::size_t pos, const PathF& p,
                         const Env& env) {
  switch (p->kind) {
    case PathFormula::Kind::Lift:
      return eval_state(v.kts, v.state_at(pos), p->state, env);
    case PathFormula::Kind::And:
      return eval_path_at(v, pos, p->lhs, env) && eval_path_at(v, pos, p->rhs, env);
    case PathFormula::Kind::Next:
      return v.has_step(pos) && eval_path_at(v, pos + 1, p->lhs, env);
    case PathFormula::Kind::NextA: {
      if (!v.has_step(pos)) return false;
      const PathStep* s = v.step_at(pos);
      const std::vector<ActionToken>* alpha = v.kts.alpha(s->src, s->dst);
      return alpha && action_spec_matches(p->action, *alpha, env) &&
             eval_path_at(v, pos + 1, p->lhs, env);
    }
    case PathFormula::Kind::Until: {
      // scan distinct suffixes only: canonical positions repeat past the
      // horizon
      std::set<std::size_t> seen;
      for (std::size_t j = pos;; ++j) {
        if (!seen.insert(v.canonical(j)).second) return false;
        if (eval_path_at(v, j, p->rhs, env)) return true;
        if (!eval_path_at(v, j, p->lhs, env)) return false;
        if (!v.has_step(j)) return false;  // end of a finite path
      }
    }
    case PathFormula::Kind::Eventually:
    case PathFormula::Kind::TStep:
      return eval_path_at(v, pos, expand_derived(p), env);
  }
  return false;
}

inline bool eval_path(const Kts& kts, const Path& path, const PathF& p, const Env& env) {
  PathView v{kts, path};
  return eval_path_at(v, 0, expand_derived(p), env);
}

// Brute-force oracle: some enumerated maximal path of bounded length
// satisfies the formula.
inline bool exists_by_enumeration(const Kts& kts, int from, const PathF& p,
                                  const Env& env, std::size_t bound) {
  bool found = false;
  for_each_maximal_path(kts, from, bound, [&](const Path& path) {
    if (eval_path(kts, path, p, env)) {
      found = true;
      return false;
    }
    return true;
  });
  return found;
}

// --- random systems and formulae -------------------------------------------

struct Rand {
  std::mt19937 rng;
  explicit Rand(unsigned seed) : rng(seed) {}
  int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }
  bool chance(int percent) { return pick(100) < percent; }
};

// A system over one nat variable x with single-component action tokens.
inline Kts random_kts(Rand& r, int max_states, int n_actions) {
  Kts kts;
  const int n = 2 + r.pick(max_states - 1);
  for (int i = 0; i < n; ++i) {
    GlobalState s;
    s.server = NamedTuple{"", {Term::nat(static_cast<std::uint64_t>(r.pick(4)))}};
    // states must be distinct: disambiguate by a second field
    s.server->elems.push_back(Term::nat(static_cast<std::uint64_t>(i)));
    kts.states.push_back(s);
    Interpretation interp;
    interp["x"] = s.server->elems[0];
    kts.interpretations.push_back(std::move(interp));
  }
  const char* names[] = {"a", "b", "c"};
  for (int i = 0; i < n; ++i) {
    int out_degree = 0;
    for (int j = 0; j < n && out_degree < 3; ++j) {
      if (!r.chance(35)) continue;
      std::vector<ActionToken> alpha;
      for (int t = 0; t < n_actions; ++t)
        if (r.chance(50)) alpha.push_back(ActionToken{{Term::constant(names[t])}});
      if (alpha.empty()) alpha.push_back(ActionToken{{Term::constant(names[r.pick(n_actions)])}});
      kts.transitions[{i, j}] = std::move(alpha);
      ++out_degree;
    }
  }
  kts.initial = 0;
  return kts;
}

// Positive-fragment formula of bounded depth with at most max_untils
// until/eventually nodes, so the shortest witnesses stay within the
// enumeration bound of the brute-force oracle.
inline PathF random_path_formula(Rand& r, int depth, int n_actions, int& untils,
                                 int max_untils) {
  const char* names[] = {"a", "b", "c"};
  auto atom = [&]() -> PathF {
    if (r.chance(30)) return PathFormula::lift(StateFormula::make_true());
    NumExpr num;
    num.offset = r.pick(4);
    return PathFormula::lift(StateFormula::eq_num("x", num));
  };
  if (depth <= 1) return atom();
  switch (r.pick(6)) {
    case 0:
      return atom();
    case 1:
      return PathFormula::next(random_path_formula(r, depth - 1, n_actions, untils, max_untils));
    case 2: {
      ActionSpec a;
      a.exact = ActionToken{{Term::constant(names[r.pick(n_actions)])}};
      return PathFormula::next_a(a, random_path_formula(r, depth - 1, n_actions, untils, max_untils));
    }
    case 3:
      if (untils < max_untils) {
        ++untils;
        return PathFormula::until(
            random_path_formula(r, depth - 1, n_actions, untils, 0),
            random_path_formula(r, depth - 1, n_actions, untils, max_untils));
      }
      return atom();
    case 4:
      if (untils < max_untils) {
        ++untils;
        return PathFormula::eventually(
            random_path_formula(r, depth - 1, n_actions, untils, max_untils));
      }
      return atom();
    default:
      return PathFormula::conjunction(
          random_path_formula(r, depth - 1, n_actions, untils, max_untils),
          random_path_formula(r, depth - 1, n_actions, untils, max_untils));
  }
}

}  // namespace oracle
