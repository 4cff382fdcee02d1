#include "alspec/logic.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace alspec {

// --- AST construction ----------------------------------------------------

StateF StateFormula::make_true() { return std::make_shared<StateFormula>(); }

StateF StateFormula::eq_num(std::string var, NumExpr num) {
  auto f = std::make_shared<StateFormula>();
  f->kind = Kind::EqNum;
  f->var = std::move(var);
  f->num = std::move(num);
  return f;
}

StateF StateFormula::eq_value(std::string var, Term value) {
  auto f = std::make_shared<StateFormula>();
  f->kind = Kind::EqValue;
  f->var = std::move(var);
  f->value = std::move(value);
  return f;
}

StateF StateFormula::eq_vars(std::string var, std::string var2) {
  auto f = std::make_shared<StateFormula>();
  f->kind = Kind::EqVars;
  f->var = std::move(var);
  f->var2 = std::move(var2);
  return f;
}

StateF StateFormula::leq(std::string var, NumExpr num) {
  auto f = std::make_shared<StateFormula>();
  f->kind = Kind::Leq;
  f->var = std::move(var);
  f->num = std::move(num);
  return f;
}

StateF StateFormula::negation(StateF f) {
  auto out = std::make_shared<StateFormula>();
  out->kind = Kind::Not;
  out->lhs = std::move(f);
  return out;
}

StateF StateFormula::conjunction(StateF a, StateF b) {
  auto out = std::make_shared<StateFormula>();
  out->kind = Kind::And;
  out->lhs = std::move(a);
  out->rhs = std::move(b);
  return out;
}

StateF StateFormula::exists(PathF p) {
  auto out = std::make_shared<StateFormula>();
  out->kind = Kind::Exists;
  out->path = std::move(p);
  return out;
}

PathF PathFormula::lift(StateF f) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::Lift;
  out->state = std::move(f);
  return out;
}

PathF PathFormula::conjunction(PathF a, PathF b) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::And;
  out->lhs = std::move(a);
  out->rhs = std::move(b);
  return out;
}

PathF PathFormula::next(PathF p) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::Next;
  out->lhs = std::move(p);
  return out;
}

PathF PathFormula::next_a(ActionSpec a, PathF p) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::NextA;
  out->action = std::move(a);
  out->lhs = std::move(p);
  return out;
}

PathF PathFormula::until(PathF a, PathF b) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::Until;
  out->lhs = std::move(a);
  out->rhs = std::move(b);
  return out;
}

PathF PathFormula::eventually(PathF p) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::Eventually;
  out->lhs = std::move(p);
  return out;
}

PathF PathFormula::step(StateF s, ActionSpec a, PathF p) {
  auto out = std::make_shared<PathFormula>();
  out->kind = Kind::TStep;
  out->state = std::move(s);
  out->action = std::move(a);
  out->rhs = std::move(p);
  return out;
}

// --- derived-operator expansion -------------------------------------------

PathF expand_derived(const PathF& p) {
  switch (p->kind) {
    case PathFormula::Kind::Lift:
      return PathFormula::lift(expand_derived(p->state));
    case PathFormula::Kind::And:
      return PathFormula::conjunction(expand_derived(p->lhs), expand_derived(p->rhs));
    case PathFormula::Kind::Next:
      return PathFormula::next(expand_derived(p->lhs));
    case PathFormula::Kind::NextA:
      return PathFormula::next_a(p->action, expand_derived(p->lhs));
    case PathFormula::Kind::Until:
      return PathFormula::until(expand_derived(p->lhs), expand_derived(p->rhs));
    case PathFormula::Kind::Eventually:
      // F p: p holds after at least one transition
      return PathFormula::next(PathFormula::until(
          PathFormula::lift(StateFormula::make_true()), expand_derived(p->lhs)));
    case PathFormula::Kind::TStep:
      return PathFormula::conjunction(
          PathFormula::lift(expand_derived(p->state)),
          PathFormula::next_a(p->action, expand_derived(p->rhs)));
  }
  return p;
}

StateF expand_derived(const StateF& f) {
  switch (f->kind) {
    case StateFormula::Kind::Not:
      return StateFormula::negation(expand_derived(f->lhs));
    case StateFormula::Kind::And:
      return StateFormula::conjunction(expand_derived(f->lhs), expand_derived(f->rhs));
    case StateFormula::Kind::Exists:
      return StateFormula::exists(expand_derived(f->path));
    default:
      return f;
  }
}

// --- rendering -------------------------------------------------------------

std::string render(const NumExpr& e) {
  if (!e.ref) return std::to_string(e.offset);
  std::string out = *e.ref;
  if (e.offset > 0) out += " + " + std::to_string(e.offset);
  if (e.offset < 0) out += " - " + std::to_string(-e.offset);
  return out;
}

std::string render(const ActionSpec& a) {
  if (a.exact) return render(*a.exact);
  if (a.component) return render(*a.component);
  return a.ref ? *a.ref : "?";
}

std::string render(const StateF& f) {
  switch (f->kind) {
    case StateFormula::Kind::True:
      return "true";
    case StateFormula::Kind::EqNum:
      return f->var + " = " + render(f->num);
    case StateFormula::Kind::EqValue:
      return f->var + " = " + render(f->value);
    case StateFormula::Kind::EqVars:
      return f->var + " = " + f->var2;
    case StateFormula::Kind::Leq:
      return f->var + " <= " + render(f->num);
    case StateFormula::Kind::Not:
      return "!(" + render(f->lhs) + ")";
    case StateFormula::Kind::And:
      return "(" + render(f->lhs) + " & " + render(f->rhs) + ")";
    case StateFormula::Kind::Exists:
      return "E( " + render(f->path) + " )";
  }
  return "";
}

std::string render(const PathF& p) {
  switch (p->kind) {
    case PathFormula::Kind::Lift:
      return render(p->state);
    case PathFormula::Kind::And:
      return "(" + render(p->lhs) + " & " + render(p->rhs) + ")";
    case PathFormula::Kind::Next:
      return "X " + render(p->lhs);
    case PathFormula::Kind::NextA:
      return "X[" + render(p->action) + "] " + render(p->lhs);
    case PathFormula::Kind::Until:
      return "(" + render(p->lhs) + " U " + render(p->rhs) + ")";
    case PathFormula::Kind::Eventually:
      return "F( " + render(p->lhs) + " )";
    case PathFormula::Kind::TStep:
      return render(p->state) + " T[" + render(p->action) + "] " + render(p->rhs);
  }
  return "";
}

std::string render(const QuantifiedFormula& q) {
  std::string out;
  for (const Binder& b : q.prefix) {
    out += b.exists ? "exists " : "forall ";
    out += b.name + " in ";
    out += b.domain == Binder::Domain::Range ? "range(" + b.domain_name + ")"
                                             : b.domain_name;
    out += ": ";
  }
  if (q.always) return out + "AG( " + render(q.body) + " )";
  return out + render(q.body);
}

// --- evaluation ------------------------------------------------------------

namespace {

long long resolve_num(const NumExpr& e, const Env& env) {
  if (!e.ref) return e.offset;
  auto it = env.nums.find(*e.ref);
  if (it == env.nums.end())
    throw UnboundConstantError("global constant '" + *e.ref + "' is not bound");
  return it->second + e.offset;
}

Term resolve_component(const ActionSpec& a, const Env& env) {
  if (a.component) return *a.component;
  auto it = env.components.find(*a.ref);
  if (it == env.components.end())
    throw UnboundConstantError("action parameter '" + *a.ref + "' is not bound");
  return it->second;
}

bool action_matches(const ActionSpec& a, const std::vector<ActionToken>& alpha,
                    const Env& env) {
  if (a.exact)
    return std::find(alpha.begin(), alpha.end(), *a.exact) != alpha.end();
  const Term comp = resolve_component(a, env);
  for (const ActionToken& t : alpha)
    for (const Term& part : t.parts)
      if (part == comp) return true;
  return false;
}

const Term& interp_value(const Kts& kts, int state, const std::string& var) {
  const auto& interp = kts.interpretations[static_cast<std::size_t>(state)];
  auto it = interp.find(var);
  if (it == interp.end())
    throw UnknownVariableError("variable '" + var + "' is not declared for this system");
  return it->second;
}

// One conjunctive way of satisfying an obligation set at the current
// position: action requirements the next transition must meet and the
// obligations that move to the next position.
struct Resolution {
  std::vector<int> next;        // obligation ids, sorted
  std::vector<int> action_ids;  // indices into the action table, sorted
};

struct Evaluator {
  const Kts& kts;
  const Env& env;
  std::size_t witness_bound;

  // interned core path formulas, id'd by canonical rendering
  std::vector<PathF> formulas;
  std::map<std::string, int> formula_ids;
  std::vector<ActionSpec> actions;
  std::map<std::string, int> action_ids;
  std::map<std::pair<const StateFormula*, int>, bool> state_memo;

  int intern(const PathF& p) {
    const std::string key = render(p);
    auto it = formula_ids.find(key);
    if (it != formula_ids.end()) return it->second;
    const int id = static_cast<int>(formulas.size());
    formulas.push_back(p);
    formula_ids.emplace(key, id);
    return id;
  }

  int intern_action(const ActionSpec& a) {
    const std::string key = render(a);
    auto it = action_ids.find(key);
    if (it != action_ids.end()) return it->second;
    const int id = static_cast<int>(actions.size());
    actions.push_back(a);
    action_ids.emplace(key, id);
    return id;
  }

  bool state_holds(int state, const StateF& f) {
    auto key = std::make_pair(f.get(), state);
    auto it = state_memo.find(key);
    if (it != state_memo.end()) return it->second;
    bool v = false;
    switch (f->kind) {
      case StateFormula::Kind::True:
        v = true;
        break;
      case StateFormula::Kind::EqNum: {
        const Term& val = interp_value(kts, state, f->var);
        if (val.kind() != Term::Kind::Nat)
          throw TypeMismatchError("variable '" + f->var + "' is not numeric");
        const long long want = resolve_num(f->num, env);
        v = want >= 0 && val.nat_value() == static_cast<std::uint64_t>(want);
        break;
      }
      case StateFormula::Kind::EqValue:
        v = interp_value(kts, state, f->var) == f->value;
        break;
      case StateFormula::Kind::EqVars: {
        const Term& a = interp_value(kts, state, f->var);
        const Term& b = interp_value(kts, state, f->var2);
        if (a.kind() != b.kind())
          throw TypeMismatchError("variables '" + f->var + "' and '" + f->var2 +
                                  "' have different types");
        v = a == b;
        break;
      }
      case StateFormula::Kind::Leq: {
        const Term& val = interp_value(kts, state, f->var);
        if (val.kind() != Term::Kind::Nat)
          throw TypeMismatchError("variable '" + f->var + "' is not numeric");
        const long long want = resolve_num(f->num, env);
        v = want >= 0 && val.nat_value() <= static_cast<std::uint64_t>(want);
        break;
      }
      case StateFormula::Kind::Not:
        v = !state_holds(state, f->lhs);
        break;
      case StateFormula::Kind::And:
        v = state_holds(state, f->lhs) && state_holds(state, f->rhs);
        break;
      case StateFormula::Kind::Exists:
        v = exists_path(state, f->path).holds;
        break;
    }
    state_memo.emplace(key, v);
    return v;
  }

  static void merge_sorted(std::vector<int>& into, const std::vector<int>& from) {
    for (int x : from)
      if (std::find(into.begin(), into.end(), x) == into.end()) into.push_back(x);
    std::sort(into.begin(), into.end());
  }

  std::vector<Resolution> combine(std::vector<Resolution> a,
                                  const std::vector<Resolution>& b) {
    std::vector<Resolution> out;
    for (const Resolution& x : a)
      for (const Resolution& y : b) {
        Resolution r = x;
        merge_sorted(r.next, y.next);
        merge_sorted(r.action_ids, y.action_ids);
        out.push_back(std::move(r));
      }
    return out;
  }

  // Expands one obligation at the current state into its resolutions;
  // an empty result means the obligation cannot be met here.
  std::vector<Resolution> expand(int state, int fid) {
    // copy the handle: intern() may grow the formula table
    const PathF p = formulas[static_cast<std::size_t>(fid)];
    switch (p->kind) {
      case PathFormula::Kind::Lift:
        if (state_holds(state, p->state)) return {Resolution{}};
        return {};
      case PathFormula::Kind::And: {
        auto l = expand(state, intern(p->lhs));
        if (l.empty()) return {};
        auto r = expand(state, intern(p->rhs));
        if (r.empty()) return {};
        return combine(std::move(l), r);
      }
      case PathFormula::Kind::Next:
        return {Resolution{{intern(p->lhs)}, {}}};
      case PathFormula::Kind::NextA:
        return {Resolution{{intern(p->lhs)}, {intern_action(p->action)}}};
      case PathFormula::Kind::Until: {
        // either the right side holds from here, or the left side holds
        // now and the until is carried one step
        std::vector<Resolution> out = expand(state, intern(p->rhs));
        auto l = expand(state, intern(p->lhs));
        if (!l.empty()) {
          Resolution carry{{fid}, {}};
          for (auto& r : combine(std::move(l), {carry})) out.push_back(std::move(r));
        }
        return out;
      }
      case PathFormula::Kind::Eventually:
      case PathFormula::Kind::TStep:
        return expand(state, intern(expand_derived(p)));
    }
    return {};
  }

  std::vector<Resolution> resolutions(int state, const std::vector<int>& obls) {
    std::vector<Resolution> acc{Resolution{}};
    for (int fid : obls) {
      auto one = expand(state, fid);
      if (one.empty()) return {};
      acc = combine(std::move(acc), one);
    }
    // deduplicate; order stays deterministic
    std::vector<Resolution> out;
    for (auto& r : acc) {
      bool dup = false;
      for (const auto& prev : out)
        if (prev.next == r.next && prev.action_ids == r.action_ids) {
          dup = true;
          break;
        }
      if (!dup) out.push_back(std::move(r));
    }
    return out;
  }

  // Extends a discharge prefix to a maximal path: a dead end closes it as a
  // finite path, otherwise the first-successor walk is followed until a
  // state repeats, which yields the loop.
  Path extend_to_maximal(Path p) {
    int at = p.prefix.empty() ? p.start : p.prefix.back().dst;
    std::vector<int> walk{at};
    std::vector<PathStep> steps;
    while (true) {
      const auto succ = kts.successors(at);
      if (succ.empty()) {
        p.prefix.insert(p.prefix.end(), steps.begin(), steps.end());
        return p;
      }
      const int next = succ.front();
      steps.push_back({at, next});
      at = next;
      for (std::size_t i = 0; i < walk.size(); ++i) {
        if (walk[i] == next) {
          p.prefix.insert(p.prefix.end(), steps.begin(),
                          steps.begin() + static_cast<long>(i));
          p.loop.assign(steps.begin() + static_cast<long>(i), steps.end());
          return p;
        }
      }
      walk.push_back(next);
    }
  }

  Verdict exists_path(int start, const PathF& formula) {
    struct Node {
      int state;
      std::vector<int> obls;
    };
    std::vector<Node> nodes;
    std::map<std::pair<int, std::vector<int>>, int> seen;
    std::vector<std::pair<int, PathStep>> parent;  // node id -> (parent, step)

    auto push = [&](int state, std::vector<int> obls, int from_node,
                    const PathStep& step) -> int {
      auto key = std::make_pair(state, obls);
      auto it = seen.find(key);
      if (it != seen.end()) return -1;
      const int id = static_cast<int>(nodes.size());
      seen.emplace(std::move(key), id);
      nodes.push_back({state, std::move(obls)});
      parent.emplace_back(from_node, step);
      return id;
    };

    push(start, {intern(formula)}, -1, {});
    for (std::size_t head = 0; head < nodes.size(); ++head) {
      const Node node = nodes[head];  // copy: nodes may reallocate
      const auto res = resolutions(node.state, node.obls);
      for (const Resolution& r : res) {
        if (r.next.empty() && r.action_ids.empty()) {
          // all obligations discharged: reconstruct the prefix
          Path p;
          std::vector<PathStep> rev;
          for (int n = static_cast<int>(head); parent[static_cast<std::size_t>(n)].first >= 0;
               n = parent[static_cast<std::size_t>(n)].first)
            rev.push_back(parent[static_cast<std::size_t>(n)].second);
          std::reverse(rev.begin(), rev.end());
          p.start = start;
          p.prefix = std::move(rev);
          Verdict v;
          v.holds = true;
          v.witness = extend_to_maximal(std::move(p));
          if (v.witness->length() > witness_bound) v.witness.reset();
          return v;
        }
      }
      for (const Resolution& r : res) {
        if (r.next.empty() && r.action_ids.empty()) continue;
        for (int target : kts.successors(node.state)) {
          const std::vector<ActionToken>* alpha = kts.alpha(node.state, target);
          bool ok = true;
          for (int aid : r.action_ids)
            if (!action_matches(actions[static_cast<std::size_t>(aid)], *alpha, env)) {
              ok = false;
              break;
            }
          if (!ok) continue;
          push(target, r.next, static_cast<int>(head), {node.state, target});
        }
      }
    }
    return Verdict{};
  }
};

}  // namespace

bool eval_state(const Kts& kts, int state, const StateF& f, const Env& env) {
  if (state < 0 || static_cast<std::size_t>(state) >= kts.states.size())
    throw UnknownStateError("no state with id " + std::to_string(state));
  Evaluator ev{kts, env, 64, {}, {}, {}, {}, {}};
  return ev.state_holds(state, expand_derived(f));
}

Verdict eval_exists_path(const Kts& kts, int state, const PathF& p, const Env& env,
                         std::size_t witness_bound) {
  if (state < 0 || static_cast<std::size_t>(state) >= kts.states.size())
    throw UnknownStateError("no state with id " + std::to_string(state));
  Evaluator ev{kts, env, witness_bound, {}, {}, {}, {}, {}};
  return ev.exists_path(state, expand_derived(p));
}

Verdict check_invariant(const Kts& kts, const StateF& f, const Env& env) {
  const StateF body = expand_derived(f);
  Evaluator ev{kts, env, 64, {}, {}, {}, {}, {}};
  Verdict v;
  v.holds = true;
  for (std::size_t s = 0; s < kts.states.size(); ++s) {
    if (!ev.state_holds(static_cast<int>(s), body)) {
      v.holds = false;
      v.counterexample_state = static_cast<int>(s);
      return v;
    }
  }
  return v;
}

std::vector<long long> observed_range(const Kts& kts, const std::string& var) {
  long long max = 0;
  bool found = false;
  for (const Interpretation& interp : kts.interpretations) {
    auto it = interp.find(var);
    if (it == interp.end() || it->second.kind() != Term::Kind::Nat) continue;
    found = true;
    max = std::max(max, static_cast<long long>(it->second.nat_value()));
  }
  if (!found)
    throw UnknownVariableError("variable '" + var +
                               "' has no numeric values in this system");
  std::vector<long long> out;
  for (long long v = 0; v <= max; ++v) out.push_back(v);
  return out;
}

namespace {

struct QuantEval {
  const Kts& kts;
  const QuantifiedFormula& q;
  EvalMode mode;
  const std::map<std::string, std::vector<Term>>& named_domains;
  std::size_t witness_bound;
  Env env;
  std::vector<std::pair<std::string, std::string>> bound;
  std::size_t evaluated = 0;

  Verdict body_verdict(int state) {
    if (q.body->kind == StateFormula::Kind::Exists) {
      Verdict v = eval_exists_path(kts, state, q.body->path, env, witness_bound);
      return v;
    }
    Verdict v;
    v.holds = eval_state(kts, state, q.body, env);
    return v;
  }

  Verdict eval_body() {
    ++evaluated;
    if (q.always) return check_invariant(kts, q.body, env);
    if (mode == EvalMode::AtInit) return body_verdict(kts.initial);
    for (std::size_t s = 0; s < kts.states.size(); ++s) {
      Verdict v = body_verdict(static_cast<int>(s));
      if (v.holds) return v;
    }
    return Verdict{};
  }

  Verdict run(std::size_t binder) {
    if (binder == q.prefix.size()) {
      Verdict v = eval_body();
      v.bindings = bound;
      return v;
    }
    const Binder& b = q.prefix[binder];
    Verdict last;
    auto consider = [&](const std::string& rendered, auto bindfn) -> std::optional<Verdict> {
      bindfn();
      bound.emplace_back(b.name, rendered);
      Verdict v = run(binder + 1);
      bound.pop_back();
      if (v.holds == b.exists) return v;  // short-circuit: found / violated
      last = std::move(v);
      return std::nullopt;
    };

    if (b.domain == Binder::Domain::Named) {
      auto it = named_domains.find(b.domain_name);
      if (it == named_domains.end())
        throw UnboundedQuantifierDomainError("domain '" + b.domain_name +
                                             "' is not declared or not finite");
      for (const Term& value : it->second) {
        if (auto v = consider(render(value), [&] {
              env.components[b.name] = value;
              env.nums.erase(b.name);
            }))
          return *v;
      }
      env.components.erase(b.name);
    } else {
      for (long long value : observed_range(kts, b.domain_name)) {
        if (auto v = consider(std::to_string(value), [&] {
              env.nums[b.name] = value;
              env.components.erase(b.name);
            }))
          return *v;
      }
      env.nums.erase(b.name);
    }
    // exhausted: for exists nothing satisfied, for forall everything did
    (void)last;
    Verdict v;
    v.holds = !b.exists;
    return v;
  }
};

}  // namespace

Verdict check_quantified(const Kts& kts, const QuantifiedFormula& q, EvalMode mode,
                         const std::map<std::string, std::vector<Term>>& named_domains,
                         const Env& base_env, std::size_t witness_bound) {
  QuantEval qe{kts, q, mode, named_domains, witness_bound, base_env, {}, 0};
  Verdict v = qe.run(0);
  v.assignments_evaluated = qe.evaluated;
  return v;
}

// --- parser ---------------------------------------------------------------

namespace {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool ident_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string peek() {
    skip_ws();
    if (pos >= text.size()) return "";
    const char c = text[pos];
    if (ident_char(c)) {
      std::size_t end = pos;
      while (end < text.size() && ident_char(text[end])) ++end;
      return text.substr(pos, end - pos);
    }
    if (c == '<' && pos + 1 < text.size() && text[pos + 1] == '=') return "<=";
    return std::string(1, c);
  }

  std::string next() {
    const std::string tok = peek();
    pos += tok.size();
    return tok;
  }

  bool accept(const std::string& tok) {
    if (peek() != tok) return false;
    next();
    return true;
  }

  void expect(const std::string& tok, const std::string& what) {
    if (!accept(tok))
      throw ParseError(pos, "expected " + what + " but found '" + peek() + "'", tok);
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
};

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

struct FormulaParser {
  Lexer lex;
  const FormulaContext& ctx;
  std::set<std::string> bound_names;  // quantifier binders in scope

  explicit FormulaParser(const std::string& text, const FormulaContext& c)
      : lex{text}, ctx(c) {}

  [[noreturn]] void fail(const std::string& msg, const std::string& expected = "") {
    throw ParseError(lex.pos, msg, expected);
  }

  bool is_variable(const std::string& name) const { return ctx.variables.count(name); }
  bool is_numeric_name(const std::string& name) const {
    return ctx.globals.count(name) || bound_names.count(name);
  }

  QuantifiedFormula parse_top() {
    QuantifiedFormula q;
    while (true) {
      const std::string tok = lex.peek();
      if (tok == "exists" || tok == "forall") {
        lex.next();
        Binder b;
        b.exists = tok == "exists";
        b.name = lex.next();
        if (b.name.empty() || !lex.ident_char(b.name[0])) fail("expected a binder name");
        lex.expect("in", "'in' after the binder name");
        const std::string dom = lex.next();
        if (dom == "range") {
          lex.expect("(", "'(' after range");
          b.domain = Binder::Domain::Range;
          b.domain_name = lex.next();
          if (!is_variable(b.domain_name))
            fail("range() needs a declared state variable, got '" + b.domain_name + "'");
          lex.expect(")", "')' after the range variable");
        } else {
          b.domain = Binder::Domain::Named;
          b.domain_name = dom;
          if (!ctx.domains.count(dom)) fail("unknown quantifier domain '" + dom + "'");
        }
        lex.expect(":", "':' after the quantifier binder");
        bound_names.insert(b.name);
        q.prefix.push_back(std::move(b));
        continue;
      }
      break;
    }
    if (lex.peek() == "AG") {
      lex.next();
      lex.expect("(", "'(' after AG");
      q.always = true;
      q.body = parse_state();
      lex.expect(")", "')' closing AG");
    } else {
      q.body = parse_state();
    }
    if (!lex.at_end()) fail("unexpected trailing input '" + lex.peek() + "'");
    return q;
  }

  // stateφ := unary ('&' stateφ)?
  StateF parse_state() {
    StateF lhs = parse_state_unary();
    if (lex.accept("&")) return StateFormula::conjunction(lhs, parse_state());
    return lhs;
  }

  StateF parse_state_unary() {
    if (lex.accept("!")) return StateFormula::negation(parse_state_unary());
    return parse_state_atom();
  }

  StateF set_shorthand() {
    // {v1,v2} abbreviates x = {v1,v2} for the unique set-typed variable
    if (!ctx.single_set_var)
      fail("the set shorthand needs a system with a single set-typed variable");
    Term value = parse_set_literal();
    return StateFormula::eq_value(*ctx.single_set_var, value);
  }

  Term parse_set_literal() {
    lex.expect("{", "'{'");
    std::vector<std::string> elems;
    if (!lex.accept("}")) {
      while (true) {
        const std::string e = lex.next();
        if (e.empty() || !lex.ident_char(e[0])) fail("expected a set element");
        if (!ctx.constants.count(e)) fail("unknown set element '" + e + "'");
        elems.push_back(e);
        if (lex.accept("}")) break;
        lex.expect(",", "',' between set elements");
      }
    }
    return Term::set(std::move(elems));
  }

  StateF parse_state_atom() {
    const std::string tok = lex.peek();
    if (tok == "true") {
      lex.next();
      return StateFormula::make_true();
    }
    if (tok == "E") {
      lex.next();
      lex.expect("(", "'(' after E");
      PathF p = parse_path();
      lex.expect(")", "')' closing E");
      return StateFormula::exists(p);
    }
    if (tok == "{") return set_shorthand();
    if (tok == "(") {
      lex.next();
      StateF f = parse_state();
      lex.expect(")", "')'");
      return f;
    }
    if (tok.empty()) fail("expected a state formula", "state formula");
    lex.next();
    if (!is_variable(tok)) fail("unknown state variable '" + tok + "'");
    return parse_comparison(tok);
  }

  // NumExpr := int | name | name ('+'|'-') int
  std::optional<NumExpr> parse_num_expr_opt(const std::string& first) {
    NumExpr e;
    if (all_digits(first) && !ctx.constants.count(first)) {
      e.offset = std::stoll(first);
    } else if (is_numeric_name(first)) {
      e.ref = first;
    } else {
      return std::nullopt;
    }
    if (lex.peek() == "+" || lex.peek() == "-") {
      const bool plus = lex.next() == "+";
      const std::string n = lex.next();
      if (!all_digits(n)) fail("expected an integer offset");
      const long long off = std::stoll(n);
      e.offset += plus ? off : -off;
    }
    return e;
  }

  StateF parse_comparison(const std::string& var) {
    if (lex.accept("<=")) {
      const std::string rhs = lex.next();
      auto num = parse_num_expr_opt(rhs);
      if (!num) fail("'" + rhs + "' is not a global constant or integer");
      return StateFormula::leq(var, *num);
    }
    lex.expect("=", "'=' or '<=' after the variable");
    const std::string rhs = lex.peek();
    if (rhs == "{") {
      Term value = parse_set_literal();
      return StateFormula::eq_value(var, value);
    }
    lex.next();
    if (rhs.empty() || !lex.ident_char(rhs[0])) fail("expected a comparison value");
    if (is_variable(rhs)) return StateFormula::eq_vars(var, rhs);
    if (auto num = parse_num_expr_opt(rhs)) return StateFormula::eq_num(var, *num);
    if (ctx.constants.count(rhs))
      return StateFormula::eq_value(var, Term::constant(rhs));
    fail("unknown comparison value '" + rhs + "'");
  }

  // pathφ := conj ('U' pathφ)?
  PathF parse_path() {
    PathF lhs = parse_path_conj();
    if (lex.accept("U")) return PathFormula::until(lhs, parse_path());
    return lhs;
  }

  PathF parse_path_conj() {
    PathF lhs = parse_path_step();
    if (lex.accept("&")) return PathFormula::conjunction(lhs, parse_path_conj());
    return lhs;
  }

  PathF parse_path_step() {
    const std::string tok = lex.peek();
    if (tok == "X") {
      lex.next();
      if (lex.accept("[")) {
        ActionSpec a = parse_action();
        lex.expect("]", "']' closing the action");
        return PathFormula::next_a(a, parse_path_step());
      }
      return PathFormula::next(parse_path_step());
    }
    if (tok == "F") {
      lex.next();
      const bool paren = lex.accept("(");
      PathF p = paren ? parse_path() : parse_path_step();
      if (paren) lex.expect(")", "')' closing F");
      return PathFormula::eventually(p);
    }
    return parse_path_tstep();
  }

  PathF parse_path_tstep() {
    PathF atom = parse_path_atom();
    if (lex.peek() == "T") {
      lex.next();
      lex.expect("[", "'[' after T");
      ActionSpec a = parse_action();
      lex.expect("]", "']' closing the action");
      StateF lhs = lift_state(atom);
      return PathFormula::step(lhs, a, parse_path_step());
    }
    return atom;
  }

  StateF lift_state(const PathF& p) {
    if (p->kind == PathFormula::Kind::Lift) return p->state;
    if (p->kind == PathFormula::Kind::And) {
      // a parenthesised conjunction of state formulae is still a state formula
      return StateFormula::conjunction(lift_state(p->lhs), lift_state(p->rhs));
    }
    fail("the left operand of T must be a state formula");
  }

  PathF parse_path_atom() {
    if (lex.peek() == "(") {
      lex.next();
      PathF p = parse_path();
      lex.expect(")", "')'");
      return p;
    }
    return PathFormula::lift(parse_state_unary());
  }

  Term parse_action_component() {
    const std::string tok = lex.next();
    if (tok.empty() || !lex.ident_char(tok[0])) fail("expected an action component");
    if (lex.accept("(")) {
      std::vector<Term> args;
      if (!lex.accept(")")) {
        while (true) {
          args.push_back(parse_action_component());
          if (lex.accept(")")) break;
          lex.expect(",", "',' between arguments");
        }
      }
      return Term::composite(tok, std::move(args));
    }
    if (ctx.constants.count(tok)) return Term::constant(tok);
    if (all_digits(tok)) return Term::nat(std::stoull(tok));
    fail("unknown action component '" + tok + "'");
  }

  ActionSpec parse_action() {
    ActionSpec a;
    if (lex.peek() == "(") {
      lex.next();
      ActionToken token;
      while (true) {
        token.parts.push_back(parse_action_component());
        if (lex.accept(")")) break;
        lex.expect(",", "',' between action components");
      }
      a.exact = std::move(token);
      return a;
    }
    const std::string tok = lex.next();
    if (tok.empty() || !lex.ident_char(tok[0])) fail("expected an action");
    if (bound_names.count(tok)) {
      a.ref = tok;
      return a;
    }
    if (ctx.constants.count(tok)) {
      a.component = Term::constant(tok);
      return a;
    }
    fail("unknown action '" + tok + "'");
  }
};

}  // namespace

QuantifiedFormula parse_formula(const std::string& text, const FormulaContext& ctx) {
  FormulaParser p(text, ctx);
  return p.parse_top();
}

}  // namespace alspec
