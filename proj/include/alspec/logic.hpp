#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "alspec/kts.hpp"

// Formula representation, parser and decision procedures for the supported
// state/event fragment: state formulae, existential path formulae in the
// negation-free fragment, and top-level always-invariants, optionally under
// a finite quantifier prefix.

namespace alspec {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownVariableError : EvalError {
  using EvalError::EvalError;
};
struct UnboundConstantError : EvalError {
  using EvalError::EvalError;
};
struct TypeMismatchError : EvalError {
  using EvalError::EvalError;
};
struct UnboundedQuantifierDomainError : EvalError {
  using EvalError::EvalError;
};

// A numeric value expression: an optional reference to a global constant
// plus an offset, covering v, k, k+1 and k-1 alike.
struct NumExpr {
  std::optional<std::string> ref;
  long long offset = 0;
};

// An action constraint of X_a / T_a: either an exact ground token or a
// component that must appear inside some token of the transition's set.
struct ActionSpec {
  std::optional<ActionToken> exact;
  std::optional<Term> component;     // ground component
  std::optional<std::string> ref;    // quantifier-bound component name
};

struct StateFormula;
struct PathFormula;
using StateF = std::shared_ptr<const StateFormula>;
using PathF = std::shared_ptr<const PathFormula>;

struct StateFormula {
  enum class Kind : unsigned char { True, EqNum, EqValue, EqVars, Leq, Not, And, Exists };
  Kind kind = Kind::True;
  std::string var, var2;  // comparison operands
  NumExpr num;            // EqNum / Leq
  Term value;             // EqValue
  StateF lhs, rhs;        // Not (lhs) / And
  PathF path;             // Exists

  static StateF make_true();
  static StateF eq_num(std::string var, NumExpr num);
  static StateF eq_value(std::string var, Term value);
  static StateF eq_vars(std::string var, std::string var2);
  static StateF leq(std::string var, NumExpr num);
  static StateF negation(StateF f);
  static StateF conjunction(StateF a, StateF b);
  static StateF exists(PathF p);
};

struct PathFormula {
  enum class Kind : unsigned char { Lift, And, Next, NextA, Until, Eventually, TStep };
  Kind kind = Kind::Lift;
  StateF state;       // Lift; TStep left operand
  PathF lhs, rhs;     // And/Until operands; Next/NextA/Eventually child in lhs,
                      // TStep continuation in rhs
  ActionSpec action;  // NextA / TStep

  static PathF lift(StateF f);
  static PathF conjunction(PathF a, PathF b);
  static PathF next(PathF p);
  static PathF next_a(ActionSpec a, PathF p);
  static PathF until(PathF a, PathF b);
  static PathF eventually(PathF p);
  static PathF step(StateF s, ActionSpec a, PathF p);
};

// Rewrites derived operators to the core connectives. The step operator
// becomes a conjunction with an action-indexed next; F p becomes
// X(true U p), holding of paths that reach p after at least one
// transition. Idempotent on core forms.
PathF expand_derived(const PathF& p);
StateF expand_derived(const StateF& f);

std::string render(const NumExpr& e);
std::string render(const ActionSpec& a);
std::string render(const StateF& f);
std::string render(const PathF& p);

// A quantifier binder over a finite domain: a named constant domain or the
// observed value range of a state variable.
struct Binder {
  bool exists = true;
  std::string name;
  enum class Domain : unsigned char { Named, Range } domain = Domain::Named;
  std::string domain_name;  // domain name, or variable name for Range
};

struct QuantifiedFormula {
  std::vector<Binder> prefix;
  bool always = false;  // body wrapped in a top-level AG
  StateF body;
};

std::string render(const QuantifiedFormula& q);

// Assignment of values to global constants and quantified names.
struct Env {
  std::map<std::string, long long> nums;
  std::map<std::string, Term> components;
};

struct Verdict {
  bool holds = false;
  std::optional<Path> witness;
  std::optional<int> counterexample_state;
  std::vector<std::pair<std::string, std::string>> bindings;
  std::size_t assignments_evaluated = 0;
};

// Literal implementation of the amended state-formula semantics over the
// interpretation of one state.
bool eval_state(const Kts& kts, int state, const StateF& f, const Env& env);

// Decides whether some maximal path from the state satisfies the formula,
// by breadth-first reachability over the (state, obligation-set) product.
// Exact on finite systems; witness_bound caps only the reported witness.
Verdict eval_exists_path(const Kts& kts, int state, const PathF& p, const Env& env,
                         std::size_t witness_bound = 64);

// ∀G φ for a pure state formula: every reachable state lies on a maximal
// path from the initial state, so the invariant holds exactly when φ holds
// at every state. The first violating state is the counterexample.
Verdict check_invariant(const Kts& kts, const StateF& f, const Env& env);

enum class EvalMode : unsigned char { AtInit, Anywhere };

// Enumerates the quantifier prefix over finite domains and evaluates the
// body; existential prefixes report the first satisfying assignment,
// universal ones the first violating assignment.
Verdict check_quantified(const Kts& kts, const QuantifiedFormula& q, EvalMode mode,
                         const std::map<std::string, std::vector<Term>>& named_domains,
                         const Env& base_env, std::size_t witness_bound = 64);

// Observed value range of a nat-typed variable across the explored system.
std::vector<long long> observed_range(const Kts& kts, const std::string& var);

// --- concrete syntax ---------------------------------------------------

struct ParseError : std::runtime_error {
  std::size_t position;
  std::string expected;
  ParseError(std::size_t pos, const std::string& msg, std::string expected_tokens)
      : std::runtime_error(msg), position(pos), expected(std::move(expected_tokens)) {}
};

// Name environment the parser needs: which identifiers are state
// variables, declared constants, global constants, or domains.
struct FormulaContext {
  std::map<std::string, TypedVariable> variables;
  std::set<std::string> constants;
  std::set<std::string> globals;
  std::set<std::string> domains;
  std::optional<std::string> single_set_var;  // enables the {v1,v2} shorthand
};

QuantifiedFormula parse_formula(const std::string& text, const FormulaContext& ctx);

}  // namespace alspec
