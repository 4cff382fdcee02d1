#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "alspec/term.hpp"

// The formal model of HTTP transactions: cookie stores, signed cookies,
// requests, responses, global application states, transition rules and
// single-rule firing.

namespace alspec {

using CookieSet = std::set<std::string, NaturalLess>;

// Signed cookies in a response: additions (+x) and removals (-x) must be
// disjoint.
struct SignedCookies {
  CookieSet add;
  CookieSet remove;

  bool empty() const { return add.empty() && remove.empty(); }
  bool operator==(const SignedCookies&) const = default;
};

std::string render(const CookieSet& c);
std::string render(const SignedCookies& c);

// The generic store-amendment rule: c' = c ∪ additions \ removals.
CookieSet amend_cookie_store(const CookieSet& c, const SignedCookies& signed_cookies);

// A named tuple of terms such as j(gUid,gWorkingDoc,gTempDoc); the name may
// be empty for plain pairs like the visitor counter state (a,n).
struct NamedTuple {
  std::string name;
  std::vector<Term> elems;

  bool operator==(const NamedTuple&) const = default;
};

// A global application state or a pattern over one. Which components are
// present is fixed per specification.
struct GlobalState {
  std::optional<CookieSet> browser;
  std::optional<NamedTuple> client;
  std::optional<NamedTuple> server;

  bool operator==(const GlobalState&) const = default;
};

std::string render(const GlobalState& s);

struct Request {
  CookieSet cookies;  // always echoes the source browser state
  std::string url;
  std::vector<Term> extras;
};

struct Response {
  SignedCookies signed_cookies;
  std::vector<Term> body;
};

struct SideCondition {
  enum class Kind : unsigned char { In, NotIn, NotEpsilon, NotEqual };
  Kind kind;
  Term lhs;
  Term rhs;  // unused for NotEpsilon

  bool operator==(const SideCondition&) const = default;
};

std::string render(const SideCondition& c);

enum class RuleSide : unsigned char { Global, Client, Server };

// Pattern side of a rule: the request cookie pattern, when present, must
// equal the from-state's browser pattern (the browser state is echoed).
struct RequestPattern {
  std::optional<CookieSet> cookies;
  std::string url;
  std::vector<Term> extras;
};

struct ResponsePattern {
  SignedCookies signed_cookies;
  std::vector<Term> body;
};

struct TransitionRule {
  std::string name;
  RuleSide side = RuleSide::Global;
  GlobalState from;
  RequestPattern request;
  ResponsePattern response;
  GlobalState to;
  std::vector<SideCondition> conditions;
};

// The request tuple a rule contributes to matching: the command constant
// (its URL) followed by the extras.
TermTuple request_tuple(const TransitionRule& r);
// The response tuple: the body elements.
TermTuple response_tuple(const TransitionRule& r);

std::string render(const TransitionRule& r);

// A rule parameterised over finite domains, denoting one concrete rule per
// assignment of domain values to parameters.
struct RuleSchema {
  TransitionRule rule;
  std::vector<std::pair<std::string, std::vector<Term>>> params;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotApplicableError : ModelError {
  using ModelError::ModelError;
};
struct SymbolicStateError : ModelError {
  using ModelError::ModelError;
};
struct InconsistentRuleError : ModelError {
  using ModelError::ModelError;
};
struct UnboundedDomainError : ModelError {
  using ModelError::ModelError;
};

// One concrete rule per element of the cartesian product of the parameter
// domains, names suffixed by the parameter values.
std::vector<TransitionRule> instantiate_schema(const RuleSchema& schema);

// Evaluates the interpreted symbols in a ground term: successor on
// naturals, union and singleton construction on finite sets. Uninterpreted
// symbols are left as ground composites.
Term reduce_term(const Term& t);

// True when the term can stand as a concrete state or label component.
bool is_concrete_value(const Term& t);

// Matches the rule against a state and request. Returns the substitution
// binding the rule's pattern variables when the from-pattern matches, the
// request matches and all decidable side conditions hold; absent otherwise.
std::optional<Substitution> applicable(const TransitionRule& rule,
                                       const GlobalState& state,
                                       const Request& request);

// Instantiates the response and final state under the binding returned by
// applicable(); throws NotApplicableError when the rule does not apply and
// SymbolicStateError when an uninterpreted update survives in a slot that
// must be concrete. When cookies are in play the declared target store must
// equal the amended source store.
std::pair<Response, GlobalState> fire(const TransitionRule& rule,
                                      const GlobalState& state,
                                      const Request& request);

}  // namespace alspec
