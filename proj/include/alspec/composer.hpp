#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "alspec/model.hpp"

// Pairs a client-side rule with a server-side rule by matching their
// request and response tuples and synthesises the global rule.

namespace alspec {

struct ComposeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AlreadyTaggedError : ComposeError {
  using ComposeError::ComposeError;
};
struct CommandMismatchError : ComposeError {
  using ComposeError::ComposeError;
};
struct MatchFailureError : ComposeError {
  using ComposeError::ComposeError;
};

// The composition of one client rule and one server rule. All label
// elements except the command constant are discarded; the from and to
// patterns keep their side tags and render through the home-side
// convention.
struct GlobalRule {
  std::string command;
  NamedTuple from_client, from_server;
  NamedTuple to_client, to_server;
  std::vector<SideCondition> conditions;
  // provenance
  TransitionRule client_rule, server_rule;  // tagged sources
  Substitution sigma_request, sigma_response;
};

// Tags every variable and composite in the rule with the given side tag;
// constants are never tagged. Throws AlreadyTaggedError if any term
// already carries a different tag.
TransitionRule tag_rule(const TransitionRule& rule, const SideTag& tag);

// Matches the request tuples server-side first (the server tuple contains
// the variables that must be replaced) and the response tuples client-side
// first. Both rules must already be tagged.
std::pair<Substitution, Substitution> pair_rules(const TransitionRule& client,
                                                 const TransitionRule& server);

// Tags the two rules, pairs them, and applies both substitutions to each
// final state (the side's own-produced substitution first, then the other),
// so the composed final patterns need no further rewriting.
GlobalRule compose_global_rule(const TransitionRule& client,
                               const TransitionRule& server);

std::string render(const GlobalRule& r);

// A slot-equality claim about a composed rule: the named field of the final
// client or server pattern must structurally equal the expected term, up to
// the home tag of that side.
struct SlotAssertion {
  std::string name;
  std::string command;
  RuleSide side = RuleSide::Client;  // Client or Server
  std::string field;                 // declared field name, e.g. gWorkingDoc
  Term expected;
};

struct SlotVerdict {
  bool holds = false;
  Term actual;
  std::string rendered_actual;
};

struct UnknownSlotError : ComposeError {
  using ComposeError::ComposeError;
};

// field_names: the declared field names of the asserted side's state shape,
// in tuple order.
SlotVerdict check_slot(const GlobalRule& rule, const SlotAssertion& assertion,
                       const std::vector<std::string>& field_names);

}  // namespace alspec
