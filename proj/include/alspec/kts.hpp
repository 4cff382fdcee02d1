#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alspec/model.hpp"

// Amended Kripke transition systems: exhaustive state-space exploration
// from a concrete rule set, typed-variable interpretations of states, path
// machinery with lasso representation, and DOT export.

namespace alspec {

// A typed variable of the system; its type is the set of permitted values.
struct TypedVariable {
  enum class Type : unsigned char { Nat, SetOf, Symbolic };
  std::string name;
  Type type = Type::Symbolic;
  std::vector<std::string> domain;  // element universe for SetOf
};

// A structured action label: the tuple of ground terms distinguishing a
// transaction, e.g. (2v,II) or (A1,B(1)).
struct ActionToken {
  std::vector<Term> parts;

  int compare(const ActionToken& o) const;
  bool operator==(const ActionToken& o) const { return compare(o) == 0; }
  bool operator<(const ActionToken& o) const { return compare(o) < 0; }
};

std::string render(const ActionToken& t);
std::string render_action_set(const std::vector<ActionToken>& alpha);

// Which state components exist and how their fields map to typed
// variables; drives both exploration and interpretations.
struct StateShape {
  std::optional<std::string> browser_var;  // variable name for the store
  std::vector<std::string> browser_domain;
  std::optional<NamedTuple> client_shape;  // elems unused, name + arity only
  std::vector<TypedVariable> client_fields;
  std::optional<NamedTuple> server_shape;
  std::vector<TypedVariable> server_fields;
  bool url_in_token = true;  // drop the URL from tokens when only one URL exists
};

struct ExploreLimits {
  std::size_t max_states = 10000;
  std::size_t max_depth = 64;
};

struct UnknownStateError : ModelError {
  using ModelError::ModelError;
};

using Interpretation = std::map<std::string, Term>;

class Kts {
 public:
  std::vector<GlobalState> states;  // discovery order; index is the state id
  std::vector<Interpretation> interpretations;
  std::map<std::pair<int, int>, std::vector<ActionToken>> transitions;  // sorted tokens
  std::vector<TypedVariable> variables;
  int initial = 0;
  bool closed = true;
  std::size_t frontier_remaining = 0;

  int index_of(const GlobalState& s) const;  // throws UnknownStateError
  std::optional<int> find(const GlobalState& s) const;
  const std::vector<ActionToken>* alpha(int src, int dst) const;
  std::vector<int> successors(int src) const;  // sorted target ids
  bool dead_end(int s) const { return successors(s).empty(); }
  std::string state_name(int s) const { return render(states[s]); }

  std::size_t transition_count() const { return transitions.size(); }
  std::string summary() const;  // states=<n> transitions=<m> closed=<bool>
};

// Breadth-first closure of the rule set from the initial state. Every
// applicable (rule, request) instantiation is fired from every discovered
// state; parallel labels between one ordered state pair merge into a single
// transition. A tripped limit is reported through closed=false and
// frontier_remaining rather than a partial-silent result.
Kts explore(const std::vector<TransitionRule>& rules, const GlobalState& initial,
            const StateShape& shape, const ExploreLimits& limits = {});

// The typed-variable interpretation of a state, read directly from its
// tuple fields.
Interpretation interpretation_of(const Kts& kts, const GlobalState& state);

// A path is a chained sequence of transitions plus an optional loop that
// closes back on itself; a lasso represents one infinite maximal path.
struct PathStep {
  int src = 0;
  int dst = 0;
};

struct Path {
  int start = 0;
  std::vector<PathStep> prefix;
  std::vector<PathStep> loop;  // empty for finite (dead-end) maximal paths

  std::size_t length() const { return prefix.size() + loop.size(); }
};

std::string render(const Kts& kts, const Path& p);  // one transition per line
bool path_chains(const Kts& kts, const Path& p);    // structural validity

// Enumerates maximal paths from a state in deterministic, lexicographic
// order: finite paths ending in a dead end and lassos, both with total
// length bounded. The callback may return false to stop early.
void for_each_maximal_path(const Kts& kts, int from, std::size_t bound,
                           const std::function<bool(const Path&)>& fn);
std::vector<Path> maximal_paths(const Kts& kts, int from, std::size_t bound);

// Valid DOT digraph: one node per state labelled with its canonical
// rendering, one edge per transition labelled with its action set joined by
// vertical bars, the initial state marked with a source arrow.
std::string to_dot(const Kts& kts, const std::string& graph_name = "kts");

}  // namespace alspec
