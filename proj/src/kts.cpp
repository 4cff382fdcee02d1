#include "alspec/kts.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace alspec {

int ActionToken::compare(const ActionToken& o) const {
  if (parts.size() != o.parts.size()) return parts.size() < o.parts.size() ? -1 : 1;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const int c = parts[i].compare(o.parts[i]);
    if (c != 0) return c;
  }
  return 0;
}

std::string render(const ActionToken& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    if (i) out += ',';
    out += render(t.parts[i]);
  }
  return out + ")";
}

std::string render_action_set(const std::vector<ActionToken>& alpha) {
  std::string out;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) out += '|';
    out += render(alpha[i]);
  }
  return out;
}

int Kts::index_of(const GlobalState& s) const {
  if (auto id = find(s)) return *id;
  throw UnknownStateError("state " + render(s) + " is not part of this system");
}

std::optional<int> Kts::find(const GlobalState& s) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == s) return static_cast<int>(i);
  return std::nullopt;
}

const std::vector<ActionToken>* Kts::alpha(int src, int dst) const {
  auto it = transitions.find({src, dst});
  return it == transitions.end() ? nullptr : &it->second;
}

std::vector<int> Kts::successors(int src) const {
  std::vector<int> out;
  for (auto it = transitions.lower_bound({src, 0});
       it != transitions.end() && it->first.first == src; ++it)
    out.push_back(it->first.second);
  return out;
}

std::string Kts::summary() const {
  std::ostringstream os;
  os << "states=" << states.size() << " transitions=" << transition_count()
     << " closed=" << (closed ? "true" : "false");
  return os.str();
}

namespace {

void project_fields(const NamedTuple& tuple, const std::vector<TypedVariable>& fields,
                    Interpretation& out) {
  for (std::size_t i = 0; i < fields.size() && i < tuple.elems.size(); ++i)
    out[fields[i].name] = tuple.elems[i];
}

}  // namespace

Interpretation interpretation_of(const Kts& kts, const GlobalState& state) {
  const int id = kts.index_of(state);
  return kts.interpretations[static_cast<std::size_t>(id)];
}

namespace {

Interpretation interpret_state(const GlobalState& s, const StateShape& shape) {
  Interpretation out;
  if (shape.browser_var && s.browser) {
    std::vector<std::string> elems(s.browser->begin(), s.browser->end());
    out[*shape.browser_var] = Term::set(std::move(elems));
  }
  if (s.client) project_fields(*s.client, shape.client_fields, out);
  if (s.server) project_fields(*s.server, shape.server_fields, out);
  return out;
}

}  // namespace

Kts explore(const std::vector<TransitionRule>& rules, const GlobalState& initial,
            const StateShape& shape, const ExploreLimits& limits) {
  Kts kts;
  std::map<std::string, int> index;
  std::deque<std::pair<int, std::size_t>> frontier;  // state id, depth

  auto intern = [&](const GlobalState& s) -> std::pair<int, bool> {
    const std::string key = render(s);
    auto it = index.find(key);
    if (it != index.end()) return {it->second, false};
    const int id = static_cast<int>(kts.states.size());
    index.emplace(key, id);
    kts.states.push_back(s);
    kts.interpretations.push_back(interpret_state(s, shape));
    return {id, true};
  };

  intern(initial);
  frontier.emplace_back(0, 0);

  while (!frontier.empty()) {
    const auto [sid, depth] = frontier.front();
    if (depth >= limits.max_depth) {
      kts.closed = false;
      kts.frontier_remaining += frontier.size();
      break;
    }
    frontier.pop_front();
    const GlobalState state = kts.states[static_cast<std::size_t>(sid)];
    for (const TransitionRule& rule : rules) {
      // derive the candidate request from the rule under the from-binding
      Substitution from_sigma;
      {
        Request probe{state.browser ? *state.browser : CookieSet{},
                      rule.request.url, {}};
        // cheap pre-check happens inside applicable; we only need extras
        // ground, which requires the from binding first
        TransitionRule from_only = rule;
        from_only.request.extras.clear();
        from_only.request.cookies.reset();
        from_only.conditions.clear();
        auto s = applicable(from_only, state, probe);
        if (!s) continue;
        from_sigma = *s;
      }
      Request request{state.browser ? *state.browser : CookieSet{},
                      rule.request.url, {}};
      bool ground = true;
      for (const Term& e : rule.request.extras) {
        Term g = reduce_term(apply_substitution(e, from_sigma));
        if (!is_concrete_value(g)) {
          ground = false;
          break;
        }
        request.extras.push_back(std::move(g));
      }
      if (!ground)
        throw SymbolicStateError("rule '" + rule.name +
                                 "' has a request element that does not become "
                                 "concrete during exploration");
      if (!applicable(rule, state, request)) continue;
      auto [response, target] = fire(rule, state, request);

      ActionToken token;
      if (shape.url_in_token) token.parts.push_back(Term::constant(request.url));
      for (const Term& e : request.extras) token.parts.push_back(e);
      for (const Term& b : response.body) token.parts.push_back(b);

      if (kts.states.size() >= limits.max_states && !index.count(render(target))) {
        kts.closed = false;
        ++kts.frontier_remaining;
        continue;
      }
      const auto [tid, fresh] = intern(target);
      if (fresh) frontier.emplace_back(tid, depth + 1);
      auto& alpha = kts.transitions[{sid, tid}];
      if (std::find(alpha.begin(), alpha.end(), token) == alpha.end()) {
        alpha.push_back(std::move(token));
        std::sort(alpha.begin(), alpha.end());
      }
    }
  }
  return kts;
}

std::string render(const Kts& kts, const Path& p) {
  std::ostringstream os;
  auto line = [&](const PathStep& s) {
    const std::vector<ActionToken>* alpha = kts.alpha(s.src, s.dst);
    os << "  " << kts.state_name(s.src) << " --"
       << (alpha ? render_action_set(*alpha) : std::string{}) << "--> "
       << kts.state_name(s.dst) << "\n";
  };
  if (p.prefix.empty() && p.loop.empty()) {
    os << "  " << kts.state_name(p.start) << " (no transitions)\n";
    return os.str();
  }
  for (const PathStep& s : p.prefix) line(s);
  if (!p.loop.empty()) {
    os << "  loop:\n";
    for (const PathStep& s : p.loop) line(s);
  }
  return os.str();
}

bool path_chains(const Kts& kts, const Path& p) {
  int at = p.start;
  for (const PathStep& s : p.prefix) {
    if (s.src != at || !kts.alpha(s.src, s.dst)) return false;
    at = s.dst;
  }
  if (p.loop.empty()) return true;
  const int head = at;
  for (const PathStep& s : p.loop) {
    if (s.src != at || !kts.alpha(s.src, s.dst)) return false;
    at = s.dst;
  }
  return at == head;
}

namespace {

struct PathEnum {
  const Kts& kts;
  std::size_t bound;
  const std::function<bool(const Path&)>& fn;
  std::vector<PathStep> steps;
  std::vector<int> visited;  // state sequence, visited[0] = start
  bool stopped = false;

  // Yields one lasso per closure position and every dead-end-terminated
  // sequence; continues extending through closures so later lassos with the
  // same prefix states are still enumerated.
  void walk() {
    const int at = visited.back();
    if (kts.dead_end(at)) {
      Path p{visited.front(), steps, {}};
      if (!fn(p)) stopped = true;
      return;
    }
    if (steps.size() >= bound) return;
    for (int next : kts.successors(at)) {
      steps.push_back({at, next});
      visited.push_back(next);
      for (std::size_t pos = 0; pos + 1 < visited.size(); ++pos) {
        if (visited[pos] == next) {
          Path p{visited.front(),
                 std::vector<PathStep>(steps.begin(),
                                       steps.begin() + static_cast<long>(pos)),
                 std::vector<PathStep>(steps.begin() + static_cast<long>(pos),
                                       steps.end())};
          if (!fn(p)) {
            stopped = true;
            break;
          }
        }
      }
      if (!stopped) walk();
      visited.pop_back();
      steps.pop_back();
      if (stopped) return;
    }
  }
};

}  // namespace

void for_each_maximal_path(const Kts& kts, int from, std::size_t bound,
                           const std::function<bool(const Path&)>& fn) {
  if (from < 0 || static_cast<std::size_t>(from) >= kts.states.size())
    throw UnknownStateError("no state with id " + std::to_string(from));
  PathEnum e{kts, bound, fn, {}, {from}, false};
  e.walk();
}

std::vector<Path> maximal_paths(const Kts& kts, int from, std::size_t bound) {
  std::vector<Path> out;
  for_each_maximal_path(kts, from, bound, [&out](const Path& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

std::string to_dot(const Kts& kts, const std::string& graph_name) {
  std::ostringstream os;
  os << "digraph \"" << graph_name << "\" {\n";
  os << "  rankdir=LR;\n";
  os << "  __initial [shape=point, label=\"\"];\n";
  for (std::size_t i = 0; i < kts.states.size(); ++i)
    os << "  s" << i << " [label=\"" << kts.state_name(static_cast<int>(i))
       << "\"];\n";
  os << "  __initial -> s" << kts.initial << ";\n";
  for (const auto& [edge, alpha] : kts.transitions) {
    os << "  s" << edge.first << " -> s" << edge.second << " [label=\""
       << render_action_set(alpha) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace alspec
