#include "alspec/model.hpp"

#include <algorithm>
#include <sstream>

namespace alspec {

std::string render(const CookieSet& c) {
  std::string out = "{";
  bool first = true;
  for (const std::string& x : c) {
    if (!first) out += ',';
    first = false;
    out += x;
  }
  return out + "}";
}

std::string render(const SignedCookies& c) {
  std::string out = "{";
  bool first = true;
  for (const std::string& x : c.add) {
    if (!first) out += ',';
    first = false;
    out += '+';
    out += x;
  }
  for (const std::string& x : c.remove) {
    if (!first) out += ',';
    first = false;
    out += '-';
    out += x;
  }
  return out + "}";
}

CookieSet amend_cookie_store(const CookieSet& c, const SignedCookies& signed_cookies) {
  CookieSet out = c;
  for (const std::string& x : signed_cookies.add) out.insert(x);
  for (const std::string& x : signed_cookies.remove) out.erase(x);
  return out;
}

namespace {

std::string render_tuple(const NamedTuple& t, const SideTag* home) {
  std::string out = t.name;
  if (!t.name.empty() && home && home->kind == TagKind::Client) out += home->suffix();
  out += '(';
  bool first = true;
  for (const Term& e : t.elems) {
    if (!first) out += ',';
    first = false;
    out += home ? render_home(e, *home) : render(e);
  }
  out += ')';
  return out;
}

}  // namespace

std::string render(const GlobalState& s) {
  std::vector<std::string> parts;
  if (s.browser) parts.push_back(render(*s.browser));
  if (s.client) {
    SideTag home = SideTag::client();
    parts.push_back(render_tuple(*s.client, &home));
  }
  if (s.server) parts.push_back(render_tuple(*s.server, nullptr));
  if (parts.size() == 1) return parts[0];
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out + ")";
}

std::string render(const SideCondition& c) {
  switch (c.kind) {
    case SideCondition::Kind::In:
      return render(c.lhs) + " in " + render(c.rhs);
    case SideCondition::Kind::NotIn:
      return render(c.lhs) + " not in " + render(c.rhs);
    case SideCondition::Kind::NotEpsilon:
      return render(c.lhs) + " != eps";
    case SideCondition::Kind::NotEqual:
      return render(c.lhs) + " != " + render(c.rhs);
  }
  return "";
}

TermTuple request_tuple(const TransitionRule& r) {
  TermTuple out;
  out.push_back(Term::constant(r.request.url));
  out.insert(out.end(), r.request.extras.begin(), r.request.extras.end());
  return out;
}

TermTuple response_tuple(const TransitionRule& r) { return r.response.body; }

std::string render(const TransitionRule& r) {
  std::ostringstream os;
  os << render(r.from) << " -- ";
  if (r.request.cookies) os << render(*r.request.cookies) << ' ';
  os << r.request.url;
  for (const Term& e : r.request.extras) os << ", " << render(e);
  os << " / ";
  if (r.request.cookies) os << render(r.response.signed_cookies) << ' ';
  bool first = true;
  for (const Term& e : r.response.body) {
    if (!first) os << ", ";
    first = false;
    os << render(e);
  }
  os << " --> " << render(r.to);
  if (!r.conditions.empty()) {
    os << " when ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
      if (i) os << ", ";
      os << render(r.conditions[i]);
    }
  }
  return os.str();
}

std::vector<TransitionRule> instantiate_schema(const RuleSchema& schema) {
  std::vector<TransitionRule> out;
  std::vector<std::size_t> idx(schema.params.size(), 0);
  for (const auto& [name, domain] : schema.params) {
    (void)name;
    if (domain.empty()) return out;
  }
  while (true) {
    Substitution sigma;
    std::string suffix;
    for (std::size_t p = 0; p < schema.params.size(); ++p) {
      const Term& value = schema.params[p].second[idx[p]];
      sigma.bindings.push_back(
          Binding::of(Term::variable(schema.params[p].first), value));
      suffix += (p ? "," : "[") + render(value);
    }
    if (!suffix.empty()) suffix += ']';
    TransitionRule r = schema.rule;
    r.name += suffix;
    auto subst_state = [&sigma](GlobalState& s) {
      if (s.client)
        for (Term& e : s.client->elems) e = apply_substitution(e, sigma);
      if (s.server)
        for (Term& e : s.server->elems) e = apply_substitution(e, sigma);
    };
    subst_state(r.from);
    subst_state(r.to);
    for (Term& e : r.request.extras) e = apply_substitution(e, sigma);
    for (Term& e : r.response.body) e = apply_substitution(e, sigma);
    for (SideCondition& c : r.conditions) {
      c.lhs = apply_substitution(c.lhs, sigma);
      c.rhs = apply_substitution(c.rhs, sigma);
    }
    out.push_back(std::move(r));

    std::size_t p = schema.params.size();
    while (p > 0) {
      --p;
      if (++idx[p] < schema.params[p].second.size()) break;
      idx[p] = 0;
      if (p == 0) return out;
    }
    if (schema.params.empty()) return out;
  }
}

Term reduce_term(const Term& t) {
  if (!t.is_composite()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(reduce_term(a));
  if (t.name() == fn::succ && args.size() == 1 && args[0].kind() == Term::Kind::Nat)
    return Term::nat(args[0].nat_value() + 1);
  if (t.name() == fn::set_union && args.size() == 2 &&
      args[0].kind() == Term::Kind::Set && args[1].kind() == Term::Kind::Set) {
    std::vector<std::string> elems = args[0].set_elems();
    elems.insert(elems.end(), args[1].set_elems().begin(), args[1].set_elems().end());
    return Term::set(std::move(elems));
  }
  if (t.name() == fn::make_set) {
    std::vector<std::string> elems;
    bool all_consts = true;
    for (const Term& a : args) {
      if (a.kind() == Term::Kind::Constant) {
        elems.push_back(a.name());
      } else {
        all_consts = false;
        break;
      }
    }
    if (all_consts) return Term::set(std::move(elems));
  }
  return Term::composite(t.name(), std::move(args), t.tag());
}

bool is_concrete_value(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      return false;
    case Term::Kind::Composite:
      if (t.name() == fn::succ || t.name() == fn::set_union ||
          t.name() == fn::make_set)
        return false;
      for (const Term& a : t.args())
        if (!is_concrete_value(a)) return false;
      return true;
    default:
      return true;
  }
}

namespace {

// First-bind-wins accumulation with consistency checking.
bool bind(Substitution& sigma, const Term& var, const Term& value) {
  if (const Term* prev = sigma.lookup(var)) return *prev == value;
  sigma.bindings.push_back(Binding::of(var, value));
  return true;
}

bool match_pattern(const Term& pattern, const Term& value, Substitution& sigma) {
  switch (pattern.kind()) {
    case Term::Kind::Variable:
      return bind(sigma, pattern, value);
    case Term::Kind::Composite: {
      if (value.kind() != Term::Kind::Composite) return false;
      if (pattern.name() != value.name() || pattern.tag() != value.tag()) return false;
      if (pattern.args().size() != value.args().size()) return false;
      for (std::size_t i = 0; i < pattern.args().size(); ++i)
        if (!match_pattern(pattern.args()[i], value.args()[i], sigma)) return false;
      return true;
    }
    default:
      return pattern == value;
  }
}

bool match_tuple_pattern(const std::optional<NamedTuple>& pattern,
                         const std::optional<NamedTuple>& value, Substitution& sigma) {
  if (pattern.has_value() != value.has_value()) return false;
  if (!pattern) return true;
  if (pattern->name != value->name) return false;
  if (pattern->elems.size() != value->elems.size()) return false;
  for (std::size_t i = 0; i < pattern->elems.size(); ++i)
    if (!match_pattern(pattern->elems[i], value->elems[i], sigma)) return false;
  return true;
}

// Evaluates a side condition under the binding. Conditions whose terms are
// not yet concrete (e.g. constraints on response-bound variables of a
// client rule) are not decidable at applicability time and pass.
bool condition_holds(const SideCondition& c, const Substitution& sigma) {
  const Term lhs = reduce_term(apply_substitution(c.lhs, sigma));
  const Term rhs = reduce_term(apply_substitution(c.rhs, sigma));
  switch (c.kind) {
    case SideCondition::Kind::In:
    case SideCondition::Kind::NotIn: {
      if (rhs.kind() != Term::Kind::Set || lhs.kind() != Term::Kind::Constant)
        return true;
      const auto& elems = rhs.set_elems();
      const bool found =
          std::find(elems.begin(), elems.end(), lhs.name()) != elems.end();
      return c.kind == SideCondition::Kind::In ? found : !found;
    }
    case SideCondition::Kind::NotEpsilon:
      return !(lhs.kind() == Term::Kind::Epsilon);
    case SideCondition::Kind::NotEqual:
      if (!is_concrete_value(lhs) || !is_concrete_value(rhs)) return true;
      return lhs != rhs;
  }
  return true;
}

}  // namespace

std::optional<Substitution> applicable(const TransitionRule& rule,
                                       const GlobalState& state,
                                       const Request& request) {
  Substitution sigma;
  if (rule.from.browser.has_value() != state.browser.has_value()) return std::nullopt;
  if (rule.from.browser && *rule.from.browser != *state.browser) return std::nullopt;
  if (!match_tuple_pattern(rule.from.client, state.client, sigma)) return std::nullopt;
  if (!match_tuple_pattern(rule.from.server, state.server, sigma)) return std::nullopt;

  if (rule.request.url != request.url) return std::nullopt;
  if (rule.request.cookies && *rule.request.cookies != request.cookies)
    return std::nullopt;
  if (rule.request.extras.size() != request.extras.size()) return std::nullopt;
  for (std::size_t i = 0; i < rule.request.extras.size(); ++i)
    if (!match_pattern(rule.request.extras[i], request.extras[i], sigma))
      return std::nullopt;

  for (const SideCondition& c : rule.conditions)
    if (!condition_holds(c, sigma)) return std::nullopt;
  return sigma;
}

std::pair<Response, GlobalState> fire(const TransitionRule& rule,
                                      const GlobalState& state,
                                      const Request& request) {
  auto sigma = applicable(rule, state, request);
  if (!sigma)
    throw NotApplicableError("rule '" + rule.name + "' is not applicable to " +
                             render(state) + " with url " + request.url);

  auto instantiate = [&sigma, &rule](const Term& t, const char* where) {
    Term out = reduce_term(apply_substitution(t, *sigma));
    if (!is_concrete_value(out))
      throw SymbolicStateError("rule '" + rule.name + "': " + where + " term " +
                               render(out) + " is not concrete");
    return out;
  };

  Response resp;
  resp.signed_cookies = rule.response.signed_cookies;
  for (const Term& b : rule.response.body)
    resp.body.push_back(instantiate(b, "response"));

  GlobalState to;
  if (rule.to.browser) {
    const CookieSet amended = amend_cookie_store(
        state.browser ? *state.browser : CookieSet{}, resp.signed_cookies);
    if (*rule.to.browser != amended)
      throw InconsistentRuleError(
          "rule '" + rule.name + "': target store " + render(*rule.to.browser) +
          " disagrees with the amended store " + render(amended));
    to.browser = *rule.to.browser;
  }
  auto instantiate_tuple = [&](const std::optional<NamedTuple>& pat)
      -> std::optional<NamedTuple> {
    if (!pat) return std::nullopt;
    NamedTuple out{pat->name, {}};
    for (const Term& e : pat->elems) out.elems.push_back(instantiate(e, "state"));
    return out;
  };
  to.client = instantiate_tuple(rule.to.client);
  to.server = instantiate_tuple(rule.to.server);
  return {std::move(resp), std::move(to)};
}

}  // namespace alspec
