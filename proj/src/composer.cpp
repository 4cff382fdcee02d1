#include "alspec/composer.hpp"

#include <algorithm>

namespace alspec {

namespace {

Term tag_term(const Term& t, const SideTag& tag, const std::string& rule_name) {
  switch (t.kind()) {
    case Term::Kind::Variable:
    case Term::Kind::Composite: {
      if (!t.tag().is_none() && t.tag() != tag)
        throw AlreadyTaggedError("rule '" + rule_name + "': term " + render(t) +
                                 " already carries a different tag");
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(tag_term(a, tag, rule_name));
      if (t.is_variable()) return Term::variable(t.name(), tag);
      return Term::composite(t.name(), std::move(args), tag);
    }
    default:
      return t;
  }
}

void tag_tuple(std::optional<NamedTuple>& tuple, const SideTag& tag,
               const std::string& rule_name) {
  if (!tuple) return;
  for (Term& e : tuple->elems) e = tag_term(e, tag, rule_name);
}

Term subst_chain(const Term& t, const Substitution& first, const Substitution& second) {
  // compose_apply applies its list in reverse, so list the later one first
  return compose_apply(t, {second, first});
}

}  // namespace

TransitionRule tag_rule(const TransitionRule& rule, const SideTag& tag) {
  TransitionRule out = rule;
  tag_tuple(out.from.client, tag, rule.name);
  tag_tuple(out.from.server, tag, rule.name);
  tag_tuple(out.to.client, tag, rule.name);
  tag_tuple(out.to.server, tag, rule.name);
  for (Term& e : out.request.extras) e = tag_term(e, tag, rule.name);
  for (Term& e : out.response.body) e = tag_term(e, tag, rule.name);
  for (SideCondition& c : out.conditions) {
    c.lhs = tag_term(c.lhs, tag, rule.name);
    c.rhs = tag_term(c.rhs, tag, rule.name);
  }
  return out;
}

std::pair<Substitution, Substitution> pair_rules(const TransitionRule& client,
                                                 const TransitionRule& server) {
  if (client.request.url != server.request.url)
    throw CommandMismatchError("cannot pair '" + client.name + "' (" +
                               client.request.url + ") with '" + server.name +
                               "' (" + server.request.url + ")");
  MatchDiag diag;
  // the server request tuple contains the variables to replace
  auto sigma_request = match_tuples(request_tuple(server), request_tuple(client), &diag);
  if (!sigma_request)
    throw MatchFailureError("request tuples of '" + client.name + "' and '" +
                            server.name + "' do not match");
  // the client consumes the response, so its tuple goes first
  auto sigma_response =
      match_tuples(response_tuple(client), response_tuple(server), &diag);
  if (!sigma_response)
    throw MatchFailureError("response tuples of '" + client.name + "' and '" +
                            server.name + "' do not match");
  return {std::move(*sigma_request), std::move(*sigma_response)};
}

GlobalRule compose_global_rule(const TransitionRule& client,
                               const TransitionRule& server) {
  const TransitionRule tc = tag_rule(client, SideTag::client());
  const TransitionRule ts = tag_rule(server, SideTag::server());
  auto [sigma_request, sigma_response] = pair_rules(tc, ts);

  GlobalRule g;
  g.command = tc.request.url;
  g.client_rule = tc;
  g.server_rule = ts;
  g.sigma_request = sigma_request;
  g.sigma_response = sigma_response;
  g.from_client = tc.from.client.value_or(NamedTuple{});
  g.from_server = ts.from.server.value_or(NamedTuple{});

  // client final state: own-produced σ_response first, then σ_request
  g.to_client = tc.to.client.value_or(NamedTuple{});
  for (Term& e : g.to_client.elems) e = subst_chain(e, sigma_response, sigma_request);
  // server final state: own-produced σ_request first, then σ_response
  g.to_server = ts.to.server.value_or(NamedTuple{});
  for (Term& e : g.to_server.elems) e = subst_chain(e, sigma_request, sigma_response);

  auto carry = [&g](const std::vector<SideCondition>& conds, const Substitution& own,
                    const Substitution& other) {
    for (const SideCondition& c : conds) {
      SideCondition out = c;
      out.lhs = subst_chain(c.lhs, own, other);
      out.rhs = subst_chain(c.rhs, own, other);
      if (std::find(g.conditions.begin(), g.conditions.end(), out) ==
          g.conditions.end())
        g.conditions.push_back(std::move(out));
    }
  };
  carry(tc.conditions, sigma_response, sigma_request);
  carry(ts.conditions, sigma_request, sigma_response);
  return g;
}

std::string render(const GlobalRule& r) {
  const SideTag client_home = SideTag::client();
  const SideTag server_home = SideTag::server();
  auto tuple = [](const NamedTuple& t, const SideTag& home) {
    std::string out = t.name;
    if (home.kind == TagKind::Client) out += home.suffix();
    out += '(';
    for (std::size_t i = 0; i < t.elems.size(); ++i) {
      if (i) out += ',';
      out += render_home(t.elems[i], home);
    }
    return out + ")";
  };
  std::string out = "(" + tuple(r.from_client, client_home) + ", " +
                    tuple(r.from_server, server_home) + ") --" + r.command +
                    "--> (" + tuple(r.to_client, client_home) + ", " +
                    tuple(r.to_server, server_home) + ")";
  if (!r.conditions.empty()) {
    out += " when ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
      if (i) out += ", ";
      out += render(r.conditions[i]);
    }
  }
  return out;
}

SlotVerdict check_slot(const GlobalRule& rule, const SlotAssertion& assertion,
                       const std::vector<std::string>& field_names) {
  const bool client_side = assertion.side == RuleSide::Client;
  const NamedTuple& tuple = client_side ? rule.to_client : rule.to_server;
  const auto it =
      std::find(field_names.begin(), field_names.end(), assertion.field);
  if (it == field_names.end() ||
      static_cast<std::size_t>(it - field_names.begin()) >= tuple.elems.size())
    throw UnknownSlotError("no field '" + assertion.field + "' in the " +
                           (client_side ? "client" : "server") + " state shape");
  const SideTag home = client_side ? SideTag::client() : SideTag::server();
  SlotVerdict v;
  v.actual = tuple.elems[static_cast<std::size_t>(it - field_names.begin())];
  v.rendered_actual = render_home(v.actual, home);
  v.holds = equal_up_to_home_tag(v.actual, assertion.expected, home);
  return v;
}

}  // namespace alspec
