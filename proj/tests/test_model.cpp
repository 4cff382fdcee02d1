#include "alspec/model.hpp"

#include <random>

#include "alspec/fixtures.hpp"
#include "alspec/spec_doc.hpp"
#include "doctest.h"

using namespace alspec;

namespace {

Term var(const std::string& n) { return Term::variable(n); }

// the second visitor rule: (a,n) --U,Ai/B(n+1)--> (a+{Ai},n+1) when Ai not in a
TransitionRule visitors_first_visit() {
  TransitionRule r;
  r.name = "first_visit";
  r.from.server = NamedTuple{"", {var("a"), var("n")}};
  r.request.url = "U";
  r.request.extras = {var("Ai")};
  r.response.body = {Term::composite("B", {Term::composite(fn::succ, {var("n")})})};
  r.to.server = NamedTuple{
      "",
      {Term::composite(fn::set_union, {var("a"), Term::composite(fn::make_set, {var("Ai")})}),
       Term::composite(fn::succ, {var("n")})}};
  r.conditions = {{SideCondition::Kind::NotIn, var("Ai"), var("a")}};
  return r;
}

TransitionRule visitors_revisit() {
  TransitionRule r;
  r.name = "revisit";
  r.from.server = NamedTuple{"", {var("a"), var("n")}};
  r.request.url = "U";
  r.request.extras = {var("Ai")};
  r.response.body = {Term::composite("B", {var("n")})};
  r.to.server = NamedTuple{"", {var("a"), var("n")}};
  r.conditions = {{SideCondition::Kind::In, var("Ai"), var("a")}};
  return r;
}

GlobalState visitors_state(std::vector<std::string> addrs, std::uint64_t n) {
  GlobalState s;
  s.server = NamedTuple{"", {Term::set(std::move(addrs)), Term::nat(n)}};
  return s;
}

Request visitors_request(const std::string& addr) {
  return Request{{}, "U", {Term::constant(addr)}};
}

}  // namespace

TEST_CASE("amend_cookie_store follows the generic rule") {
  CHECK(amend_cookie_store({}, {{"c1"}, {}}) == CookieSet{"c1"});
  CHECK(amend_cookie_store({"c1"}, {{"c2"}, {}}) == CookieSet{"c1", "c2"});
  CHECK(amend_cookie_store({"c1"}, {{}, {"c1"}}) == CookieSet{});
  CHECK(amend_cookie_store({"c1", "c2"}, {}) == CookieSet{"c1", "c2"});
}

TEST_CASE("property: cookie amendment algebra") {
  std::mt19937 rng(42);
  const std::vector<std::string> universe{"c1", "c2", "c3", "c4"};
  auto subset = [&](auto& gen) {
    CookieSet out;
    for (const std::string& c : universe)
      if (gen() % 2) out.insert(c);
    return out;
  };
  for (int iter = 0; iter < 500; ++iter) {
    const CookieSet store = subset(rng);
    SignedCookies sc;
    sc.add = subset(rng);
    for (const std::string& c : subset(rng))
      if (!sc.add.count(c)) sc.remove.insert(c);
    const CookieSet out = amend_cookie_store(store, sc);
    for (const std::string& c : sc.add) CHECK(out.count(c));
    for (const std::string& c : sc.remove) CHECK(!out.count(c));
    for (const std::string& c : store)
      if (!sc.remove.count(c)) CHECK(out.count(c));
    for (const std::string& c : out)
      CHECK((store.count(c) || sc.add.count(c)));
    CHECK(amend_cookie_store(out, sc) == out);  // idempotent
  }
}

TEST_CASE("applicable binds pattern variables and checks side conditions") {
  const TransitionRule rule = visitors_first_visit();
  SUBCASE("fresh address applies") {
    auto sigma = applicable(rule, visitors_state({}, 0), visitors_request("A1"));
    REQUIRE(sigma.has_value());
    CHECK(render(*sigma->lookup(var("a"))) == "{}");
    CHECK(render(*sigma->lookup(var("n"))) == "0");
    CHECK(render(*sigma->lookup(var("Ai"))) == "A1");
  }
  SUBCASE("seen address violates the side condition") {
    CHECK(!applicable(rule, visitors_state({"A1"}, 1), visitors_request("A1")));
  }
  SUBCASE("wrong url never applies") {
    Request req{{}, "V", {Term::constant("A1")}};
    CHECK(!applicable(rule, visitors_state({}, 0), req));
  }
}

TEST_CASE("applicable on one-sided symbolic rules") {
  TransitionRule rule;  // client fetch: j(eps,eps,eps) --GET_DOC/uid,doc--> ...
  rule.name = "get_doc";
  rule.side = RuleSide::Client;
  rule.from.client = NamedTuple{"j", {Term::epsilon(), Term::epsilon(), Term::epsilon()}};
  rule.request.url = "GET_DOC";
  rule.response.body = {var("uid"), var("doc")};
  rule.to.client = NamedTuple{"j", {var("uid"), var("doc"), Term::epsilon()}};
  rule.conditions = {{SideCondition::Kind::NotEpsilon, var("uid"), Term::epsilon()}};

  GlobalState fresh;
  fresh.client = NamedTuple{"j", {Term::epsilon(), Term::epsilon(), Term::epsilon()}};
  CHECK(applicable(rule, fresh, Request{{}, "GET_DOC", {}}).has_value());

  GlobalState running;
  running.client =
      NamedTuple{"j", {Term::nat(5), Term::constant("d"), Term::constant("d")}};
  CHECK(!applicable(rule, running, Request{{}, "GET_DOC", {}}));
}

TEST_CASE("fire instantiates the response and final state") {
  SUBCASE("fresh visit increments and records") {
    auto [resp, to] = fire(visitors_first_visit(), visitors_state({}, 0),
                           visitors_request("A1"));
    REQUIRE(resp.body.size() == 1);
    CHECK(render(resp.body[0]) == "B(1)");
    CHECK(render(to) == "({A1},1)");
  }
  SUBCASE("repeat visit is a self-loop") {
    auto [resp, to] = fire(visitors_revisit(), visitors_state({"A1"}, 1),
                           visitors_request("A1"));
    CHECK(render(resp.body[0]) == "B(1)");
    CHECK(render(to) == "({A1},1)");
  }
  SUBCASE("cookie rule checks the amended store") {
    TransitionRule rule;  // {} --2v/{+c1} II--> {c1}
    rule.name = "agree";
    rule.from.browser = CookieSet{};
    rule.request.cookies = CookieSet{};
    rule.request.url = "2v";
    rule.response.signed_cookies.add = {"c1"};
    rule.response.body = {Term::constant("II")};
    rule.to.browser = CookieSet{"c1"};
    GlobalState from;
    from.browser = CookieSet{};
    auto [resp, to] = fire(rule, from, Request{{}, "2v", {}});
    CHECK(render(resp.body[0]) == "II");
    CHECK(render(to) == "{c1}");

    rule.to.browser = CookieSet{"c2"};  // disagrees with the amendment
    CHECK_THROWS_AS(fire(rule, from, Request{{}, "2v", {}}), InconsistentRuleError);
  }
  SUBCASE("not applicable throws") {
    CHECK_THROWS_AS(
        fire(visitors_first_visit(), visitors_state({"A1"}, 1), visitors_request("A1")),
        NotApplicableError);
  }
  SUBCASE("fire is deterministic") {
    auto a = fire(visitors_first_visit(), visitors_state({}, 0), visitors_request("A2"));
    auto b = fire(visitors_first_visit(), visitors_state({}, 0), visitors_request("A2"));
    CHECK(a.second == b.second);
    CHECK(render(a.first.body[0]) == render(b.first.body[0]));
  }
}

TEST_CASE("fire rejects symbolic updates") {
  TransitionRule rule;
  rule.name = "sym";
  rule.from.server = NamedTuple{"", {var("x")}};
  rule.request.url = "U";
  rule.to.server = NamedTuple{"", {Term::composite("mangle", {var("x")})}};
  GlobalState s;
  s.server = NamedTuple{"", {var("x")}};
  s.server->elems[0] = Term::nat(0);
  auto to_sym = fire(rule, s, Request{{}, "U", {}});
  CHECK(render(to_sym.second) == "(mangle(0))");  // ground composites are values

  rule.to.server = NamedTuple{"", {Term::composite(fn::succ, {Term::constant("d")})}};
  CHECK_THROWS_AS(fire(rule, s, Request{{}, "U", {}}), SymbolicStateError);
}

TEST_CASE("instantiate_schema expands the parameter product") {
  RuleSchema schema;
  schema.rule = visitors_first_visit();
  schema.params = {{"Ai",
                    {Term::constant("A1"), Term::constant("A2"), Term::constant("A3")}}};
  auto rules = instantiate_schema(schema);
  REQUIRE(rules.size() == 3);
  CHECK(rules[0].name == "first_visit[A1]");
  CHECK(render(rules[1].request.extras[0]) == "A2");
  // conditions see the value too
  CHECK(render(rules[2].conditions[0].lhs) == "A3");

  SUBCASE("two schemas over one domain give the full product count") {
    RuleSchema second = schema;
    second.rule = visitors_revisit();
    CHECK(instantiate_schema(schema).size() + instantiate_schema(second).size() == 6);
  }
  SUBCASE("singleton domain") {
    schema.params[0].second = {Term::constant("A1")};
    CHECK(instantiate_schema(schema).size() == 1);
  }
  SUBCASE("empty domain gives no rules") {
    schema.params[0].second.clear();
    CHECK(instantiate_schema(schema).empty());
  }
}

TEST_CASE("the agreement rule rows cover every store/url pair exactly once") {
  const SpecDocument doc = load_spec(std::string(*fixture_text("agreement")));
  const std::vector<CookieSet> stores{{}, {"c1"}, {"c2"}, {"c1", "c2"}};
  for (const CookieSet& store : stores) {
    for (const std::string& url : doc.urls) {
      GlobalState s;
      s.browser = store;
      Request req{store, url, {}};
      int applicable_rules = 0;
      for (const TransitionRule& r : doc.rules)
        if (applicable(r, s, req)) ++applicable_rules;
      CAPTURE(render(store));
      CAPTURE(url);
      CHECK(applicable_rules == 1);
    }
  }
}

TEST_CASE("the agreement rules echo the browser state in the request") {
  const SpecDocument doc = load_spec(std::string(*fixture_text("agreement")));
  CHECK(doc.rules.size() == 20);  // ten rows expand to one rule per store/url pair
  for (const TransitionRule& r : doc.rules) {
    REQUIRE(r.request.cookies.has_value());
    REQUIRE(r.from.browser.has_value());
    CHECK(*r.request.cookies == *r.from.browser);
  }
}
