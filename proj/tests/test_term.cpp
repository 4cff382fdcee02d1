#include "alspec/term.hpp"

#include <random>

#include "doctest.h"

using namespace alspec;

namespace {

const SideTag kS = SideTag::server();
const SideTag kI = SideTag::client();

Term var(const std::string& n, SideTag t = SideTag::none()) { return Term::variable(n, t); }
Term con(const std::string& n) { return Term::constant(n); }

// getDiffs(diffss_s,uid_s)_s
Term get_diffs_term() {
  return Term::composite("getDiffs", {var("diffss", kS), var("uid", kS)}, kS);
}

}  // namespace

TEST_CASE("natural identifier ordering") {
  CHECK(natural_compare("A2", "A10") < 0);
  CHECK(natural_compare("c1", "c2") < 0);
  CHECK(natural_compare("2", "2v") < 0);
  CHECK(natural_compare("2v", "w") < 0);
  CHECK(natural_compare("w", "wv") < 0);
  CHECK(natural_compare("A1", "A1") == 0);
}

TEST_CASE("match_elements follows the five cases") {
  SUBCASE("variable against variable") {
    auto b = match_elements(var("uid", kS), var("uid", kI));
    REQUIRE(b.has_value());
    CHECK(render(*b) == "uid_s/uid_i");
  }
  SUBCASE("same constants give the null binding") {
    auto b = match_elements(con("GET_DIFFS"), con("GET_DIFFS"));
    REQUIRE(b.has_value());
    CHECK(b->is_null());
    CHECK(render(*b) == "∅");
  }
  SUBCASE("variable against composite") {
    auto b = match_elements(var("diffs", kI), get_diffs_term());
    REQUIRE(b.has_value());
    CHECK(render(*b) == "diffs_i/getDiffs(diffss_s,uid_s)_s");
  }
  SUBCASE("distinct constants fail") {
    MatchDiag diag;
    CHECK(!match_elements(con("GET_DOC"), con("PUT_DIFFS"), &diag).has_value());
    CHECK(diag == MatchDiag::NoCase);
  }
  SUBCASE("constant against variable or composite fails") {
    CHECK(!match_elements(con("c"), var("v")).has_value());
    CHECK(!match_elements(con("c"), get_diffs_term()).has_value());
  }
  SUBCASE("composite on the left fails") {
    CHECK(!match_elements(get_diffs_term(), get_diffs_term()).has_value());
    CHECK(!match_elements(get_diffs_term(), var("v")).has_value());
  }
  SUBCASE("epsilon acts as a constant") {
    auto b = match_elements(Term::epsilon(), Term::epsilon());
    REQUIRE(b.has_value());
    CHECK(b->is_null());
    CHECK(!match_elements(Term::epsilon(), con("c")).has_value());
    auto vb = match_elements(var("uid"), Term::epsilon());
    REQUIRE(vb.has_value());
    CHECK(render(*vb) == "uid/eps");
  }
}

TEST_CASE("match_tuples reproduces the worked derivations") {
  SUBCASE("request tuples") {
    TermTuple server{con("GET_DIFFS"), var("uid", kS)};
    TermTuple client{con("GET_DIFFS"), var("uid", kI)};
    auto s = match_tuples(server, client);
    REQUIRE(s.has_value());
    CHECK(render(*s) == "{∅, uid_s/uid_i}");
  }
  SUBCASE("response tuples") {
    TermTuple client{var("diffs", kI)};
    TermTuple server{get_diffs_term()};
    auto s = match_tuples(client, server);
    REQUIRE(s.has_value());
    CHECK(render(*s) == "{diffs_i/getDiffs(diffss_s,uid_s)_s}");
  }
  SUBCASE("empty tuples give the empty substitution") {
    auto s = match_tuples({}, {});
    REQUIRE(s.has_value());
    CHECK(s->empty());
    CHECK(render(*s) == "{}");
  }
  SUBCASE("length mismatch fails") {
    MatchDiag diag;
    CHECK(!match_tuples({con("GET_DOC")}, {con("GET_DOC"), var("uid", kI)}, &diag));
    CHECK(diag == MatchDiag::LengthMismatch);
  }
  SUBCASE("identical duplicate bindings collapse") {
    TermTuple a{con("c"), con("c")};
    auto s = match_tuples(a, a);
    REQUIRE(s.has_value());
    CHECK(render(*s) == "{∅}");
  }
  SUBCASE("clashing bindings for one variable fail") {
    MatchDiag diag;
    TermTuple pat{var("x"), var("x")};
    TermTuple val{con("a"), con("b")};
    CHECK(!match_tuples(pat, val, &diag));
    CHECK(diag == MatchDiag::Conflict);
  }
}

TEST_CASE("apply_substitution") {
  Substitution resp;
  resp.bindings.push_back(Binding::of(var("diffs", kI), get_diffs_term()));
  Substitution req;
  req.bindings.push_back(Binding::null());
  req.bindings.push_back(Binding::of(var("uid", kS), var("uid", kI)));

  SUBCASE("replaces nested occurrences") {
    Term t = Term::composite("applyDiffs", {var("doc"), var("diffs", kI)});
    Term out = apply_substitution(t, resp);
    CHECK(render(out) == "applyDiffs(doc,getDiffs(diffss_s,uid_s)_s)");
  }
  SUBCASE("null bindings are identity; tagged keys are distinct") {
    Term out = apply_substitution(get_diffs_term(), req);
    CHECK(render(out) == "getDiffs(diffss_s,uid_i)_s");
  }
  SUBCASE("empty substitution is identity") {
    Term t = Term::composite("f", {var("x"), con("c")});
    CHECK(apply_substitution(t, Substitution{}) == t);
  }
  SUBCASE("application is simultaneous, not chained") {
    Substitution s;
    s.bindings.push_back(Binding::of(var("x"), var("y")));
    s.bindings.push_back(Binding::of(var("y"), var("z")));
    CHECK(render(apply_substitution(var("x"), s)) == "y");
  }
  SUBCASE("unbound variables pass through") {
    CHECK(apply_substitution(var("other"), req) == var("other"));
  }
}

TEST_CASE("compose_apply applies in reverse order") {
  Substitution sigma_req;
  sigma_req.bindings.push_back(Binding::null());
  sigma_req.bindings.push_back(Binding::of(var("uid", kS), var("uid", kI)));
  Substitution sigma_resp;
  sigma_resp.bindings.push_back(Binding::of(var("diffs", kI), get_diffs_term()));

  SUBCASE("server final state") {
    // s(luid,doc,resetDiffs(diffss,uid)) tagged s, then both substitutions
    Term to = Term::composite(
        "resetDiffs", {var("diffss", kS), var("uid", kS)}, kS);
    Term out = compose_apply(to, {sigma_resp, sigma_req});
    CHECK(render(out) == "resetDiffs(diffss_s,uid_i)_s");
  }
  SUBCASE("client final state") {
    Term to = Term::composite(
        "applyDiffs", {var("doc", kI), var("diffs", kI)}, kI);
    Term out = compose_apply(to, {sigma_req, sigma_resp});
    CHECK(render(out) == "applyDiffs(doc_i,getDiffs(diffss_s,uid_i)_s)_i");
  }
  SUBCASE("empty list is identity") {
    CHECK(compose_apply(var("x"), {}) == var("x"));
  }
  SUBCASE("single substitution equals apply_substitution") {
    Term t = Term::composite("f", {var("uid", kS), var("diffs", kI)});
    CHECK(compose_apply(t, {sigma_req}) == apply_substitution(t, sigma_req));
  }
  SUBCASE("two substitutions equal nested application, last first") {
    Term t = Term::composite("f", {var("uid", kS), var("diffs", kI)});
    CHECK(compose_apply(t, {sigma_req, sigma_resp}) ==
          apply_substitution(apply_substitution(t, sigma_resp), sigma_req));
  }
}

TEST_CASE("rendering conventions") {
  CHECK(render(Term::epsilon()) == "eps");
  CHECK(render(Term::nat(3)) == "3");
  CHECK(render(Term::set({"c2", "c1"})) == "{c1,c2}");
  CHECK(render(Term::set({})) == "{}");
  CHECK(render(var("uid", SideTag::client(2))) == "uid_i2");
  // successor composites render infix, parenthesised when tagged
  Term succ = Term::composite(fn::succ, {var("luid", kS)}, kS);
  CHECK(render(succ) == "(luid_s+1)_s");
  Term succ_plain = Term::composite(fn::succ, {var("n")});
  CHECK(render(succ_plain) == "n+1");
  Term uni = Term::composite(
      fn::set_union, {var("a"), Term::composite(fn::make_set, {var("Ai")})});
  CHECK(render(uni) == "a+{Ai}");
}

TEST_CASE("home-side rendering keeps foreign subterms fully tagged") {
  // j_i slot applyDiffs(doc_i, getDiffs(diffss_s,uid_i)_s)_i
  Term foreign = Term::composite("getDiffs", {var("diffss", kS), var("uid", kI)}, kS);
  Term slot = Term::composite("applyDiffs", {var("doc", kI), foreign}, kI);
  CHECK(render_home(slot, kI) == "applyDiffs(doc,getDiffs(diffss_s,uid_i)_s)");
  // server slot resetDiffs(diffss_s,uid_i)_s
  Term sslot = Term::composite("resetDiffs", {var("diffss", kS), var("uid", kI)}, kS);
  CHECK(render_home(sslot, kS) == "resetDiffs(diffss,uid_i)");
}

TEST_CASE("equality up to the home tag") {
  Term tagged = Term::composite("resetDiffs", {var("diffss", kS), var("uid", kI)}, kS);
  Term written = Term::composite("resetDiffs", {var("diffss"), var("uid", kI)});
  CHECK(equal_up_to_home_tag(tagged, written, kS));
  CHECK(!equal_up_to_home_tag(tagged, written, kI));
  CHECK(equal_up_to_home_tag(var("doc", kS), var("doc", kS), kI));  // exact foreign
  CHECK(!equal_up_to_home_tag(var("doc", kS), var("doc", kI), kI));
}

// ---------------------------------------------------------------------------
// property suites

namespace {

struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); }

  std::string ident(const char* prefix, int n) {
    return std::string(prefix) + std::to_string(pick(n));
  }

  SideTag tag() {
    switch (pick(3)) {
      case 0: return SideTag::none();
      case 1: return SideTag::server();
      default: return SideTag::client(pick(2));
    }
  }

  Term ground_term(int depth) {
    if (depth <= 0 || pick(3) == 0) {
      switch (pick(3)) {
        case 0: return Term::constant(ident("c", 4));
        case 1: return Term::epsilon();
        default: return Term::constant(ident("d", 4));
      }
    }
    std::vector<Term> args;
    const int n = 1 + pick(2);
    for (int i = 0; i < n; ++i) args.push_back(ground_term(depth - 1));
    return Term::composite(ident("f", 3), std::move(args), tag());
  }

  Term any_term(int depth) {
    if (pick(4) == 0) return Term::variable(ident("v", 6), tag());
    return ground_term(depth);
  }
};

}  // namespace

TEST_CASE("property: matching soundness over generated pairs") {
  Gen g(20240811);
  int ran = 0;
  for (int iter = 0; iter < 1100; ++iter) {
    // left tuple: linear pattern of fresh variables and constants
    const int len = g.pick(5);
    TermTuple pat, val;
    int fresh = 0;
    for (int i = 0; i < len; ++i) {
      if (g.pick(2) == 0) {
        pat.push_back(Term::variable("x" + std::to_string(fresh++), g.tag()));
        val.push_back(g.any_term(2));
      } else {
        Term c = g.ground_term(0);
        pat.push_back(c);
        val.push_back(c);
      }
    }
    auto sigma = match_tuples(pat, val);
    REQUIRE(sigma.has_value());
    CHECK(apply_substitution(pat, *sigma) == val);
    ++ran;
  }
  CHECK(ran >= 1000);
}

TEST_CASE("property: match_elements succeeds exactly when a case applies") {
  Gen g(7);
  for (int iter = 0; iter < 2000; ++iter) {
    Term e = g.any_term(2);
    Term e2 = g.any_term(2);
    const bool case_applies =
        e.is_variable() || (e.is_constant_like() && e2.is_constant_like() && e == e2);
    CHECK(match_elements(e, e2).has_value() == case_applies);
  }
}

TEST_CASE("property: substitution is a homomorphism over composites") {
  Gen g(99);
  for (int iter = 0; iter < 500; ++iter) {
    Substitution s;
    const int nb = g.pick(4);
    for (int i = 0; i < nb; ++i) {
      Term v = Term::variable(g.ident("v", 6), g.tag());
      if (!s.lookup(v)) s.bindings.push_back(Binding::of(v, g.any_term(2)));
    }
    std::vector<Term> args;
    const int n = g.pick(4);
    for (int i = 0; i < n; ++i) args.push_back(g.any_term(2));
    SideTag tag = g.tag();
    Term whole = apply_substitution(Term::composite("f", args, tag), s);
    std::vector<Term> mapped;
    for (const Term& a : args) mapped.push_back(apply_substitution(a, s));
    CHECK(whole == Term::composite("f", mapped, tag));
  }
}
