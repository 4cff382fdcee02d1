#include "alspec/spec_doc.hpp"

#include "alspec/fixtures.hpp"
#include "alspec/frontend.hpp"
#include "doctest.h"

using namespace alspec;

namespace {

std::string fixture(const char* name) { return std::string(*fixture_text(name)); }

}  // namespace

TEST_CASE("the embedded fixtures load with the declared inventories") {
  SUBCASE("agreement") {
    const SpecDocument doc = load_spec(fixture("agreement"));
    CHECK(doc.name == "agreement");
    CHECK(doc.cookies == std::vector<std::string>{"c1", "c2"});
    CHECK(doc.urls == std::vector<std::string>{"1", "2", "w", "2v", "wv"});
    CHECK(doc.bodies.size() == 4);
    CHECK(doc.rules.size() == 20);
    CHECK(doc.formulas.size() == 2);
    CHECK(doc.explorable());
  }
  SUBCASE("visitors") {
    const SpecDocument doc = load_spec(fixture("visitors"));
    CHECK(doc.params.size() == 1);
    CHECK(doc.schemas.size() == 1);
    CHECK(doc.schemas[0].rules.size() == 2);
    CHECK(doc.formulas.size() == 5);
    const auto domains = domain_values(doc, resolve_params(doc, {}));
    CHECK(domains.at("addresses").size() == 3);
    CHECK(render(domains.at("addresses")[2]) == "A3");
  }
  SUBCASE("quicdoc") {
    const SpecDocument doc = load_spec(fixture("quicdoc"));
    CHECK(doc.rules.size() == 6);
    CHECK(doc.asserts.size() == 6);
    CHECK(!doc.explorable());  // one-sided rules compose, they do not explore
    CHECK(field_names(doc, RuleSide::Client) ==
          std::vector<std::string>{"gUid", "gWorkingDoc", "gTempDoc"});
  }
}

TEST_CASE("validation collects every error, not just the first") {
  const char* bad = R"(
spec broken
cookies { c1 }
urls { u }
state browser c
init browser {}
rule a: {} -- {} v / {} X --> {}
rule b: {} -- {} u / {+zz} X --> {zz}
rule c: {} -- {} u / {+c1,-c1} X --> {}
)";
  try {
    load_spec(bad);
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(e.diagnostics.size() >= 4);  // unknown url, unknown cookie, more
    std::string all = e.what();
    CHECK(all.find("undeclared url 'v'") != std::string::npos);
    CHECK(all.find("zz") != std::string::npos);
    CHECK(all.find("both sets and clears cookie 'c1'") != std::string::npos);
  }
}

TEST_CASE("validation rejects unbound rule variables") {
  const char* bad = R"(
spec broken
urls { U }
state server (n: nat)
init server (0)
rule r: (n) -- U / B(m) --> (n)
)";
  CHECK_THROWS_AS(load_spec(bad), SpecError);
}

TEST_CASE("rendering a loaded document reloads to an equivalent document") {
  for (const char* name : {"agreement", "visitors", "quicdoc"}) {
    CAPTURE(name);
    const SpecDocument doc = load_spec(fixture(name));
    const std::string once = render_spec(doc);
    const SpecDocument again = load_spec(once);
    CHECK(render_spec(again) == once);
  }
}

TEST_CASE("parameters override from the outside") {
  const SpecDocument doc = load_spec(fixture("visitors"));
  CHECK(resolve_params(doc, {}).at("N") == 3);
  CHECK(resolve_params(doc, {{"N", 5}}).at("N") == 5);
  CHECK_THROWS_AS(resolve_params(doc, {{"M", 1}}), ParamError);

  const Kts kts = explore_spec(doc, {{"N", 5}});
  CHECK(kts.states.size() == 32);

  // derived bindings follow the parameters
  const Env env = base_env(doc, resolve_params(doc, {{"N", 5}}));
  CHECK(env.nums.at("N") == 5);
}

TEST_CASE("run_check evaluates every formula against its expectation") {
  SUBCASE("agreement meets both expectations") {
    const Report r = run_check(load_spec(fixture("agreement")), std::nullopt);
    CHECK(r.ok);
    CHECK(r.text.find("states=3 transitions=5 closed=true") != std::string::npos);
    CHECK(r.text.find("formula ideal_journey: HOLDS (expect holds) [ok]") !=
          std::string::npos);
    CHECK(r.text.find("formula wrong_responses: HOLDS (expect holds) [ok]") !=
          std::string::npos);
    CHECK(r.text.find("check: 2/2 expectations met") != std::string::npos);
  }
  SUBCASE("a flipped expectation turns into a mismatch") {
    std::string text = fixture("agreement");
    const auto at = text.find("anywhere expect holds: E( {}");
    REQUIRE(at != std::string::npos);
    text.replace(at, std::string("anywhere expect holds").size(),
                 "anywhere expect fails");
    const Report r = run_check(load_spec(text), std::nullopt);
    CHECK(!r.ok);
    CHECK(r.text.find("[MISMATCH]") != std::string::npos);
  }
  SUBCASE("a single formula can be selected") {
    const Report r =
        run_check(load_spec(fixture("visitors")), std::string("counter_bound"));
    CHECK(r.ok);
    CHECK(r.text.find("counter_bound") != std::string::npos);
    CHECK(r.text.find("no_double_increment") == std::string::npos);
    CHECK_THROWS_AS(run_check(load_spec(fixture("visitors")), std::string("nope")),
                    EvalError);
  }
  SUBCASE("quicdoc checks its slot assertions through composition") {
    const Report r = run_check(load_spec(fixture("quicdoc")), std::nullopt);
    CHECK(r.ok);
    CHECK(r.text.find("check: 6/6 expectations met") != std::string::npos);
  }
}

TEST_CASE("run_compose prints the derivation and runs the assertions") {
  const SpecDocument doc = load_spec(fixture("quicdoc"));
  SUBCASE("GET_DIFFS shows both substitutions") {
    const Report r = run_compose(doc, "GET_DIFFS");
    CHECK(r.ok);
    CHECK(r.text.find("sigma_request = {∅, uid_s/uid_i}") != std::string::npos);
    CHECK(r.text.find("sigma_response = {diffs_i/getDiffs(diffss_s,uid_s)_s}") !=
          std::string::npos);
    CHECK(r.text.find("assert diffs_applied: HOLDS") != std::string::npos);
    CHECK(r.text.find("assert diffs_reset: HOLDS") != std::string::npos);
  }
  SUBCASE("unknown commands list what is available") {
    try {
      run_compose(doc, "DELETE_DOC");
      FAIL("expected ComposeError");
    } catch (const ComposeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("GET_DOC") != std::string::npos);
      CHECK(msg.find("GET_DIFFS") != std::string::npos);
      CHECK(msg.find("PUT_DIFFS") != std::string::npos);
    }
  }
}

TEST_CASE("run_export writes DOT and prints the summary line") {
  const std::string path = "/tmp/alspec_test_export.dot";
  SUBCASE("visitors at the default parameter") {
    const Report r = run_export(load_spec(fixture("visitors")), path);
    CHECK(r.ok);
    CHECK(r.text.find("states=8 transitions=19 closed=true") != std::string::npos);
  }
  SUBCASE("agreement") {
    const Report r = run_export(load_spec(fixture("agreement")), path);
    CHECK(r.text.find("states=3 transitions=5 closed=true") != std::string::npos);
  }
  SUBCASE("the two-state instance") {
    const Report r = run_export(load_spec(fixture("visitors")), path, {{"N", 1}});
    CHECK(r.text.find("states=2 transitions=2 closed=true") != std::string::npos);
  }
}

TEST_CASE("reports are byte-identical across runs") {
  for (const char* name : {"agreement", "visitors", "quicdoc"}) {
    CAPTURE(name);
    const SpecDocument doc = load_spec(fixture(name));
    const Report a = run_check(doc, std::nullopt);
    const Report b = run_check(doc, std::nullopt);
    CHECK(a.text == b.text);
    const Report la = run_list(doc);
    const Report lb = run_list(doc);
    CHECK(la.text == lb.text);
  }
}

TEST_CASE("exploring a symbolic specification fails loudly") {
  // a successor over an uninterpreted composite never becomes concrete
  const char* sym = R"(
spec symbolic
urls { U }
state server (d)
init server (0)

rule step: (d) -- U / --> (f(d)+1)
)";
  const SpecDocument doc = load_spec(sym);
  CHECK(doc.explorable());
  CHECK_THROWS_AS(explore_spec(doc), SymbolicStateError);
}
