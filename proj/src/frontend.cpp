#include "alspec/frontend.hpp"

#include <fstream>
#include <sstream>

namespace alspec {

namespace {

struct RulePair {
  const TransitionRule* client = nullptr;
  const TransitionRule* server = nullptr;
};

RulePair find_pair(const SpecDocument& doc, const std::string& command) {
  RulePair out;
  for (const TransitionRule& r : doc.rules) {
    if (r.request.url != command) continue;
    if (r.side == RuleSide::Client && !out.client) out.client = &r;
    if (r.side == RuleSide::Server && !out.server) out.server = &r;
  }
  return out;
}

std::vector<std::string> commands_of(const SpecDocument& doc) {
  std::vector<std::string> out;
  for (const TransitionRule& r : doc.rules) {
    if (r.side != RuleSide::Client) continue;
    const RulePair p = find_pair(doc, r.request.url);
    if (p.client && p.server) out.push_back(r.request.url);
  }
  return out;
}

std::string render_bindings(const Verdict& v) {
  if (v.bindings.empty()) return "";
  std::string out = " with ";
  for (std::size_t i = 0; i < v.bindings.size(); ++i) {
    if (i) out += ", ";
    out += v.bindings[i].first + "=" + v.bindings[i].second;
  }
  return out;
}

}  // namespace

Kts explore_spec(const SpecDocument& doc, const ParamOverrides& overrides) {
  if (!doc.explorable())
    throw ModelError("spec " + doc.name +
                     " is not explorable: it needs an initial state and only "
                     "global (two-sided) rules");
  const auto params = resolve_params(doc, overrides);
  const auto rules = concrete_rules(doc, params);
  return explore(rules, initial_state(doc), state_shape(doc, params));
}

GlobalRule compose_command(const SpecDocument& doc, const std::string& command) {
  const RulePair pair = find_pair(doc, command);
  if (!pair.client || !pair.server) {
    std::string available;
    for (const std::string& c : commands_of(doc)) available += " " + c;
    throw ComposeError("command '" + command +
                       "' has no client/server rule pair; available:" +
                       (available.empty() ? " (none)" : available));
  }
  return compose_global_rule(*pair.client, *pair.server);
}

namespace {

void run_assertions(const SpecDocument& doc, const std::string& command,
                    const GlobalRule& rule, std::ostringstream& os, bool& ok,
                    std::size_t& total, std::size_t& held) {
  for (const SlotAssertion& a : doc.asserts) {
    if (a.command != command) continue;
    ++total;
    const SlotVerdict v = check_slot(rule, a, field_names(doc, a.side));
    os << "  assert " << a.name << ": " << (v.holds ? "HOLDS" : "FAILS");
    if (!v.holds) {
      os << " (slot is " << v.rendered_actual << ")";
      ok = false;
    } else {
      ++held;
    }
    os << "\n";
  }
}

}  // namespace

Report run_check(const SpecDocument& doc, const std::optional<std::string>& formula,
                 const ParamOverrides& overrides) {
  Report report;
  std::ostringstream os;
  os << "spec " << doc.name << "\n";

  std::size_t expectations = 0, met = 0;
  bool found = false;

  if (!doc.formulas.empty() || doc.explorable()) {
    const auto params = resolve_params(doc, overrides);
    const Kts kts = explore_spec(doc, overrides);
    os << kts.summary() << "\n";
    if (!kts.closed)
      throw ModelError("exploration tripped its limits (" +
                       std::to_string(kts.frontier_remaining) +
                       " frontier states pending); formulae need a closed system");
    const Env env = base_env(doc, params);
    const auto domains = domain_values(doc, params);
    for (const FormulaDecl& f : doc.formulas) {
      if (formula && f.name != *formula) continue;
      found = true;
      ++expectations;
      const Verdict v = check_quantified(kts, f.ast, f.mode, domains, env);
      const bool matched = v.holds == f.expect_holds;
      if (matched) ++met;
      os << "formula " << f.name << ": " << (v.holds ? "HOLDS" : "FAILS")
         << " (expect " << (f.expect_holds ? "holds" : "fails") << ") "
         << (matched ? "[ok]" : "[MISMATCH]") << render_bindings(v);
      if (v.assignments_evaluated > 1)
        os << " [" << v.assignments_evaluated << " assignments]";
      os << "\n";
      if (v.witness) {
        os << "  witness:\n" << render(kts, *v.witness);
      }
      if (v.counterexample_state) {
        os << "  counterexample: " << kts.state_name(*v.counterexample_state) << "\n";
      }
      if (!matched) report.ok = false;
    }
  }
  if (formula && !found)
    throw EvalError("no formula named '" + *formula + "' in spec " + doc.name);

  if (!formula && !doc.asserts.empty()) {
    std::size_t total = 0, held = 0;
    for (const std::string& command : commands_of(doc)) {
      bool has = false;
      for (const SlotAssertion& a : doc.asserts)
        if (a.command == command) has = true;
      if (!has) continue;
      const GlobalRule rule = compose_command(doc, command);
      os << "command " << command << "\n";
      run_assertions(doc, command, rule, os, report.ok, total, held);
    }
    expectations += total;
    met += held;
  }

  os << "check: " << met << "/" << expectations << " expectations met\n";
  report.text = os.str();
  return report;
}

Report run_compose(const SpecDocument& doc, const std::string& command) {
  Report report;
  std::ostringstream os;
  os << "spec " << doc.name << "\n";
  const GlobalRule rule = compose_command(doc, command);
  os << "command " << command << "\n";
  os << "  client rule: " << rule.client_rule.name << "\n";
  os << "  server rule: " << rule.server_rule.name << "\n";
  os << "  sigma_request = " << render(rule.sigma_request) << "\n";
  os << "  sigma_response = " << render(rule.sigma_response) << "\n";
  os << "  global rule: " << render(rule) << "\n";
  std::size_t total = 0, held = 0;
  run_assertions(doc, command, rule, os, report.ok, total, held);
  if (total) os << "compose: " << held << "/" << total << " assertions hold\n";
  report.text = os.str();
  return report;
}

Report run_export(const SpecDocument& doc, const std::string& dot_path,
                  const ParamOverrides& overrides) {
  Report report;
  std::ostringstream os;
  os << "spec " << doc.name << "\n";
  const Kts kts = explore_spec(doc, overrides);
  const std::string dot = to_dot(kts, doc.name);
  std::ofstream out(dot_path, std::ios::binary);
  if (!out) throw ModelError("cannot write '" + dot_path + "'");
  out << dot;
  os << "wrote " << dot_path << "\n";
  os << kts.summary() << "\n";
  report.ok = kts.closed;
  report.text = os.str();
  return report;
}

Report run_list(const SpecDocument& doc) {
  Report report;
  std::ostringstream os;
  os << "spec " << doc.name << "\n";
  if (!doc.params.empty()) {
    os << "params:";
    for (const auto& [n, v] : doc.params) os << ' ' << n << '=' << v;
    os << "\n";
  }
  os << "rules: " << doc.rules.size() << " concrete";
  std::size_t schema_rules = 0;
  for (const SchemaDecl& s : doc.schemas) schema_rules += s.rules.size();
  if (schema_rules) os << ", " << schema_rules << " schema rules";
  os << "\n";
  for (const TransitionRule& r : doc.rules)
    os << "  " << r.name << ": " << render(r) << "\n";
  for (const SchemaDecl& s : doc.schemas)
    for (const TransitionRule& r : s.rules)
      os << "  " << r.name << " for " << s.param << " in " << s.domain << ": "
         << render(r) << "\n";
  const auto commands = commands_of(doc);
  if (!commands.empty()) {
    os << "commands:";
    for (const std::string& c : commands) os << ' ' << c;
    os << "\n";
  }
  for (const FormulaDecl& f : doc.formulas)
    os << "formula " << f.name << " (expect " << (f.expect_holds ? "holds" : "fails")
       << "): " << f.text << "\n";
  for (const SlotAssertion& a : doc.asserts)
    os << "assert " << a.name << " on " << a.command << "\n";
  report.text = os.str();
  return report;
}

}  // namespace alspec
