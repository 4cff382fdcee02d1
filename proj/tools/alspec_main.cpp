// alspec: explore, check, compose and export application-layer
// specifications written in the .alspec DSL.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "alspec/fixtures.hpp"
#include "alspec/frontend.hpp"

namespace {

// exit codes: 0 all expectations met, 1 expectation mismatch, 2 usage or
// specification errors
constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;

std::string read_spec_text(const std::string& name_or_path) {
  if (auto text = alspec::fixture_text(name_or_path)) return std::string(*text);
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read spec '" + name_or_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

alspec::ParamOverrides parse_params(const std::vector<std::string>& kvs) {
  alspec::ParamOverrides out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--param expects K=V, got '" + kv + "'");
    out[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"application-layer specification toolkit"};
  app.require_subcommand(1);

  std::string spec_arg, formula, command, dot_path;
  std::vector<std::string> params;

  auto* check = app.add_subcommand("check", "explore a spec and check its formulae");
  check->add_option("spec", spec_arg, "spec file or embedded fixture name")->required();
  check->add_option("--formula", formula, "check one named formula only");
  check->add_option("--param", params, "override a parameter, K=V");

  auto* compose = app.add_subcommand("compose", "compose a client/server rule pair");
  compose->add_option("spec", spec_arg, "spec file or embedded fixture name")->required();
  compose->add_option("--command", command, "command constant to compose")->required();

  auto* exp = app.add_subcommand("export", "export the explored system as DOT");
  exp->add_option("spec", spec_arg, "spec file or embedded fixture name")->required();
  exp->add_option("--dot", dot_path, "output path")->required();
  exp->add_option("--param", params, "override a parameter, K=V");

  auto* list = app.add_subcommand("list", "list a spec's rules, formulae and commands");
  list->add_option("spec", spec_arg, "spec file or embedded fixture name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kUsage;
  }

  try {
    const alspec::SpecDocument doc = alspec::load_spec(read_spec_text(spec_arg));
    alspec::Report report;
    if (check->parsed()) {
      report = alspec::run_check(
          doc, formula.empty() ? std::nullopt : std::optional<std::string>(formula),
          parse_params(params));
    } else if (compose->parsed()) {
      report = alspec::run_compose(doc, command);
    } else if (exp->parsed()) {
      report = alspec::run_export(doc, dot_path, parse_params(params));
    } else {
      report = alspec::run_list(doc);
    }
    std::cout << report.text;
    return report.ok ? kOk : kMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
