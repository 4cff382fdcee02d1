#pragma once

#include <map>
#include <optional>
#include <string>

#include "alspec/spec_doc.hpp"

// Drivers behind the CLI subcommands: explore-and-check, compose, export
// and list. All output is deterministic.

namespace alspec {

struct Report {
  std::string text;
  bool ok = true;
};

using ParamOverrides = std::map<std::string, long long>;

// Explores the specification (when it is explorable) and evaluates its
// formulae against their expectations; runs the declared slot assertions
// through the composer. ok reflects every expectation.
Report run_check(const SpecDocument& doc, const std::optional<std::string>& formula,
                 const ParamOverrides& overrides = {});

// Prints the pairing substitutions, the composed global rule and the
// declared slot assertions for one command.
Report run_compose(const SpecDocument& doc, const std::string& command);

// Writes the explored system as DOT and reports the exploration summary.
Report run_export(const SpecDocument& doc, const std::string& dot_path,
                  const ParamOverrides& overrides = {});

Report run_list(const SpecDocument& doc);

// The composed rule for one command of a two-sided specification.
GlobalRule compose_command(const SpecDocument& doc, const std::string& command);

// Explores an explorable specification under the given parameters.
Kts explore_spec(const SpecDocument& doc, const ParamOverrides& overrides = {});

}  // namespace alspec
