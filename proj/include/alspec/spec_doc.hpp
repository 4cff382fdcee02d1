#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alspec/composer.hpp"
#include "alspec/kts.hpp"
#include "alspec/logic.hpp"
#include "alspec/model.hpp"

// The specification DSL: a document declares one application's cookie and
// URL universes, state shape, transition rules or rule schemas, named
// formulae with expectations, and slot assertions over composed rules.

namespace alspec {

struct BodyDecl {
  std::string name;
  bool parameterized = false;  // declared as name(nat)
};

struct DomainDecl {
  std::string name;
  bool indexed = false;       // prefix[1..count]
  std::string prefix;
  std::string count;          // integer literal or parameter name
  std::vector<std::string> elements;  // explicit form
};

struct GlobalDecl {
  std::string name;
  std::optional<NumExpr> value;  // derived value over parameters
};

struct FieldDecl {
  std::string name;
  TypedVariable::Type type = TypedVariable::Type::Symbolic;
  std::string domain;  // for set-typed fields
};

struct TupleDecl {
  bool declared = false;
  std::string name;  // may be empty for positional tuples
  std::vector<FieldDecl> fields;
};

struct ShapeDecl {
  std::optional<std::string> browser_var;
  TupleDecl client;
  TupleDecl server;
};

struct FormulaDecl {
  std::string name;
  EvalMode mode = EvalMode::AtInit;
  bool expect_holds = true;
  std::string text;  // formula body as written
  QuantifiedFormula ast;
};

struct SchemaDecl {
  std::string param;
  std::string domain;
  std::vector<TransitionRule> rules;
};

struct SpecDocument {
  std::string name;
  std::vector<std::pair<std::string, long long>> params;
  std::vector<std::string> cookies;
  std::vector<std::string> urls;
  std::vector<BodyDecl> bodies;
  std::vector<DomainDecl> domains;
  std::vector<GlobalDecl> globals;
  ShapeDecl shape;
  std::optional<CookieSet> init_browser;
  std::optional<NamedTuple> init_client;
  std::optional<NamedTuple> init_server;
  std::vector<TransitionRule> rules;  // row alternatives already expanded
  std::vector<SchemaDecl> schemas;
  std::vector<FormulaDecl> formulas;
  std::vector<SlotAssertion> asserts;

  bool explorable() const;  // has an initial state and no sided rules
  bool has_init() const {
    return init_browser || init_client || init_server;
  }
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct SpecError : std::runtime_error {
  std::vector<Diagnostic> diagnostics;
  explicit SpecError(std::vector<Diagnostic> diags);
};

// Parses and validates a document; throws SpecError carrying every
// diagnostic found, not just the first.
SpecDocument load_spec(const std::string& text);

// Canonical DSL rendering; loading the result yields an equivalent
// document.
std::string render_spec(const SpecDocument& doc);

// --- derived views ---------------------------------------------------------

struct ParamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declared defaults merged with overrides; unknown overrides are errors.
std::map<std::string, long long> resolve_params(
    const SpecDocument& doc, const std::map<std::string, long long>& overrides);

// Concrete values of every declared domain under the given parameters.
std::map<std::string, std::vector<Term>> domain_values(
    const SpecDocument& doc, const std::map<std::string, long long>& params);

// Numeric environment: parameters plus derived global constants.
Env base_env(const SpecDocument& doc, const std::map<std::string, long long>& params);

// All concrete rules: row-expanded rules plus instantiated schemas.
std::vector<TransitionRule> concrete_rules(
    const SpecDocument& doc, const std::map<std::string, long long>& params);

GlobalState initial_state(const SpecDocument& doc);

StateShape state_shape(const SpecDocument& doc,
                       const std::map<std::string, long long>& params);

FormulaContext formula_context(const SpecDocument& doc,
                               const std::map<std::string, long long>& params);

// Field names of one side's state tuple, for slot assertions.
std::vector<std::string> field_names(const SpecDocument& doc, RuleSide side);

}  // namespace alspec
