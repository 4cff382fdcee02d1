#include "alspec/spec_doc.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace alspec {

namespace {

const std::set<std::string> kTopKeywords = {
    "spec",  "param",  "cookies", "urls",    "bodies", "domain", "global",
    "state", "init",   "rule",    "schema",  "formula", "assert"};

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

struct DocLexer {
  std::string text;
  std::size_t pos = 0;

  explicit DocLexer(std::string t) : text(std::move(t)) {
    // strip comments up front, keeping newlines for line numbering
    bool comment = false;
    for (char& c : text) {
      if (c == '#') comment = true;
      if (c == '\n') comment = false;
      if (comment) c = ' ';
    }
  }

  std::size_t line_of(std::size_t at) const {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<long>(at), '\n'));
  }
  std::size_t line() const { return line_of(pos); }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  std::string peek() {
    skip_ws();
    if (pos >= text.size()) return "";
    const char c = text[pos];
    if (ident_char(c)) {
      std::size_t end = pos;
      while (end < text.size() && ident_char(text[end])) ++end;
      return text.substr(pos, end - pos);
    }
    auto starts = [&](const char* s) {
      return text.compare(pos, std::char_traits<char>::length(s), s) == 0;
    };
    if (starts("-->")) return "-->";
    if (starts("--")) return "--";
    if (starts("...")) return "...";
    if (starts("..")) return "..";
    if (starts("!=")) return "!=";
    return std::string(1, c);
  }

  std::string next() {
    const std::string t = peek();
    pos += t.size();
    return t;
  }

  bool accept(const std::string& tok) {
    if (peek() != tok) return false;
    next();
    return true;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  // reads the raw remainder of the current line
  std::string rest_of_line() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < text.size() && text[end] != '\n') ++end;
    std::string out = text.substr(pos, end - pos);
    pos = end;
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back())))
      out.pop_back();
    return out;
  }

  // reads free-form text up to (not including) a colon
  std::string up_to_colon() {
    skip_ws();
    std::size_t end = pos;
    while (end < text.size() && text[end] != ':' && text[end] != '\n') ++end;
    std::string out = text.substr(pos, end - pos);
    pos = end;
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back())))
      out.pop_back();
    return out;
  }
};

struct LoadFailure {
  std::string message;
};

// Either a concrete cookie store or the row ellipsis {...}.
struct StoreAlt {
  bool ellipsis = false;
  CookieSet store;
};

struct DocParser {
  DocLexer lex;
  SpecDocument doc;
  std::vector<Diagnostic> diags;

  explicit DocParser(const std::string& text) : lex(text) {}

  void error_here(const std::string& msg) { diags.push_back({lex.line(), msg}); }

  [[noreturn]] void bail(const std::string& msg) { throw LoadFailure{msg}; }

  std::string expect_ident(const std::string& what) {
    const std::string t = lex.next();
    if (t.empty() || !DocLexer::ident_char(t[0]))
      bail("expected " + what + " but found '" + t + "'");
    return t;
  }

  void expect(const std::string& tok, const std::string& what) {
    if (!lex.accept(tok)) bail("expected " + what + " but found '" + lex.peek() + "'");
  }

  void synchronize() {
    while (!lex.at_end()) {
      const std::string t = lex.peek();
      if (kTopKeywords.count(t) || t == "}") return;
      lex.next();
    }
  }

  bool is_declared_constant(const std::string& name) const {
    auto in = [&name](const std::vector<std::string>& v) {
      return std::find(v.begin(), v.end(), name) != v.end();
    };
    if (in(doc.cookies) || in(doc.urls)) return true;
    for (const BodyDecl& b : doc.bodies)
      if (!b.parameterized && b.name == name) return true;
    for (const DomainDecl& d : doc.domains) {
      if (!d.indexed) {
        if (std::find(d.elements.begin(), d.elements.end(), name) != d.elements.end())
          return true;
      } else if (name.size() > d.prefix.size() &&
                 name.compare(0, d.prefix.size(), d.prefix) == 0 &&
                 all_digits(name.substr(d.prefix.size()))) {
        return true;
      }
    }
    return false;
  }

  // --- terms in rule patterns -------------------------------------------

  Term parse_term(bool tagged) {
    Term t = parse_term_primary(tagged);
    while (lex.peek() == "+") {
      lex.next();
      const std::string nxt = lex.peek();
      if (nxt == "{") {
        Term rhs = parse_set_term(tagged);
        t = Term::composite(fn::set_union, {t, rhs});
      } else if (all_digits(nxt)) {
        lex.next();
        if (nxt != "1") bail("only +1 successor updates are supported");
        t = Term::composite(fn::succ, {t});
      } else {
        bail("expected 1 or a set literal after '+'");
      }
    }
    return t;
  }

  // splits a trailing _s / _i / _i<digits> tag from an identifier
  static std::pair<std::string, SideTag> split_tag(const std::string& ident) {
    const std::size_t us = ident.rfind('_');
    if (us == std::string::npos || us == 0) return {ident, SideTag::none()};
    const std::string suffix = ident.substr(us + 1);
    if (suffix == "s") return {ident.substr(0, us), SideTag::server()};
    if (suffix == "i") return {ident.substr(0, us), SideTag::client()};
    if (suffix.size() > 1 && suffix[0] == 'i' && all_digits(suffix.substr(1)))
      return {ident.substr(0, us), SideTag::client(std::stoi(suffix.substr(1)))};
    return {ident, SideTag::none()};
  }

  SideTag accept_tag_suffix() {
    // a tag after ')' appears as its own _s / _i token
    const std::string t = lex.peek();
    if (t == "_s" || t == "_i") {
      lex.next();
      return t == "_s" ? SideTag::server() : SideTag::client();
    }
    if (t.size() > 2 && t[0] == '_' && t[1] == 'i' && all_digits(t.substr(2))) {
      lex.next();
      return SideTag::client(std::stoi(t.substr(2)));
    }
    return SideTag::none();
  }

  Term parse_term_primary(bool tagged) {
    const std::string tok = lex.peek();
    if (tok == "{") return parse_set_term(tagged);
    if (tok == "(") {
      lex.next();
      Term inner = parse_term(tagged);
      expect(")", "')'");
      if (tagged) {
        const SideTag tag = accept_tag_suffix();
        if (!tag.is_none()) return inner.with_tag(tag);
      }
      return inner;
    }
    lex.next();
    if (tok.empty() || !DocLexer::ident_char(tok[0]))
      bail("expected a term but found '" + tok + "'");
    if (all_digits(tok)) return Term::nat(std::stoull(tok));
    if (tok == "eps") return Term::epsilon();

    std::string name = tok;
    SideTag tag = SideTag::none();
    if (tagged) {
      auto [base, t] = split_tag(tok);
      if (!t.is_none() && !is_declared_constant(tok)) {
        name = base;
        tag = t;
      }
    }
    if (lex.peek() == "(") {
      lex.next();
      std::vector<Term> args;
      if (!lex.accept(")")) {
        while (true) {
          args.push_back(parse_term(tagged));
          if (lex.accept(")")) break;
          expect(",", "',' between arguments");
        }
      }
      SideTag ctag = tag;
      if (tagged && ctag.is_none()) ctag = accept_tag_suffix();
      return Term::composite(name, std::move(args), ctag);
    }
    if (is_declared_constant(name) && tag.is_none()) return Term::constant(name);
    return Term::variable(name, tag);
  }

  Term parse_set_term(bool tagged) {
    expect("{", "'{'");
    if (lex.accept("}")) return Term::set({});
    std::vector<Term> elems;
    while (true) {
      elems.push_back(parse_term(tagged));
      if (lex.accept("}")) break;
      expect(",", "',' between set elements");
    }
    bool ground = true;
    std::vector<std::string> names;
    for (const Term& e : elems) {
      if (e.kind() == Term::Kind::Constant) {
        names.push_back(e.name());
      } else {
        ground = false;
        break;
      }
    }
    if (ground) return Term::set(std::move(names));
    return Term::composite(fn::make_set, std::move(elems));
  }

  // --- cookie stores -------------------------------------------------------

  StoreAlt parse_store_pattern() {
    expect("{", "a cookie store");
    StoreAlt out;
    if (lex.accept("...")) {
      out.ellipsis = true;
      expect("}", "'}' closing the store");
      return out;
    }
    if (lex.accept("}")) return out;
    while (true) {
      out.store.insert(expect_ident("a cookie name"));
      if (lex.accept("}")) break;
      expect(",", "',' between cookies");
    }
    return out;
  }

  SignedCookies parse_signed_set() {
    expect("{", "a signed cookie set");
    SignedCookies out;
    if (lex.accept("}")) return out;
    while (true) {
      if (lex.accept("+")) {
        out.add.insert(expect_ident("a cookie name"));
      } else if (lex.accept("-")) {
        out.remove.insert(expect_ident("a cookie name"));
      } else {
        bail("signed cookies must carry + or -");
      }
      if (lex.accept("}")) break;
      expect(",", "',' between signed cookies");
    }
    return out;
  }

  // --- state patterns ------------------------------------------------------

  struct StatePat {
    std::optional<StoreAlt> browser;
    std::optional<NamedTuple> tuple;  // side resolved later
  };

  StatePat parse_state_pattern() {
    StatePat out;
    const std::string tok = lex.peek();
    if (tok == "{") {
      out.browser = parse_store_pattern();
      return out;
    }
    NamedTuple tuple;
    if (tok != "(") tuple.name = expect_ident("a state tuple");
    expect("(", "'(' opening the state tuple");
    if (!lex.accept(")")) {
      while (true) {
        tuple.elems.push_back(parse_term(false));
        if (lex.accept(")")) break;
        expect(",", "',' between state fields");
      }
    }
    out.tuple = std::move(tuple);
    return out;
  }

  // --- statements ----------------------------------------------------------

  void parse_document() {
    while (!lex.at_end()) {
      const std::size_t at = lex.pos;
      try {
        statement();
      } catch (const LoadFailure& f) {
        diags.push_back({lex.line(), f.message});
        if (lex.pos == at) lex.next();
        synchronize();
      }
    }
  }

  void statement() {
    const std::string kw = lex.next();
    if (kw == "spec") {
      doc.name = expect_ident("the specification name");
    } else if (kw == "param") {
      const std::string name = expect_ident("a parameter name");
      expect("=", "'=' after the parameter name");
      const std::string v = lex.next();
      if (!all_digits(v)) bail("parameter values must be integers");
      doc.params.emplace_back(name, std::stoll(v));
    } else if (kw == "cookies") {
      parse_name_list(doc.cookies);
    } else if (kw == "urls") {
      parse_name_list(doc.urls);
    } else if (kw == "bodies") {
      parse_bodies();
    } else if (kw == "domain") {
      parse_domain();
    } else if (kw == "global") {
      parse_global();
    } else if (kw == "state") {
      parse_state_decl();
    } else if (kw == "init") {
      parse_init();
    } else if (kw == "rule") {
      parse_rule_statement(nullptr);
    } else if (kw == "schema") {
      parse_schema();
    } else if (kw == "formula") {
      parse_formula_decl();
    } else if (kw == "assert") {
      parse_assert();
    } else {
      bail("unknown keyword '" + kw + "'");
    }
  }

  void parse_name_list(std::vector<std::string>& out) {
    expect("{", "'{'");
    while (!lex.accept("}")) out.push_back(expect_ident("a name"));
  }

  void parse_bodies() {
    expect("{", "'{'");
    while (!lex.accept("}")) {
      BodyDecl b;
      b.name = expect_ident("a body name");
      if (lex.accept("(")) {
        expect("nat", "'nat' as the body parameter type");
        expect(")", "')'");
        b.parameterized = true;
      }
      doc.bodies.push_back(std::move(b));
    }
  }

  void parse_domain() {
    DomainDecl d;
    d.name = expect_ident("a domain name");
    expect("=", "'=' after the domain name");
    if (lex.accept("{")) {
      while (!lex.accept("}")) d.elements.push_back(expect_ident("a domain element"));
    } else {
      d.indexed = true;
      d.prefix = expect_ident("an element prefix");
      expect("[", "'[' opening the index range");
      expect("1", "the range to start at 1");
      expect("..", "'..' in the index range");
      d.count = lex.next();
      if (!all_digits(d.count) && !DocLexer::ident_char(d.count[0]))
        bail("the range bound must be an integer or parameter");
      expect("]", "']' closing the index range");
    }
    doc.domains.push_back(std::move(d));
  }

  void parse_global() {
    GlobalDecl g;
    g.name = expect_ident("a global constant name");
    expect(":", "':' after the global name");
    expect("nat", "'nat' as the global type");
    if (lex.accept("=")) {
      NumExpr e;
      const std::string first = lex.next();
      if (all_digits(first)) {
        e.offset = std::stoll(first);
      } else if (DocLexer::ident_char(first[0])) {
        e.ref = first;
      } else {
        bail("expected an integer or parameter");
      }
      if (lex.peek() == "+" || lex.peek() == "-") {
        const bool plus = lex.next() == "+";
        const std::string n = lex.next();
        if (!all_digits(n)) bail("expected an integer offset");
        e.offset += plus ? std::stoll(n) : -std::stoll(n);
      }
      g.value = e;
    }
    doc.globals.push_back(std::move(g));
  }

  void parse_state_decl() {
    const std::string comp = expect_ident("browser, client or server");
    if (comp == "browser") {
      doc.shape.browser_var = expect_ident("the store variable name");
      return;
    }
    if (comp != "client" && comp != "server")
      bail("state component must be browser, client or server");
    TupleDecl decl;
    decl.declared = true;
    if (lex.peek() != "(") decl.name = expect_ident("the tuple name");
    expect("(", "'(' opening the field list");
    if (!lex.accept(")")) {
      while (true) {
        FieldDecl f;
        f.name = expect_ident("a field name");
        if (lex.accept(":")) {
          const std::string ty = lex.next();
          if (ty == "nat") {
            f.type = TypedVariable::Type::Nat;
          } else if (ty == "set") {
            expect("of", "'of' after set");
            f.type = TypedVariable::Type::SetOf;
            f.domain = expect_ident("a domain name");
          } else if (ty == "term") {
            f.type = TypedVariable::Type::Symbolic;
          } else {
            bail("unknown field type '" + ty + "'");
          }
        }
        decl.fields.push_back(std::move(f));
        if (lex.accept(")")) break;
        expect(",", "',' between fields");
      }
    }
    (comp == "client" ? doc.shape.client : doc.shape.server) = std::move(decl);
  }

  void parse_init() {
    const std::string comp = expect_ident("browser, client or server");
    if (comp == "browser") {
      StoreAlt s = parse_store_pattern();
      if (s.ellipsis) bail("the initial store must be concrete");
      doc.init_browser = s.store;
      return;
    }
    if (comp != "client" && comp != "server")
      bail("init component must be browser, client or server");
    StatePat pat = parse_state_pattern();
    if (!pat.tuple) bail("expected a state tuple");
    for (Term& e : pat.tuple->elems) {
      e = reduce_term(e);
      if (!is_concrete_value(e))
        bail("initial state fields must be concrete, got " + render(e));
    }
    (comp == "client" ? doc.init_client : doc.init_server) = std::move(*pat.tuple);
  }

  // --- rules ----------------------------------------------------------------

  void parse_rule_statement(SchemaDecl* schema) {
    std::string header = lex.up_to_colon();
    expect(":", "':' after the rule name");
    RuleSide side = RuleSide::Global;
    {
      const std::size_t sp = header.find_last_of(" \t");
      if (sp != std::string::npos) {
        const std::string last = header.substr(sp + 1);
        if (last == "client" || last == "server") {
          side = last == "client" ? RuleSide::Client : RuleSide::Server;
          header = header.substr(0, sp);
          while (!header.empty() &&
                 std::isspace(static_cast<unsigned char>(header.back())))
            header.pop_back();
        }
      }
    }
    if (header.empty()) bail("rules need a name");
    parse_rule_body(header, side, schema);
  }

  void parse_rule_body(const std::string& name, RuleSide side, SchemaDecl* schema) {
    StatePat from = parse_state_pattern();
    expect("--", "'--' before the request");

    std::vector<StoreAlt> req_stores;
    if (from.browser) {
      req_stores.push_back(parse_store_pattern());
      while (lex.accept("|")) req_stores.push_back(parse_store_pattern());
    }
    std::vector<std::string> url_alts;
    url_alts.push_back(expect_ident("a request URL"));
    while (lex.accept("|")) url_alts.push_back(expect_ident("a request URL"));
    std::vector<Term> extras;
    if (lex.accept(",")) {
      while (true) {
        extras.push_back(parse_term(false));
        if (!lex.accept(",")) break;
      }
    }

    expect("/", "'/' between the request and response");
    SignedCookies signed_cookies;
    if (from.browser) signed_cookies = parse_signed_set();
    std::vector<Term> body;
    while (lex.peek() != "-->" && !lex.at_end()) {
      body.push_back(parse_term(false));
      if (!lex.accept(",")) break;
    }
    expect("-->", "'-->' before the final state");
    StatePat to = parse_state_pattern();

    std::vector<SideCondition> conditions;
    if (lex.accept("when")) {
      while (true) {
        conditions.push_back(parse_condition());
        if (!lex.accept(",")) break;
      }
    }

    // expand store and URL alternatives into concrete rules
    if (from.browser) {
      std::vector<StoreAlt> stores;
      if (from.browser->ellipsis) {
        if (req_stores.empty()) bail("an ellipsis state needs request stores");
        stores = req_stores;
        for (const StoreAlt& s : stores)
          if (s.ellipsis) bail("request stores must be concrete");
        if (!to.browser || !to.browser->ellipsis)
          bail("an ellipsis source state needs an ellipsis final state");
      } else {
        stores.push_back(*from.browser);
        // the request echoes the browser store
        for (const StoreAlt& s : req_stores)
          if (s.ellipsis || s.store != from.browser->store)
            bail("the request store must echo the source state");
      }
      const bool multi = stores.size() > 1 || url_alts.size() > 1;
      for (const StoreAlt& s : stores) {
        for (const std::string& url : url_alts) {
          TransitionRule r;
          r.name = name;
          if (multi) {
            r.name += "[";
            if (stores.size() > 1) r.name += render(s.store) + " ";
            r.name += url + "]";
          }
          r.side = side;
          r.from.browser = s.store;
          r.request.cookies = s.store;
          r.request.url = url;
          r.request.extras = extras;
          r.response.signed_cookies = signed_cookies;
          r.response.body = body;
          if (!to.browser) bail("the final state must be a cookie store");
          r.to.browser = to.browser->ellipsis
                             ? amend_cookie_store(s.store, signed_cookies)
                             : to.browser->store;
          r.conditions = conditions;
          emit_rule(std::move(r), schema);
        }
      }
      return;
    }

    // tuple-state rules
    for (const std::string& url : url_alts) {
      TransitionRule r;
      r.name = url_alts.size() > 1 ? name + "[" + url + "]" : name;
      r.side = side;
      assign_tuple(r.from, from, side);
      r.request.url = url;
      r.request.extras = extras;
      r.response.body = body;
      assign_tuple(r.to, to, side);
      r.conditions = conditions;
      emit_rule(std::move(r), schema);
    }
  }

  void assign_tuple(GlobalState& state, const StatePat& pat, RuleSide side) {
    if (!pat.tuple) bail("expected a state tuple");
    bool to_client = false;
    if (side == RuleSide::Client) {
      to_client = true;
    } else if (side == RuleSide::Server) {
      to_client = false;
    } else if (doc.shape.client.declared && !doc.shape.server.declared) {
      to_client = true;
    } else if (doc.shape.server.declared && !doc.shape.client.declared) {
      to_client = false;
    } else if (!pat.tuple->name.empty()) {
      if (pat.tuple->name == doc.shape.client.name &&
          pat.tuple->name != doc.shape.server.name)
        to_client = true;
    }
    (to_client ? state.client : state.server) = *pat.tuple;
  }

  SideCondition parse_condition() {
    SideCondition c{SideCondition::Kind::NotEqual, Term::epsilon(), Term::epsilon()};
    c.lhs = parse_term(false);
    const std::string op = lex.next();
    if (op == "in") {
      c.kind = SideCondition::Kind::In;
      c.rhs = parse_term(false);
    } else if (op == "not") {
      expect("in", "'in' after not");
      c.kind = SideCondition::Kind::NotIn;
      c.rhs = parse_term(false);
    } else if (op == "!=") {
      c.rhs = parse_term(false);
      if (c.rhs.kind() == Term::Kind::Epsilon) c.kind = SideCondition::Kind::NotEpsilon;
    } else {
      bail("unknown condition operator '" + op + "'");
    }
    return c;
  }

  void emit_rule(TransitionRule r, SchemaDecl* schema) {
    if (schema)
      schema->rules.push_back(std::move(r));
    else
      doc.rules.push_back(std::move(r));
  }

  void parse_schema() {
    SchemaDecl s;
    s.param = expect_ident("a schema parameter");
    expect("in", "'in' after the schema parameter");
    s.domain = expect_ident("a domain name");
    expect("{", "'{' opening the schema block");
    while (!lex.accept("}")) {
      const std::string kw = lex.next();
      if (kw != "rule") bail("schema blocks contain only rules");
      parse_rule_statement(&s);
    }
    doc.schemas.push_back(std::move(s));
  }

  void parse_formula_decl() {
    FormulaDecl f;
    f.name = expect_ident("a formula name");
    while (true) {
      if (lex.accept("anywhere")) {
        f.mode = EvalMode::Anywhere;
        continue;
      }
      if (lex.accept("expect")) {
        const std::string e = lex.next();
        if (e == "holds") {
          f.expect_holds = true;
        } else if (e == "fails") {
          f.expect_holds = false;
        } else {
          bail("expect must be holds or fails");
        }
        continue;
      }
      break;
    }
    expect(":", "':' before the formula");
    f.text = lex.rest_of_line();
    if (f.text.empty()) bail("formulas cannot be empty");
    doc.formulas.push_back(std::move(f));  // parsed in the validation phase
  }

  void parse_assert() {
    SlotAssertion a;
    a.name = expect_ident("an assertion name");
    expect("on", "'on' after the assertion name");
    a.command = expect_ident("a command name");
    expect(":", "':' after the command");
    const std::string side = expect_ident("client or server");
    if (side == "client") {
      a.side = RuleSide::Client;
    } else if (side == "server") {
      a.side = RuleSide::Server;
    } else {
      bail("assertions target client or server slots");
    }
    expect(".", "'.' before the field name");
    a.field = expect_ident("a field name");
    expect("is", "'is' before the expected term");
    a.expected = parse_term(true);
    doc.asserts.push_back(std::move(a));
  }

  // --- validation -----------------------------------------------------------

  void note(const std::string& msg) { diags.push_back({0, msg}); }

  void validate() {
    if (doc.name.empty()) note("the document declares no spec name");

    std::set<std::string> seen;
    for (const auto& [n, v] : doc.params) {
      (void)v;
      if (!seen.insert("param:" + n).second) note("duplicate param '" + n + "'");
    }
    for (const auto& g : doc.globals)
      if (!seen.insert("global:" + g.name).second)
        note("duplicate global '" + g.name + "'");
    for (const auto& d : doc.domains)
      if (!seen.insert("domain:" + d.name).second)
        note("duplicate domain '" + d.name + "'");
    for (const auto& r : doc.rules) {
      const char* side = r.side == RuleSide::Client   ? "client:"
                         : r.side == RuleSide::Server ? "server:"
                                                      : "";
      if (!seen.insert("rule:" + std::string(side) + r.name).second)
        note("duplicate rule '" + r.name + "'");
    }
    for (const auto& f : doc.formulas)
      if (!seen.insert("formula:" + f.name).second)
        note("duplicate formula '" + f.name + "'");

    for (const DomainDecl& d : doc.domains) {
      if (d.indexed && !all_digits(d.count)) {
        bool known = false;
        for (const auto& [n, v] : doc.params) {
          (void)v;
          if (n == d.count) known = true;
        }
        if (!known)
          note("domain '" + d.name + "' sizes itself by undeclared parameter '" +
               d.count + "'");
      }
    }

    for (const GlobalDecl& g : doc.globals) {
      if (!g.value || !g.value->ref) continue;
      bool known = false;
      for (const auto& [n, v] : doc.params) {
        (void)v;
        if (n == *g.value->ref) known = true;
      }
      if (!known)
        note("global '" + g.name + "' references undeclared parameter '" +
             *g.value->ref + "'");
    }

    for (const FieldDecl& f : doc.shape.client.fields) validate_field(f, "client");
    for (const FieldDecl& f : doc.shape.server.fields) validate_field(f, "server");

    for (const TransitionRule& r : doc.rules) validate_rule(r);
    for (const SchemaDecl& s : doc.schemas) {
      bool dom = false;
      for (const DomainDecl& d : doc.domains)
        if (d.name == s.domain) dom = true;
      if (!dom) note("schema parameter '" + s.param + "' ranges over undeclared domain '" +
                     s.domain + "'");
      for (const TransitionRule& r : s.rules) validate_rule(r, &s.param);
    }

    validate_inits();
    validate_formulas();
    validate_asserts();
  }

  void validate_field(const FieldDecl& f, const char* side) {
    if (f.type != TypedVariable::Type::SetOf) return;
    for (const DomainDecl& d : doc.domains)
      if (d.name == f.domain) return;
    note(std::string("field '") + f.name + "' of the " + side +
         " state uses undeclared domain '" + f.domain + "'");
  }

  static void collect_vars(const Term& t, std::set<std::string>& out) {
    if (t.is_variable()) out.insert(t.name());
    for (const Term& a : t.args()) collect_vars(a, out);
  }

  void validate_rule(const TransitionRule& r, const std::string* schema_param = nullptr) {
    if (!doc.urls.empty() &&
        std::find(doc.urls.begin(), doc.urls.end(), r.request.url) == doc.urls.end())
      note("rule '" + r.name + "' requests undeclared url '" + r.request.url + "'");

    auto check_cookies = [&](const CookieSet& s, const char* what) {
      for (const std::string& c : s)
        if (std::find(doc.cookies.begin(), doc.cookies.end(), c) == doc.cookies.end())
          note("rule '" + r.name + "' uses undeclared cookie '" + c + "' in its " + what);
    };
    if (r.from.browser) check_cookies(*r.from.browser, "source state");
    if (r.to.browser) check_cookies(*r.to.browser, "final state");
    check_cookies(r.response.signed_cookies.add, "response");
    check_cookies(r.response.signed_cookies.remove, "response");
    for (const std::string& c : r.response.signed_cookies.add)
      if (r.response.signed_cookies.remove.count(c))
        note("rule '" + r.name + "' both sets and clears cookie '" + c + "'");

    if (!doc.bodies.empty() && !r.response.body.empty()) {
      for (const Term& b : r.response.body) {
        const std::string head =
            b.kind() == Term::Kind::Composite || b.kind() == Term::Kind::Constant
                ? b.name()
                : std::string{};
        bool ok = false;
        for (const BodyDecl& d : doc.bodies) {
          if (d.name != head) continue;
          if (d.parameterized == (b.kind() == Term::Kind::Composite)) ok = true;
        }
        if (!ok)
          note("rule '" + r.name + "' responds with undeclared body " + render(b));
      }
    }

    validate_tuple_shape(r.from.client, doc.shape.client, r.name, "client");
    validate_tuple_shape(r.to.client, doc.shape.client, r.name, "client");
    validate_tuple_shape(r.from.server, doc.shape.server, r.name, "server");
    validate_tuple_shape(r.to.server, doc.shape.server, r.name, "server");

    // variable flow: client rules bind through the consumed response as
    // well, every other rule produces its response from the source binding
    std::set<std::string> binders, produced;
    auto tuple_vars = [&](const std::optional<NamedTuple>& t, std::set<std::string>& out) {
      if (!t) return;
      for (const Term& e : t->elems) collect_vars(e, out);
    };
    tuple_vars(r.from.client, binders);
    tuple_vars(r.from.server, binders);
    for (const Term& e : r.request.extras) collect_vars(e, binders);
    if (schema_param) binders.insert(*schema_param);

    std::set<std::string> response_vars;
    for (const Term& e : r.response.body) collect_vars(e, response_vars);
    if (r.side == RuleSide::Client) {
      binders.insert(response_vars.begin(), response_vars.end());
    } else {
      for (const std::string& v : response_vars)
        if (!binders.count(v))
          note("rule '" + r.name + "' responds with unbound variable '" + v + "'");
    }
    tuple_vars(r.to.client, produced);
    tuple_vars(r.to.server, produced);
    for (const SideCondition& c : r.conditions) {
      collect_vars(c.lhs, produced);
      collect_vars(c.rhs, produced);
    }
    for (const std::string& v : produced)
      if (!binders.count(v))
        note("rule '" + r.name + "' uses unbound variable '" + v + "'");
  }

  void validate_tuple_shape(const std::optional<NamedTuple>& t, const TupleDecl& decl,
                            const std::string& rule, const char* side) {
    if (!t) return;
    if (!decl.declared) {
      note("rule '" + rule + "' uses an undeclared " + std::string(side) + " state");
      return;
    }
    if (t->name != decl.name)
      note("rule '" + rule + "' names the " + std::string(side) + " tuple '" + t->name +
           "' but the declaration says '" + decl.name + "'");
    if (t->elems.size() != decl.fields.size())
      note("rule '" + rule + "' has " + std::to_string(t->elems.size()) + " " + side +
           " fields, the declaration has " + std::to_string(decl.fields.size()));
  }

  void validate_inits() {
    auto check = [&](const std::optional<NamedTuple>& init, const TupleDecl& decl,
                     const char* side) {
      if (!init) return;
      if (!decl.declared) {
        note(std::string("init declares an undeclared ") + side + " state");
        return;
      }
      if (init->elems.size() != decl.fields.size())
        note(std::string("the initial ") + side + " state arity disagrees with its shape");
    };
    check(doc.init_client, doc.shape.client, "client");
    check(doc.init_server, doc.shape.server, "server");
    if (doc.init_browser && !doc.shape.browser_var)
      note("init declares a browser store but no browser state is declared");
  }

  void validate_formulas() {
    std::map<std::string, long long> params;
    try {
      params = resolve_params(doc, {});
    } catch (const ParamError&) {
      return;
    }
    const FormulaContext ctx = formula_context(doc, params);
    for (FormulaDecl& f : doc.formulas) {
      try {
        f.ast = parse_formula(f.text, ctx);
      } catch (const ParseError& e) {
        note("formula '" + f.name + "': " + e.what() + " (at offset " +
             std::to_string(e.position) + ")");
      }
    }
  }

  void validate_asserts() {
    for (const SlotAssertion& a : doc.asserts) {
      bool client_rule = false, server_rule = false;
      for (const TransitionRule& r : doc.rules) {
        if (r.request.url != a.command) continue;
        if (r.side == RuleSide::Client) client_rule = true;
        if (r.side == RuleSide::Server) server_rule = true;
      }
      if (!client_rule || !server_rule)
        note("assertion '" + a.name + "' targets command '" + a.command +
             "' which lacks a client/server rule pair");
      const TupleDecl& decl =
          a.side == RuleSide::Client ? doc.shape.client : doc.shape.server;
      bool field = false;
      for (const FieldDecl& f : decl.fields)
        if (f.name == a.field) field = true;
      if (!field)
        note("assertion '" + a.name + "' names unknown field '" + a.field + "'");
    }
  }
};

}  // namespace

SpecError::SpecError(std::vector<Diagnostic> diags)
    : std::runtime_error([&diags] {
        std::string msg = "specification errors:";
        for (const Diagnostic& d : diags) {
          msg += "\n  ";
          if (d.line) msg += "line " + std::to_string(d.line) + ": ";
          msg += d.message;
        }
        return msg;
      }()),
      diagnostics(std::move(diags)) {}

bool SpecDocument::explorable() const {
  if (!has_init()) return false;
  for (const TransitionRule& r : rules)
    if (r.side != RuleSide::Global) return false;
  for (const SchemaDecl& s : schemas)
    for (const TransitionRule& r : s.rules)
      if (r.side != RuleSide::Global) return false;
  return true;
}

SpecDocument load_spec(const std::string& text) {
  DocParser p(text);
  p.parse_document();
  if (p.diags.empty()) p.validate();
  if (!p.diags.empty()) throw SpecError(std::move(p.diags));
  return std::move(p.doc);
}

// --- derived views -----------------------------------------------------------

std::map<std::string, long long> resolve_params(
    const SpecDocument& doc, const std::map<std::string, long long>& overrides) {
  std::map<std::string, long long> out;
  for (const auto& [name, value] : doc.params) out[name] = value;
  for (const auto& [name, value] : overrides) {
    if (!out.count(name)) throw ParamError("unknown parameter '" + name + "'");
    out[name] = value;
  }
  return out;
}

std::map<std::string, std::vector<Term>> domain_values(
    const SpecDocument& doc, const std::map<std::string, long long>& params) {
  std::map<std::string, std::vector<Term>> out;
  for (const DomainDecl& d : doc.domains) {
    std::vector<Term> values;
    if (d.indexed) {
      long long count = 0;
      if (all_digits(d.count)) {
        count = std::stoll(d.count);
      } else {
        auto it = params.find(d.count);
        if (it == params.end())
          throw ParamError("domain '" + d.name + "' needs parameter '" + d.count + "'");
        count = it->second;
      }
      for (long long i = 1; i <= count; ++i)
        values.push_back(Term::constant(d.prefix + std::to_string(i)));
    } else {
      for (const std::string& e : d.elements) values.push_back(Term::constant(e));
    }
    out.emplace(d.name, std::move(values));
  }
  return out;
}

Env base_env(const SpecDocument& doc, const std::map<std::string, long long>& params) {
  Env env;
  for (const auto& [name, value] : params) env.nums[name] = value;
  for (const GlobalDecl& g : doc.globals) {
    if (!g.value) continue;
    long long v = g.value->offset;
    if (g.value->ref) {
      auto it = env.nums.find(*g.value->ref);
      if (it == env.nums.end())
        throw ParamError("global '" + g.name + "' references unknown '" +
                         *g.value->ref + "'");
      v += it->second;
    }
    env.nums[g.name] = v;
  }
  return env;
}

std::vector<TransitionRule> concrete_rules(
    const SpecDocument& doc, const std::map<std::string, long long>& params) {
  std::vector<TransitionRule> out = doc.rules;
  const auto domains = domain_values(doc, params);
  for (const SchemaDecl& s : doc.schemas) {
    RuleSchema schema;
    auto it = domains.find(s.domain);
    if (it == domains.end())
      throw ParamError("schema domain '" + s.domain + "' is not declared");
    for (const TransitionRule& r : s.rules) {
      schema.rule = r;
      schema.params = {{s.param, it->second}};
      auto expanded = instantiate_schema(schema);
      out.insert(out.end(), expanded.begin(), expanded.end());
    }
  }
  return out;
}

GlobalState initial_state(const SpecDocument& doc) {
  GlobalState init;
  init.browser = doc.init_browser;
  if (doc.shape.browser_var && !init.browser) init.browser = CookieSet{};
  init.client = doc.init_client;
  init.server = doc.init_server;
  return init;
}

StateShape state_shape(const SpecDocument& doc,
                       const std::map<std::string, long long>& params) {
  StateShape shape;
  const auto domains = domain_values(doc, params);
  shape.browser_var = doc.shape.browser_var;
  shape.browser_domain = doc.cookies;
  auto fields = [&](const TupleDecl& decl) {
    std::vector<TypedVariable> out;
    for (const FieldDecl& f : decl.fields) {
      TypedVariable v;
      v.name = f.name;
      v.type = f.type;
      if (f.type == TypedVariable::Type::SetOf) {
        auto it = domains.find(f.domain);
        if (it != domains.end())
          for (const Term& t : it->second) v.domain.push_back(t.name());
      }
      out.push_back(std::move(v));
    }
    return out;
  };
  if (doc.shape.client.declared) {
    shape.client_shape = NamedTuple{doc.shape.client.name, {}};
    shape.client_fields = fields(doc.shape.client);
  }
  if (doc.shape.server.declared) {
    shape.server_shape = NamedTuple{doc.shape.server.name, {}};
    shape.server_fields = fields(doc.shape.server);
  }
  shape.url_in_token = doc.urls.size() > 1;
  return shape;
}

FormulaContext formula_context(const SpecDocument& doc,
                               const std::map<std::string, long long>& params) {
  FormulaContext ctx;
  if (doc.shape.browser_var) {
    TypedVariable v;
    v.name = *doc.shape.browser_var;
    v.type = TypedVariable::Type::SetOf;
    v.domain = doc.cookies;
    ctx.variables.emplace(v.name, std::move(v));
  }
  auto add_fields = [&ctx](const TupleDecl& decl) {
    for (const FieldDecl& f : decl.fields) {
      TypedVariable v;
      v.name = f.name;
      v.type = f.type;
      ctx.variables.emplace(v.name, std::move(v));
    }
  };
  add_fields(doc.shape.client);
  add_fields(doc.shape.server);

  for (const std::string& c : doc.cookies) ctx.constants.insert(c);
  for (const std::string& u : doc.urls) ctx.constants.insert(u);
  for (const BodyDecl& b : doc.bodies)
    if (!b.parameterized) ctx.constants.insert(b.name);
  for (const auto& [name, values] : domain_values(doc, params)) {
    ctx.domains.insert(name);
    for (const Term& v : values) ctx.constants.insert(v.name());
  }
  for (const auto& [name, value] : params) {
    (void)value;
    ctx.globals.insert(name);
  }
  for (const GlobalDecl& g : doc.globals) ctx.globals.insert(g.name);

  std::vector<std::string> set_vars;
  for (const auto& [name, v] : ctx.variables)
    if (v.type == TypedVariable::Type::SetOf) set_vars.push_back(name);
  if (set_vars.size() == 1) ctx.single_set_var = set_vars.front();
  return ctx;
}

std::vector<std::string> field_names(const SpecDocument& doc, RuleSide side) {
  const TupleDecl& decl = side == RuleSide::Client ? doc.shape.client : doc.shape.server;
  std::vector<std::string> out;
  for (const FieldDecl& f : decl.fields) out.push_back(f.name);
  return out;
}

// --- canonical rendering -------------------------------------------------------

namespace {

std::string dsl_tuple(const NamedTuple& t) {
  std::string out = t.name + "(";
  for (std::size_t i = 0; i < t.elems.size(); ++i) {
    if (i) out += ",";
    out += render(t.elems[i]);
  }
  return out + ")";
}

std::string dsl_state(const GlobalState& s) {
  if (s.browser) return render(*s.browser);
  if (s.client) return dsl_tuple(*s.client);
  if (s.server) return dsl_tuple(*s.server);
  return "()";
}

std::string dsl_rule(const TransitionRule& r) {
  std::ostringstream os;
  os << "rule " << r.name;
  if (r.side == RuleSide::Client) os << " client";
  if (r.side == RuleSide::Server) os << " server";
  os << ": " << dsl_state(r.from) << " -- ";
  if (r.request.cookies) os << render(*r.request.cookies) << ' ';
  os << r.request.url;
  for (const Term& e : r.request.extras) os << ", " << render(e);
  os << " / ";
  if (r.request.cookies) os << render(r.response.signed_cookies) << ' ';
  for (std::size_t i = 0; i < r.response.body.size(); ++i) {
    if (i) os << ", ";
    os << render(r.response.body[i]);
  }
  if (!r.response.body.empty()) os << ' ';
  os << "--> " << dsl_state(r.to);
  if (!r.conditions.empty()) {
    os << " when ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
      if (i) os << ", ";
      os << render(r.conditions[i]);
    }
  }
  return os.str();
}

}  // namespace

std::string render_spec(const SpecDocument& doc) {
  std::ostringstream os;
  os << "spec " << doc.name << "\n\n";
  for (const auto& [name, value] : doc.params)
    os << "param " << name << " = " << value << "\n";
  auto list = [&os](const char* kw, const std::vector<std::string>& items) {
    if (items.empty()) return;
    os << kw << " {";
    for (const std::string& i : items) os << ' ' << i;
    os << " }\n";
  };
  list("cookies", doc.cookies);
  list("urls", doc.urls);
  if (!doc.bodies.empty()) {
    os << "bodies {";
    for (const BodyDecl& b : doc.bodies) {
      os << ' ' << b.name;
      if (b.parameterized) os << "(nat)";
    }
    os << " }\n";
  }
  for (const DomainDecl& d : doc.domains) {
    os << "domain " << d.name << " = ";
    if (d.indexed) {
      os << d.prefix << "[1.." << d.count << "]";
    } else {
      os << "{";
      for (const std::string& e : d.elements) os << ' ' << e;
      os << " }";
    }
    os << "\n";
  }
  for (const GlobalDecl& g : doc.globals) {
    os << "global " << g.name << " : nat";
    if (g.value) os << " = " << render(*g.value);
    os << "\n";
  }
  os << "\n";
  if (doc.shape.browser_var) os << "state browser " << *doc.shape.browser_var << "\n";
  auto state_decl = [&os](const TupleDecl& decl, const char* side) {
    if (!decl.declared) return;
    os << "state " << side << ' ' << decl.name << '(';
    for (std::size_t i = 0; i < decl.fields.size(); ++i) {
      if (i) os << ", ";
      os << decl.fields[i].name;
      switch (decl.fields[i].type) {
        case TypedVariable::Type::Nat:
          os << ": nat";
          break;
        case TypedVariable::Type::SetOf:
          os << ": set of " << decl.fields[i].domain;
          break;
        case TypedVariable::Type::Symbolic:
          break;
      }
    }
    os << ")\n";
  };
  state_decl(doc.shape.client, "client");
  state_decl(doc.shape.server, "server");
  if (doc.init_browser) os << "init browser " << render(*doc.init_browser) << "\n";
  if (doc.init_client) os << "init client " << dsl_tuple(*doc.init_client) << "\n";
  if (doc.init_server) os << "init server " << dsl_tuple(*doc.init_server) << "\n";
  os << "\n";
  for (const TransitionRule& r : doc.rules) os << dsl_rule(r) << "\n";
  for (const SchemaDecl& s : doc.schemas) {
    os << "schema " << s.param << " in " << s.domain << " {\n";
    for (const TransitionRule& r : s.rules) os << "  " << dsl_rule(r) << "\n";
    os << "}\n";
  }
  os << "\n";
  for (const FormulaDecl& f : doc.formulas) {
    os << "formula " << f.name;
    if (f.mode == EvalMode::Anywhere) os << " anywhere";
    os << " expect " << (f.expect_holds ? "holds" : "fails") << ": "
       << render(f.ast) << "\n";
  }
  for (const SlotAssertion& a : doc.asserts) {
    os << "assert " << a.name << " on " << a.command << ": "
       << (a.side == RuleSide::Client ? "client" : "server") << '.' << a.field
       << " is " << render(a.expected) << "\n";
  }
  return os.str();
}

}  // namespace alspec
