#include "alspec/term.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace alspec {

int natural_compare(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
      while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
      // compare digit runs numerically: strip leading zeros, then by length
      std::size_t ia = i, jb = j;
      while (ia < i2 - 1 && a[ia] == '0') ++ia;
      while (jb < j2 - 1 && b[jb] == '0') ++jb;
      const std::size_t la = i2 - ia, lb = j2 - jb;
      if (la != lb) return la < lb ? -1 : 1;
      const int c = a.compare(ia, la, b, jb, lb);
      if (c != 0) return c < 0 ? -1 : 1;
      i = i2;
      j = j2;
    } else if (da != db) {
      return da ? -1 : 1;  // digit runs sort before letters
    } else {
      if (a[i] != b[j]) return a[i] < b[j] ? -1 : 1;
      ++i;
      ++j;
    }
  }
  if (i < a.size()) return 1;
  if (j < b.size()) return -1;
  return 0;
}

std::string SideTag::suffix() const {
  switch (kind) {
    case TagKind::None:
      return "";
    case TagKind::Server:
      return "_s";
    case TagKind::Client:
      return client_index == 0 ? "_i" : "_i" + std::to_string(client_index);
  }
  return "";
}

Term Term::variable(std::string name, SideTag tag) {
  Term t;
  t.kind_ = Kind::Variable;
  t.name_ = std::move(name);
  t.tag_ = tag;
  return t;
}

Term Term::constant(std::string name) {
  Term t;
  t.kind_ = Kind::Constant;
  t.name_ = std::move(name);
  return t;
}

Term Term::epsilon() { return Term{}; }

Term Term::composite(std::string fn, std::vector<Term> args, SideTag tag) {
  Term t;
  t.kind_ = Kind::Composite;
  t.name_ = std::move(fn);
  t.args_ = std::move(args);
  t.tag_ = tag;
  return t;
}

Term Term::nat(std::uint64_t value) {
  Term t;
  t.kind_ = Kind::Nat;
  t.nat_ = value;
  return t;
}

Term Term::set(std::vector<std::string> elems) {
  Term t;
  t.kind_ = Kind::Set;
  std::sort(elems.begin(), elems.end(), NaturalLess{});
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  t.elems_ = std::move(elems);
  return t;
}

bool Term::is_ground() const {
  if (kind_ == Kind::Variable) return false;
  for (const Term& a : args_)
    if (!a.is_ground()) return false;
  return true;
}

Term Term::with_tag(const SideTag& tag) const {
  Term t = *this;
  t.tag_ = tag;
  return t;
}

int Term::compare(const Term& other) const {
  if (kind_ != other.kind_)
    return static_cast<int>(kind_) < static_cast<int>(other.kind_) ? -1 : 1;
  switch (kind_) {
    case Kind::Epsilon:
      return 0;
    case Kind::Nat:
      return nat_ < other.nat_ ? -1 : (nat_ > other.nat_ ? 1 : 0);
    case Kind::Constant:
      return natural_compare(name_, other.name_);
    case Kind::Set: {
      if (elems_.size() != other.elems_.size())
        return elems_.size() < other.elems_.size() ? -1 : 1;
      for (std::size_t i = 0; i < elems_.size(); ++i) {
        const int c = natural_compare(elems_[i], other.elems_[i]);
        if (c != 0) return c;
      }
      return 0;
    }
    case Kind::Variable:
    case Kind::Composite: {
      const int c = natural_compare(name_, other.name_);
      if (c != 0) return c;
      if (tag_ != other.tag_) return tag_ < other.tag_ ? -1 : 1;
      if (args_.size() != other.args_.size())
        return args_.size() < other.args_.size() ? -1 : 1;
      for (std::size_t i = 0; i < args_.size(); ++i) {
        const int a = args_[i].compare(other.args_[i]);
        if (a != 0) return a;
      }
      return 0;
    }
  }
  return 0;
}

bool Binding::operator==(const Binding& o) const {
  if (is_null() != o.is_null()) return false;
  if (is_null()) return true;
  return *variable == *o.variable && replacement == o.replacement;
}

const Term* Substitution::lookup(const Term& var) const {
  for (const Binding& b : bindings) {
    if (b.is_null()) continue;
    if (b.variable->name() == var.name() && b.variable->tag() == var.tag())
      return &b.replacement;
  }
  return nullptr;
}

std::optional<Binding> match_elements(const Term& e, const Term& e2, MatchDiag* diag) {
  if (diag) *diag = MatchDiag::Ok;
  if (e.is_variable()) return Binding::of(e, e2);  // v/v', v/c', v/t'
  if (e.is_constant_like() && e2.is_constant_like() && e == e2)
    return Binding::null();  // match(c,c) = ∅
  if (diag) *diag = MatchDiag::NoCase;
  return std::nullopt;
}

std::optional<Substitution> match_tuples(const TermTuple& t, const TermTuple& t2,
                                         MatchDiag* diag) {
  if (diag) *diag = MatchDiag::Ok;
  if (t.size() != t2.size()) {
    // the structural recursion would reach ((),(e...)) or ((e...),()),
    // for which no case exists
    if (diag) *diag = MatchDiag::LengthMismatch;
    return std::nullopt;
  }
  Substitution out;
  // recursion unrolled front-to-back; bindings keep production order
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto b = match_elements(t[i], t2[i], diag);
    if (!b) return std::nullopt;
    bool duplicate = false;
    for (const Binding& prev : out.bindings) {
      if (prev == *b) {
        duplicate = true;
        break;
      }
      if (!prev.is_null() && !b->is_null() &&
          prev.variable->name() == b->variable->name() &&
          prev.variable->tag() == b->variable->tag()) {
        if (diag) *diag = MatchDiag::Conflict;
        return std::nullopt;
      }
    }
    if (!duplicate) out.bindings.push_back(std::move(*b));
  }
  return out;
}

Term apply_substitution(const Term& t, const Substitution& s) {
  switch (t.kind()) {
    case Term::Kind::Variable: {
      if (const Term* r = s.lookup(t)) return *r;
      return t;
    }
    case Term::Kind::Composite: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(apply_substitution(a, s));
      return Term::composite(t.name(), std::move(args), t.tag());
    }
    default:
      return t;
  }
}

TermTuple apply_substitution(const TermTuple& t, const Substitution& s) {
  TermTuple out;
  out.reserve(t.size());
  for (const Term& e : t) out.push_back(apply_substitution(e, s));
  return out;
}

Term compose_apply(const Term& t, const std::vector<Substitution>& subs) {
  Term out = t;
  for (auto it = subs.rbegin(); it != subs.rend(); ++it)
    out = apply_substitution(out, *it);
  return out;
}

namespace {

void render_term(std::ostream& os, const Term& t, const SideTag* home) {
  // home == nullptr renders all tags; otherwise home tags are suppressed
  // until a foreign-tagged subterm is entered, which renders in full.
  const bool suppressed = home && !t.tag().is_none() && t.tag() == *home;
  const SideTag* inner_home = home;
  if (home && !t.tag().is_none() && t.tag() != *home) inner_home = nullptr;

  switch (t.kind()) {
    case Term::Kind::Epsilon:
      os << "eps";
      return;
    case Term::Kind::Nat:
      os << t.nat_value();
      return;
    case Term::Kind::Constant:
      os << t.name();
      return;
    case Term::Kind::Set: {
      os << '{';
      bool first = true;
      for (const std::string& e : t.set_elems()) {
        if (!first) os << ',';
        first = false;
        os << e;
      }
      os << '}';
      return;
    }
    case Term::Kind::Variable:
      os << t.name();
      if (!suppressed) os << t.tag().suffix();
      return;
    case Term::Kind::Composite: {
      const std::string tag = suppressed ? "" : t.tag().suffix();
      if (t.name() == fn::succ && t.args().size() == 1) {
        if (!tag.empty()) os << '(';
        render_term(os, t.args()[0], inner_home);
        os << "+1";
        if (!tag.empty()) os << ')' << tag;
        return;
      }
      if (t.name() == fn::set_union && t.args().size() == 2) {
        if (!tag.empty()) os << '(';
        render_term(os, t.args()[0], inner_home);
        os << '+';
        render_term(os, t.args()[1], inner_home);
        if (!tag.empty()) os << ')' << tag;
        return;
      }
      if (t.name() == fn::make_set) {
        os << '{';
        bool first = true;
        for (const Term& a : t.args()) {
          if (!first) os << ',';
          first = false;
          render_term(os, a, inner_home);
        }
        os << '}';
        if (!tag.empty()) os << tag;
        return;
      }
      os << t.name() << '(';
      bool first = true;
      for (const Term& a : t.args()) {
        if (!first) os << ',';
        first = false;
        render_term(os, a, inner_home);
      }
      os << ')' << tag;
      return;
    }
  }
}

}  // namespace

std::string render(const Term& t) {
  std::ostringstream os;
  render_term(os, t, nullptr);
  return os.str();
}

std::string render(const TermTuple& t) {
  std::ostringstream os;
  os << '(';
  bool first = true;
  for (const Term& e : t) {
    if (!first) os << ',';
    first = false;
    render_term(os, e, nullptr);
  }
  os << ')';
  return os.str();
}

std::string render(const Binding& b) {
  if (b.is_null()) return "∅";
  return render(*b.variable) + "/" + render(b.replacement);
}

std::string render(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const Binding& b : s.bindings) {
    if (!first) out += ", ";
    first = false;
    out += render(b);
  }
  out += "}";
  return out;
}

std::string render_home(const Term& t, const SideTag& home) {
  std::ostringstream os;
  render_term(os, t, &home);
  return os.str();
}

bool equal_up_to_home_tag(const Term& a, const Term& b, const SideTag& home) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Epsilon:
    case Term::Kind::Nat:
    case Term::Kind::Constant:
    case Term::Kind::Set:
      return a == b;
    case Term::Kind::Variable:
    case Term::Kind::Composite: {
      if (a.name() != b.name()) return false;
      const bool tags_ok =
          a.tag() == b.tag() ||
          (a.tag() == home && b.tag().is_none()) ||
          (a.tag().is_none() && b.tag() == home);
      if (!tags_ok) return false;
      if (a.args().size() != b.args().size()) return false;
      for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!equal_up_to_home_tag(a.args()[i], b.args()[i], home)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace alspec
