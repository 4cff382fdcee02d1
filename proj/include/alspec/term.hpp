#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Terms, tuples of terms, the partial matching function and substitution
// application. Everything here is value-semantic and deterministic.

namespace alspec {

// Natural ordering for identifiers: runs of digits compare numerically,
// so A2 < A10 and 2 < 2v < w.
int natural_compare(const std::string& a, const std::string& b);

struct NaturalLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return natural_compare(a, b) < 0;
  }
};

enum class TagKind : unsigned char { None, Client, Server };

// Side provenance of a variable or composite. The client tag carries an
// index; index 0 is the schematic client subscript and renders "_i",
// concrete clients render "_i1", "_i2", ...
struct SideTag {
  TagKind kind = TagKind::None;
  int client_index = 0;

  static SideTag none() { return {}; }
  static SideTag server() { return {TagKind::Server, 0}; }
  static SideTag client(int index = 0) { return {TagKind::Client, index}; }

  bool is_none() const { return kind == TagKind::None; }
  std::string suffix() const;

  friend auto operator<=>(const SideTag&, const SideTag&) = default;
};

// Reserved function symbols with built-in evaluation semantics. All other
// function symbols are uninterpreted.
namespace fn {
inline constexpr const char* succ = "#succ";       // x+1 on naturals
inline constexpr const char* set_union = "#union"; // finite set union
inline constexpr const char* make_set = "#mkset";  // {t1,...,tn} with non-ground elements
}  // namespace fn

class Term {
 public:
  enum class Kind : unsigned char { Variable, Constant, Epsilon, Composite, Nat, Set };

  Term() = default;  // epsilon

  static Term variable(std::string name, SideTag tag = SideTag::none());
  static Term constant(std::string name);
  static Term epsilon();
  static Term composite(std::string fn, std::vector<Term> args,
                        SideTag tag = SideTag::none());
  static Term nat(std::uint64_t value);
  static Term set(std::vector<std::string> elems);  // sorted, deduplicated

  Kind kind() const { return kind_; }
  bool is_variable() const { return kind_ == Kind::Variable; }
  bool is_constant_like() const {
    return kind_ == Kind::Constant || kind_ == Kind::Epsilon ||
           kind_ == Kind::Nat || kind_ == Kind::Set;
  }
  bool is_composite() const { return kind_ == Kind::Composite; }

  const std::string& name() const { return name_; }
  const SideTag& tag() const { return tag_; }
  std::uint64_t nat_value() const { return nat_; }
  const std::vector<std::string>& set_elems() const { return elems_; }
  const std::vector<Term>& args() const { return args_; }

  bool is_ground() const;  // contains no variables
  Term with_tag(const SideTag& tag) const;

  int compare(const Term& other) const;
  bool operator==(const Term& o) const { return compare(o) == 0; }
  bool operator!=(const Term& o) const { return compare(o) != 0; }
  bool operator<(const Term& o) const { return compare(o) < 0; }

 private:
  Kind kind_ = Kind::Epsilon;
  SideTag tag_;
  std::string name_;
  std::uint64_t nat_ = 0;
  std::vector<std::string> elems_;
  std::vector<Term> args_;
};

using TermTuple = std::vector<Term>;

// One binding of the matching function: either the null binding (written
// ∅, semantically identity) or variable/replacement.
struct Binding {
  std::optional<Term> variable;  // nullopt for the null binding
  Term replacement;

  static Binding null() { return Binding{}; }
  static Binding of(Term var, Term repl) {
    return Binding{std::move(var), std::move(repl)};
  }
  bool is_null() const { return !variable.has_value(); }

  bool operator==(const Binding& o) const;
};

// Ordered collection of bindings. Order within one substitution is the
// order matching produced them; non-null bindings have unique variable
// keys (name and tag).
struct Substitution {
  std::vector<Binding> bindings;

  bool empty() const { return bindings.empty(); }
  const Term* lookup(const Term& var) const;  // replacement for a variable, if bound
};

enum class MatchDiag : unsigned char { Ok, NoCase, LengthMismatch, Conflict };

// The five-case partial matching function on elements. Succeeds with a
// binding when the left element is a variable (bound to the right element)
// or when both sides are the same constant (null binding).
std::optional<Binding> match_elements(const Term& e, const Term& e2,
                                      MatchDiag* diag = nullptr);

// Structural recursion over tuples; head bindings are prepended to the
// substitution of the tails with set semantics (an identical binding is
// not duplicated, a clashing one fails the match).
std::optional<Substitution> match_tuples(const TermTuple& t, const TermTuple& t2,
                                         MatchDiag* diag = nullptr);

// Simultaneous application: every occurrence of each bound variable is
// replaced in a single pass; unbound variables pass through.
Term apply_substitution(const Term& t, const Substitution& s);
TermTuple apply_substitution(const TermTuple& t, const Substitution& s);

// Applies the substitutions in reverse of the given order, each full
// application feeding the next.
Term compose_apply(const Term& t, const std::vector<Substitution>& subs);

// Canonical text rendering. Variables render as name plus tag suffix,
// epsilon as "eps", composites as f(a1,a2) with an optional trailing tag.
std::string render(const Term& t);
std::string render(const TermTuple& t);
std::string render(const Binding& b);
std::string render(const Substitution& s);

// Rendering for one side of a composed rule: variables and composites
// carrying the home tag render untagged, while subterms that intruded from
// the other side keep all their tags.
std::string render_home(const Term& t, const SideTag& home);

// Structural equality up to the home tag: an untagged variable or
// composite on either side is considered equal to its home-tagged twin.
// Foreign tags must match exactly.
bool equal_up_to_home_tag(const Term& a, const Term& b, const SideTag& home);

}  // namespace alspec
