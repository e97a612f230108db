#pragma once

#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oucl/expr.hpp"
#include "oucl/intervention.hpp"
#include "oucl/variable.hpp"

namespace oucl {

struct Literal {
  VariableId var;
  bool positive = true;

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;
};

// Propositional formulas over variables.
using PropFormula = Expr<VariableId>;

// An ordered conjunction of literals over distinct variables; empty is the
// empty intervention. Printing keeps the order, but as an intervention the
// antecedent is an unordered partial map.
class Antecedent {
 public:
  Antecedent() = default;
  // Throws WellFormednessError (at 1:1) if a variable repeats.
  explicit Antecedent(std::vector<Literal> literals);

  const std::vector<Literal>& literals() const noexcept { return literals_; }
  bool empty() const noexcept { return literals_.empty(); }
  std::size_t size() const noexcept { return literals_.size(); }
  bool mentions(const VariableId& v) const;

  Intervention as_intervention() const;
  static Antecedent from_intervention(const Intervention& i);

  // The antecedent read as a propositional formula (left-associated
  // conjunction; `true` when empty).
  PropFormula as_prop() const;

  friend bool operator==(const Antecedent&, const Antecedent&) = default;

 private:
  std::vector<Literal> literals_;
};

struct Conditional {
  Antecedent antecedent;
  PropFormula consequent;

  friend bool operator==(const Conditional&, const Conditional&) = default;
};

struct Influence {
  VariableId source;
  VariableId target;

  friend auto operator<=>(const Influence&, const Influence&) = default;
  friend bool operator==(const Influence&, const Influence&) = default;
};

using CondAtom = std::variant<Conditional, Influence>;

// A formula of L (conditional atoms only) or L+ (with influence atoms).
using Formula = Expr<CondAtom>;

inline Formula make_conditional(Antecedent a, PropFormula consequent) {
  return Formula::atom(Conditional{std::move(a), std::move(consequent)});
}
// Throws WellFormednessError when source == target.
Formula make_influence(VariableId source, VariableId target);
inline PropFormula make_var(VariableId v) { return PropFormula::atom(std::move(v)); }
inline PropFormula make_literal(const Literal& l) {
  return l.positive ? make_var(l.var) : PropFormula::negate(make_var(l.var));
}

// Canonical text.
std::string print(const PropFormula& f);
std::string print(const Formula& f);
std::string print(const Antecedent& a);

// Parses one formula. `line` offsets reported positions for file input.
// Throws ParseError / WellFormednessError.
Formula parse_formula(std::string_view text, std::size_t line = 1);
PropFormula parse_prop(std::string_view text, std::size_t line = 1);

std::set<VariableId> free_vars(const PropFormula& f);
std::set<VariableId> free_vars(const Formula& f);
std::set<Intervention> antecedents_of(const Formula& f);

bool has_influence_atoms(const Formula& f);
inline bool in_language_L(const Formula& f) { return !has_influence_atoms(f); }

// Structural equality in which antecedents compare as partial maps.
bool same_modulo_antecedent_order(const Formula& a, const Formula& b);
bool same_atom_modulo_antecedent_order(const CondAtom& a, const CondAtom& b);

// Reads a formula file: one formula per line, `#` starts a comment, blank lines skipped.
struct NumberedFormula {
  std::size_t line;
  Formula formula;
};
std::vector<NumberedFormula> parse_formula_file(std::string_view text);

}  // namespace oucl
