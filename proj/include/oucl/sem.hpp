#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oucl/exec.hpp"
#include "oucl/formula.hpp"
#include "oucl/intervention.hpp"
#include "oucl/variable.hpp"

namespace oucl {

// Boolean function of an ordered, duplicate-free parent list, presented either
// as an expression over the parents or as a truth table whose row index reads
// the parent values as big-endian bits (first parent = most significant).
class StructuralFn {
 public:
  StructuralFn() = default;  // constant 0

  static StructuralFn constant(bool value);
  // Throws Error if the expression mentions a variable outside `parents`.
  static StructuralFn expression(std::vector<VariableId> parents, PropFormula expr);
  // Throws Error unless rows.size() == 2^|parents|.
  static StructuralFn table(std::vector<VariableId> parents, std::vector<bool> rows);

  const std::vector<VariableId>& parents() const noexcept { return parents_; }
  bool is_table() const noexcept { return is_table_; }
  const PropFormula& expr() const noexcept { return expr_; }
  const std::vector<bool>& rows() const noexcept { return rows_; }

  // `parent_values[k]` is the value of parents()[k].
  bool evaluate(std::span<const std::uint8_t> parent_values) const;

  // `"A & ~B"` style expression text or `table:0110`.
  std::string text() const;

 private:
  std::vector<VariableId> parents_;
  bool is_table_ = false;
  PropFormula expr_;
  std::vector<bool> rows_;
};

// Shannon expansion of a truth table into an expression over `parents`.
PropFormula table_to_expr(const std::vector<VariableId>& parents, const std::vector<bool>& rows);

struct Equation {
  StructuralFn fn;
  std::uint64_t time = 0;
};

// Finitely supported total map χ → {0,1}; unlisted variables read as 0.
class Valuation {
 public:
  Valuation() = default;
  explicit Valuation(std::map<VariableId, bool> explicit_values) : values_(std::move(explicit_values)) {}

  bool operator()(const VariableId& v) const {
    auto it = values_.find(v);
    return it != values_.end() && it->second;
  }
  void set(const VariableId& v, bool b) { values_[v] = b; }
  const std::map<VariableId, bool>& explicit_values() const noexcept { return values_; }
  std::string str() const;

  // Equality as total maps.
  friend bool operator==(const Valuation& a, const Valuation& b);

 private:
  std::map<VariableId, bool> values_;
};

// Dense compiled view of a model: every declared variable plus every
// referenced undeclared parent, laid out in ascending (time, canonical id)
// order so that parents always occupy earlier slots.
class DenseSem {
 public:
  std::size_t size() const noexcept { return vars_.size(); }
  const VariableId& var(std::size_t s) const { return vars_[s]; }
  std::uint64_t time(std::size_t s) const { return times_[s]; }
  bool declared(std::size_t s) const { return declared_[s] != 0; }
  std::span<const int> parents(std::size_t s) const { return parents_[s]; }
  // -1 when the variable is neither declared nor referenced.
  int slot(const VariableId& v) const;

  // Value of slot `s` given the values of its parents (in parent order).
  bool eval(std::size_t s, std::span<const std::uint8_t> parent_values) const;

  // Solves in slot order; fixed[s] = -1 means "use the equation", 0/1 means held.
  void solve(std::span<const std::int8_t> fixed, std::span<std::uint8_t> values) const;

 private:
  friend class FiniteSem;
  struct Program {
    // Postfix code: >= 0 pushes parent k; negative codes are operators.
    std::vector<int> code;
  };

  std::vector<VariableId> vars_;
  std::vector<std::uint64_t> times_;
  std::vector<std::uint8_t> declared_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<std::uint8_t>> tables_;  // empty when `programs_[s]` is used
  std::vector<Program> programs_;
  std::unordered_map<VariableId, int, VariableIdHash> index_;
};

// A finitely presented computable SEM. Declared variables carry explicit
// equations and times; every other variable has f ≡ 0 and time 0.
class FiniteSem {
 public:
  FiniteSem();
  // Throws TemporalViolation if some parent does not strictly precede its child.
  explicit FiniteSem(std::map<VariableId, Equation> equations);

  const std::map<VariableId, Equation>& equations() const noexcept { return equations_; }
  bool declares(const VariableId& v) const { return equations_.count(v) != 0; }
  std::uint64_t time(const VariableId& v) const;
  std::vector<VariableId> declared() const;

  const DenseSem& dense() const noexcept { return *dense_; }

 private:
  std::map<VariableId, Equation> equations_;
  std::shared_ptr<const DenseSem> dense_;
};

// The unique solution, built in ascending time order.
Valuation solve(const FiniteSem& m);
// Same as solve(intervene(m, i)) without materializing the mutilated model.
Valuation solve(const FiniteSem& m, const Intervention& i);

// Replaces f_X by the constant i(X) for X ∈ dom(i); times unchanged.
FiniteSem intervene(const FiniteSem& m, const Intervention& i);

// Parent lists all sit exactly one time step earlier.
bool is_local(const FiniteSem& m);

// Declared variables plus `extra`.
std::set<VariableId> default_scope(const FiniteSem& m, const std::set<VariableId>& extra = {});

// A context and two values of x whose solutions differ at y.
struct InfluenceWitness {
  Intervention context;
  bool x1 = false;
  bool x2 = true;
};

struct InfluenceOptions {
  // Upper bound on the number of search states before ScopeTooLarge.
  std::size_t state_budget = std::size_t{1} << 22;
};

// Exact search for a context (an intervention on scope \ {x}) under which
// toggling x changes y. Only y's ancestral cone is explored: variables outside
// it cannot affect y. Cone variables outside the scope are never intervened.
std::optional<InfluenceWitness> find_influence(const FiniteSem& m, const VariableId& x, const VariableId& y,
                                               const std::set<VariableId>& scope, InfluenceOptions opts = {});
bool influences(const FiniteSem& m, const VariableId& x, const VariableId& y, const std::set<VariableId>& scope,
                InfluenceOptions opts = {});

// Literal context enumeration: every context over scope \ {x, y}, each
// variable free / fixed 0 / fixed 1. Returns the witness with the least
// context index, identically for both policies. Throws ScopeTooLarge when
// 3^|scope \ {x,y}| exceeds `context_budget`.
std::optional<InfluenceWitness> influence_by_enumeration(const FiniteSem& m, const VariableId& x,
                                                         const VariableId& y, const std::set<VariableId>& scope,
                                                         std::uint64_t context_budget, Exec exec);

struct Mediation {
  VariableId mediator;
  InfluenceWitness source_to_mediator;
  InfluenceWitness mediator_to_target;
};

// For a local model with x ⇝ y (demonstrated by `witness`) and
// time(y) > time(x) + 1, returns a variable on the way: restricts the two
// witnessing solutions to y's parents and moves from one to the other one
// parent at a time (canonical order) until y's value changes.
// Throws InvalidWitness when a precondition fails.
Mediation find_mediator(const FiniteSem& m, const VariableId& x, const VariableId& y, const InfluenceWitness& witness);

// --- model file format -------------------------------------------------------
//
//   sem                       (or `sem witness` for synthesized models)
//   var X time=0 parents=[] fn="true"
//   var Y time=1 parents=[X] fn="~X"
//   var Z time=2 parents=[X,Y] fn=table:0110
//
// Throws ParseError; reserved gadget names are rejected unless the header is
// `sem witness`.
FiniteSem parse_sem(std::string_view text);
std::string print_sem(const FiniteSem& m, bool witness_header = false);

}  // namespace oucl
