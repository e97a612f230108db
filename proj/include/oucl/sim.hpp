#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oucl/exec.hpp"
#include "oucl/expr.hpp"
#include "oucl/intervention.hpp"
#include "oucl/sem.hpp"
#include "oucl/variable.hpp"

namespace oucl {

// Integer expression over named values (registers, or index names in a time
// map declaration). Operators: || && ! == != < <= > >= + - * / % and unary -;
// `blank` is the blank-square sentinel -1.
struct IntExpr {
  struct Node {
    int op = 0;          // see sim.cpp
    std::int64_t v = 0;  // literal, or resolved slot for a name
    int a = -1, b = -1;
    std::string name;
  };
  std::vector<Node> nodes;
  int root = -1;

  // Throws ParseError; `col0` is the 0-based column of text[0].
  static IntExpr parse(std::string_view text, std::size_t line, std::size_t col0);
};

// Computable time map attached to a program, written `X:0, Y_3:2, Z_*: i0 + 1, *: 0`.
// A plain key matches exactly that variable, `B_*` matches every B with at
// least one index, `*` matches everything else; first exact, then family,
// then wildcard. Expressions may use i0, i1, ... for the variable's indices
// (missing ones read 0). Variables matching no key get time 0.
class TimeMapDecl {
 public:
  TimeMapDecl() = default;
  static TimeMapDecl parse(std::string_view text);  // throws ParseError
  static TimeMapDecl from_model(const FiniteSem& m);

  // Throws ProgramError on a negative or failing time expression.
  std::uint64_t operator()(const VariableId& v) const;
  const std::string& text() const noexcept { return text_; }

 private:
  struct Entry {
    enum class Kind { Exact, Family, Wildcard } kind = Kind::Exact;
    VariableId key;    // Exact
    std::string base;  // Family
    IntExpr expr;
  };
  std::vector<Entry> entries_;
  std::string text_;
};

// A program of the simulation DSL, one statement per line (or `;`-separated):
//
//   set r := e                 register assignment (registers start at 0)
//   write B[e, ...] := e       write square B_<e,...> (B[] is B); value > 0 writes 1, else 0
//   read r := B[e, ...]        r := 0, 1 or blank (-1)
//   if e goto L                jump when e != 0
//   goto L
//   halt
//   L:                         label
//   # comment
//   .time "decl"               optional time map (see TimeMapDecl)
//
// Running off the end is the same as `halt`.
class SimProgram {
 public:
  SimProgram();
  static SimProgram parse(std::string_view text);  // throws ParseError

  const std::string& source() const;
  const std::optional<TimeMapDecl>& time_map() const;
  std::size_t size() const;  // number of instructions

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

struct TapeWrite {
  VariableId var;
  bool bit;
  std::uint64_t step;

  friend bool operator==(const TapeWrite&, const TapeWrite&) = default;
};

struct RunTrace {
  std::uint64_t steps = 0;
  std::vector<TapeWrite> writes;  // in write order; intervened squares first, at step 0
  bool halted = false;

  std::optional<bool> value(const VariableId& v) const;
  // The trace read as a (partial) valuation.
  Intervention as_intervention() const;
};

// Executes i(p). The intervened squares are written first (canonical order);
// later writes to them are ignored. Throws WriteConflict when a square would be
// rewritten with a different value, ProgramError on other faults.
RunTrace run(const SimProgram& p, const Intervention& i, std::uint64_t step_budget);

// Runs until `x` is written (its bit) or the run halts or exhausts the budget (Unknown).
Tri query(const SimProgram& p, const Intervention& i, const VariableId& x, std::uint64_t step_budget);
// One run answering several variables.
std::vector<Tri> query_many(const SimProgram& p, const Intervention& i, const std::vector<VariableId>& xs,
                            std::uint64_t step_budget);

struct Verdict {
  enum class Kind { Pass, Counterexample, Indeterminate };
  Kind kind = Kind::Pass;
  std::string detail;
  Intervention intervention;
  std::optional<VariableId> variable;
  Tri lhs = Tri::Unknown;
  Tri rhs = Tri::Unknown;

  bool pass() const noexcept { return kind == Kind::Pass; }
};
const char* to_string(Verdict::Kind k) noexcept;

struct FunctionalOptions {
  std::size_t random_samples = 16;
  std::size_t max_singletons = 64;
  std::uint64_t seed = 1;
};

// For each test intervention i with trace v, reruns under i' ∘ i for sampled
// restrictions i' of v (all of v, single writes, prefixes in write order, random
// subsets) and compares the two runs on squares both wrote. A square written by
// only one run counts when the other run halted. Bounded: Pass is not a proof.
Verdict check_functional(const SimProgram& p, const std::vector<Intervention>& tests, std::uint64_t step_budget,
                         FunctionalOptions opts = {});

struct InfluenceProbe {
  VariableId x;
  VariableId y;
  std::set<VariableId> scope;
};

struct SimInfluence {
  std::optional<InfluenceWitness> witness;  // least context index that toggles y
  std::uint64_t unknown_contexts = 0;       // contexts where y stayed unwritten
};

// Bounded influence search over every context on scope \ {x, y}. Throws
// ScopeTooLarge past `context_budget` contexts.
SimInfluence sim_influence(const SimProgram& p, const VariableId& x, const VariableId& y,
                           const std::set<VariableId>& scope, std::uint64_t step_budget,
                           std::uint64_t context_budget, Exec exec);

// Fails when some probe finds x ⇝ y although t(x) >= t(y). Probes with
// t(x) < t(y) cannot fail and are not searched.
Verdict check_monotone(const SimProgram& p, const TimeMapDecl& t, const std::vector<InfluenceProbe>& probes,
                       std::uint64_t step_budget, std::uint64_t context_budget = 1u << 16,
                       Exec exec = Exec::Parallel);

// Compares the empty-intervention answers of p and q on `vars`.
// Unknown on both sides is Indeterminate; Unknown against a bit is a Counterexample.
Verdict weak_equiv(const SimProgram& p, const SimProgram& q, const std::set<VariableId>& vars,
                   std::uint64_t step_budget);

}  // namespace oucl
