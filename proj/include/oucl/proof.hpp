#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oucl/axioms.hpp"
#include "oucl/sem.hpp"
#include "oucl/sim.hpp"

namespace oucl {

struct Justification {
  enum class Kind { Axiom, Taut, MP, RW };
  Kind kind = Kind::Taut;
  Schema schema = Schema::R;  // Axiom
  std::size_t a = 0, b = 0;   // MP: the two premises; RW: the premise in a
  Intervention alpha;         // RW
};

// A line holds a formula of L/L+ or, for premises of RW, a plain propositional formula.
using LineFormula = std::variant<Formula, PropFormula>;

struct DerivationLine {
  std::size_t number = 0;       // the `n.` label
  std::size_t source_line = 0;  // line in the file
  LineFormula formula;
  Justification just;
};

// Text form, one line per step (blank lines and `#` comments skipped):
//   n. <formula> ; ax:R | ax:K | ax:FD | ax:C | ax:Rec | ax:Wit | ax:Rec+ | ax:Trans
//                  | taut | mp i j | rw i [X=1,Y=0]
// Lines must be numbered 1, 2, 3, ... A formula with a `[` or `~>` is read as
// L/L+, anything else as a propositional formula over variables.
struct Derivation {
  std::vector<DerivationLine> lines;

  static Derivation parse(std::string_view text);  // throws ParseError
  std::string str() const;
};

std::string print(const LineFormula& f);

// Propositional validity with conditional and influence atoms treated as opaque
// (atoms equal up to antecedent order are the same atom).
bool is_tautology(const Formula& f);
bool is_tautology(const PropFormula& f);

struct ProofCheck {
  bool ok = true;
  std::size_t line = 0;  // derivation line number of the first failure
  std::string reason;

  explicit operator bool() const noexcept { return ok; }
};

// Axiom lines must match their schema (which must belong to `sys`), taut lines
// must be tautologies, `mp i j` needs earlier lines φ and φ -> ψ (either order)
// and yields ψ, `rw i [α]` needs an earlier propositional line β -> β' and
// yields [α]β -> [α]β'.
ProofCheck check_derivation(const Derivation& d, System sys);

// Evaluates the last line on every model; a false value is a soundness alarm.
Verdict cross_validate(const Derivation& d, const std::vector<FiniteSem>& models);

}  // namespace oucl
