#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oucl/exec.hpp"
#include "oucl/formula.hpp"
#include "oucl/sem.hpp"
#include "oucl/sim.hpp"

namespace oucl {

// --- satisfaction ------------------------------------------------------------

struct EvalOptions {
  // Variables a context may hold when deciding X ~> Y. Unset: every variable
  // the model mentions plus the formula's variables (exact for a FiniteSem).
  // For programs the default is the formula's variables only.
  std::optional<std::set<VariableId>> scope;
  InfluenceOptions influence;
  std::uint64_t context_budget = std::uint64_t{1} << 16;  // programs only
  Exec exec = Exec::Serial;
};

// Caches one solution per antecedent and one answer per influence pair, so
// many formulas can be checked against the same model cheaply.
class SemEvaluator {
 public:
  explicit SemEvaluator(const FiniteSem& m, EvalOptions opts = {});
  bool operator()(const Formula& f);
  bool atom(const CondAtom& a);

 private:
  const FiniteSem* m_;
  EvalOptions opts_;
  std::set<VariableId> base_scope_;
  std::map<Intervention, Valuation> solutions_;
  std::map<std::pair<VariableId, VariableId>, bool> influence_;
};

bool eval(const FiniteSem& m, const Formula& f, const EvalOptions& opts = {});
// Three-valued: a conditional is Unknown when a consequent variable stays
// unwritten within the budget; X ~> Y is True on a found witness, Unknown if
// some context left Y unwritten, False otherwise (relative to the scope).
Tri eval(const SimProgram& p, const Formula& f, std::uint64_t step_budget, const EvalOptions& opts = {});

// --- state descriptions ------------------------------------------------------

// Disjunction of the full state descriptions (for each antecedent α of f, a
// literal for every variable of f under [α]) that propositionally entail f.
// Descriptions are listed in counting order; `false` when there are none.
// Throws BudgetExceeded when |vars|·|antecedents| > budget, Error on L+ input.
Formula expand_state_descriptions(const Formula& f, std::size_t budget = 20);

// --- satisfiability ----------------------------------------------------------

enum class System { AX, AXPlus, AXPlusT };
const char* to_string(System s) noexcept;
// "AX", "AX+", "AX+T". Throws Error otherwise.
System parse_system(std::string_view s);

struct SatCertificate {
  System system = System::AX;
  std::vector<VariableId> order;
  // table[α][X] = v_α(X) for every antecedent α of the formula and X in order.
  std::map<Intervention, std::map<VariableId, bool>> table;
  // L+ only: influence pairs the witness adds on purpose, and the full
  // structural table of every variable over its predecessors in `order`
  // (big-endian rows, first predecessor most significant).
  std::set<std::pair<VariableId, VariableId>> influence;
  std::map<VariableId, std::vector<bool>> fns;

  // cert / system / order / alpha="..." | X=1 Y=0 / influence X Y / fn X table:0110
  std::string str() const;
  // Throws ParseError.
  static SatCertificate parse(std::string_view text);
};

struct CertCheck {
  bool ok = false;
  std::string reason;
  // Set for chain-consistency failures: the two antecedents and the variable.
  std::optional<Intervention> alpha1, alpha2;
  std::optional<VariableId> variable;
  std::uint64_t steps = 0;  // elementary operations performed

  explicit operator bool() const noexcept { return ok; }
};

// For L certificates the check is polynomial: order is a permutation of the
// formula's variables, effectiveness, chain consistency, skeleton. For L+ it
// also checks the structural tables against the rows and computes the
// influence relation the witness will have (exact influence search for AX+,
// closure of direct dependencies for AX+T), which is exponential in general.
CertCheck verify_certificate(const Formula& f, const SatCertificate& c);

struct SatOptions {
  Exec exec = Exec::Serial;
  int jobs = 0;  // OpenMP threads in parallel mode; 0 = runtime default
};

struct SatStats {
  std::uint64_t nodes = 0;   // order positions tried
  std::uint64_t leaves = 0;  // complete (order, table) pairs reached
};

struct SatResult {
  bool sat = false;
  std::optional<SatCertificate> certificate;
  std::optional<FiniteSem> witness;
  SatStats stats;
};

// Backtracking over orders of the formula's variables with the table filled
// column by column (one free bit per group of antecedents sharing a prefix)
// and three-valued pruning of the propositional skeleton. UNSAT means the
// search was exhausted. Throws Error if f has influence atoms and system is
// AX, ScopeTooLarge beyond 62 variables.
SatResult solve_sat(const Formula& f, System system, const SatOptions& opts = {});

// The model built from a certificate. AX: times are order positions and f_X
// reads the table. AX+: the same model shifted to times 1.., plus a constant
// selector __Z_i_j at time 0 for each influence pair (i, j positions). AX+T: a
// local model, with relay chains __W_i_t carrying X_i forward, pair chains
// __W_i_j_t, and selectors __Z_i_j at time t(X_j) - 1.
// Throws InvalidCertificate when verify_certificate fails.
FiniteSem synthesize_witness(const Formula& f, const SatCertificate& c);

}  // namespace oucl
