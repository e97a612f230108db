#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oucl/formula.hpp"
#include "oucl/sem.hpp"

namespace oucl {

// Random generators shared by tests, benchmarks and `oucl gen`. All draw from
// a caller-owned std::mt19937_64 so runs are reproducible from a seed.

struct RandomSemOptions {
  std::size_t vars = 6;          // declared variables V_0 .. V_{n-1}
  std::size_t max_parents = 3;
  std::uint64_t max_time = 4;
  bool local = false;            // parents exactly one step earlier
  double undeclared_parent = 0;  // chance a parent slot is an undeclared U_k leaf (non-local only)
  double table_fn = 0.5;         // chance f is stored as a table rather than an expression
};

FiniteSem random_sem(std::mt19937_64& rng, const RandomSemOptions& opts);

// A model over the given names: times 0..max_time, parents a random subset of
// the strictly earlier variables (local: of those exactly one step earlier),
// table functions.
FiniteSem random_sem_over(std::mt19937_64& rng, const std::vector<VariableId>& vars, bool local,
                          std::uint64_t max_time = 3);

// A random boolean function of `parents`, as a table or as an expression.
StructuralFn random_fn(std::mt19937_64& rng, const std::vector<VariableId>& parents, bool as_table);

struct RandomFormulaOptions {
  std::vector<VariableId> vars;
  std::size_t max_antecedents = 3;  // distinct antecedents per formula
  std::size_t max_literals = 2;     // literals per antecedent
  int depth = 3;                    // boolean nesting depth over conditional atoms
  int consequent_depth = 2;
  double influence_atom = 0;        // chance an atom is an influence atom
};

Formula random_formula(std::mt19937_64& rng, const RandomFormulaOptions& opts);
PropFormula random_prop(std::mt19937_64& rng, const std::vector<VariableId>& vars, int depth);

}  // namespace oucl
