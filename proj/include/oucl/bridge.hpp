#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oucl/exec.hpp"
#include "oucl/sem.hpp"
#include "oucl/sim.hpp"

namespace oucl {

// Program text for a model: one Calc block per declared variable (returns at
// once if the square is written, otherwise reads the parents, calling Calc on
// blank declared parents and writing 0 to blank undeclared ones, then writes
// f_X), called for every declared variable in ascending (time, canonical)
// order, followed by an endless stream writing 0 to blank squares B[] and
// B[n], n = 0, 1, ... for every base of the model plus `X`.
std::string sem_to_sim_text(const FiniteSem& m);
SimProgram sem_to_sim(const FiniteSem& m);

// Tabulates f_X for each X in `vars` by running p with every assignment to the
// variables of `vars` that t places strictly before X, then drops parents the
// table does not depend on. Throws ExtractionIncomplete naming the first cell
// left unwritten within the budget, ScopeTooLarge past 2^24 rows for one
// variable.
FiniteSem sim_to_sem(const SimProgram& p, const std::vector<VariableId>& vars, const TimeMapDecl& t,
                     std::uint64_t step_budget, Exec exec = Exec::Parallel);

// Compares solve(m, i)(V) with query(p, i, V) for every i and V. Reports the
// first definite mismatch; failing that, the first unanswered query as
// Indeterminate.
Verdict check_equiv(const FiniteSem& m, const SimProgram& p, const std::vector<VariableId>& vars,
                    const std::vector<Intervention>& interventions, std::uint64_t step_budget,
                    Exec exec = Exec::Parallel);

}  // namespace oucl
