#pragma once

// Shared between logic.cpp and sat.cpp: the formula compiled to indices.

#include <cstdint>
#include <map>
#include <vector>

#include "oucl/expr.hpp"
#include "oucl/formula.hpp"

namespace oucl::detail {

struct IndexedAtom {
  bool influence = false;
  int ant = -1;       // conditional: index into Compiled::ants
  Expr<int> cons;     // conditional: consequent over variable indices
  int src = -1, tgt = -1;
};

struct Compiled {
  std::vector<VariableId> vars;  // sorted
  std::map<VariableId, int> index;
  std::vector<Intervention> ants;  // sorted
  std::vector<std::vector<std::int8_t>> fixed;  // [ant][var]: -1 free, else α(X)
  std::vector<IndexedAtom> atoms;  // deduplicated
  Expr<int> skeleton;
  bool has_influence = false;
};

Compiled compile(const Formula& f);

// Big-endian row of the values at positions 0..k-1 of `vals`.
inline std::uint64_t prefix_row(const std::vector<std::uint8_t>& vals, int k) {
  std::uint64_t r = 0;
  for (int q = 0; q < k; ++q) r = (r << 1) | vals[q];
  return r;
}

// Solves a model given per-position tables over all predecessors; ctx[p] is
// -1 (use the table) or a held value. Fills vals[0..k].
inline void solve_tables(const std::vector<std::vector<bool>>& fns, const std::vector<std::int8_t>& ctx, int k,
                         std::vector<std::uint8_t>& vals) {
  for (int p = 0; p <= k; ++p)
    vals[p] = ctx[p] >= 0 ? static_cast<std::uint8_t>(ctx[p]) : static_cast<std::uint8_t>(fns[p][prefix_row(vals, p)]);
}

// Does position j influence position k in the model given by fns[0..k]?
// Brute force over the 3^(k-1) contexts on the other earlier positions.
bool table_influence(const std::vector<std::vector<bool>>& fns, int j, int k, std::uint64_t* steps = nullptr);

// Does a table over k predecessors depend on predecessor q?
bool depends_on(const std::vector<bool>& rows, int k, int q);

}  // namespace oucl::detail
