#include "oucl/random.hpp"

#include <algorithm>

namespace oucl {

namespace {

bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Op random_binop(std::mt19937_64& rng) {
  static const Op ops[] = {Op::And, Op::Or, Op::Implies, Op::Iff};
  return ops[below(rng, 4)];
}

}  // namespace

PropFormula random_prop(std::mt19937_64& rng, const std::vector<VariableId>& vars, int depth) {
  if (vars.empty()) return PropFormula::constant(coin(rng));
  std::size_t pick = below(rng, depth <= 0 ? 5 : 9);
  if (pick < 4) return make_var(vars[below(rng, vars.size())]);
  if (pick == 4) return coin(rng, 0.2) ? PropFormula::constant(coin(rng)) : make_var(vars[below(rng, vars.size())]);
  if (pick == 5) return PropFormula::negate(random_prop(rng, vars, depth - 1));
  return PropFormula::binary(random_binop(rng), random_prop(rng, vars, depth - 1), random_prop(rng, vars, depth - 1));
}

StructuralFn random_fn(std::mt19937_64& rng, const std::vector<VariableId>& parents, bool as_table) {
  if (as_table) {
    std::vector<bool> rows(std::size_t{1} << parents.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = coin(rng);
    return StructuralFn::table(parents, std::move(rows));
  }
  return StructuralFn::expression(parents, random_prop(rng, parents, 2));
}

FiniteSem random_sem(std::mt19937_64& rng, const RandomSemOptions& opts) {
  std::vector<VariableId> vars;
  std::vector<std::uint64_t> times;
  for (std::size_t i = 0; i < opts.vars; ++i) {
    vars.emplace_back("V", std::vector<std::uint32_t>{static_cast<std::uint32_t>(i)});
    times.push_back(std::uniform_int_distribution<std::uint64_t>(0, opts.max_time)(rng));
  }
  std::map<VariableId, Equation> eqs;
  std::uint32_t next_leaf = 0;
  for (std::size_t i = 0; i < opts.vars; ++i) {
    std::vector<VariableId> cands;
    for (std::size_t j = 0; j < opts.vars; ++j)
      if (opts.local ? times[j] + 1 == times[i] : times[j] < times[i]) cands.push_back(vars[j]);
    std::shuffle(cands.begin(), cands.end(), rng);
    std::size_t k = std::min(cands.size(), below(rng, opts.max_parents + 1));
    std::vector<VariableId> parents(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k));
    if (!opts.local && times[i] > 0)
      for (std::size_t extra = 0; parents.size() < opts.max_parents && extra < 2; ++extra)
        if (coin(rng, opts.undeclared_parent)) parents.emplace_back("U", std::vector<std::uint32_t>{next_leaf++});
    eqs.emplace(vars[i], Equation{random_fn(rng, parents, coin(rng, opts.table_fn)), times[i]});
  }
  return FiniteSem(std::move(eqs));
}

Formula random_formula(std::mt19937_64& rng, const RandomFormulaOptions& opts) {
  const auto& vars = opts.vars;
  std::vector<Antecedent> pool;
  std::size_t na = 1 + below(rng, std::max<std::size_t>(opts.max_antecedents, 1));
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<VariableId> vs = vars;
    std::shuffle(vs.begin(), vs.end(), rng);
    std::size_t k = below(rng, std::min(vs.size(), opts.max_literals) + 1);
    std::vector<Literal> lits;
    for (std::size_t j = 0; j < k; ++j) lits.push_back({vs[j], coin(rng)});
    pool.emplace_back(std::move(lits));
  }
  auto atom = [&]() -> Formula {
    if (vars.size() >= 2 && coin(rng, opts.influence_atom)) {
      std::size_t a = below(rng, vars.size()), b = below(rng, vars.size() - 1);
      if (b >= a) ++b;
      return make_influence(vars[a], vars[b]);
    }
    return make_conditional(pool[below(rng, pool.size())], random_prop(rng, vars, opts.consequent_depth));
  };
  auto rec = [&](auto&& self, int depth) -> Formula {
    std::size_t pick = below(rng, depth <= 0 ? 1 : 5);
    if (pick == 0) return atom();
    if (pick == 1) return Formula::negate(self(self, depth - 1));
    return Formula::binary(random_binop(rng), self(self, depth - 1), self(self, depth - 1));
  };
  return rec(rec, opts.depth);
}

FiniteSem random_sem_over(std::mt19937_64& rng, const std::vector<VariableId>& vars, bool local,
                          std::uint64_t max_time) {
  std::uniform_int_distribution<std::uint64_t> tdist(0, max_time);
  std::map<VariableId, std::uint64_t> t;
  for (const auto& v : vars) t[v] = tdist(rng);
  std::map<VariableId, Equation> eqs;
  for (const auto& v : vars) {
    std::vector<VariableId> parents;
    for (const auto& u : vars) {
      bool ok = local ? t[u] + 1 == t[v] : t[u] < t[v];
      if (ok && (rng() & 1)) parents.push_back(u);
    }
    std::vector<bool> rows(std::size_t{1} << parents.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = rng() & 1;
    eqs[v] = Equation{StructuralFn::table(parents, rows), t[v]};
  }
  return FiniteSem(std::move(eqs));
}

}  // namespace oucl
