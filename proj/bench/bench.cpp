// Serial reference vs OpenMP for the parallel kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "oucl/bridge.hpp"
#include "oucl/logic.hpp"
#include "oucl/random.hpp"
#include "oucl/sem.hpp"
#include "oucl/sim.hpp"

using namespace oucl;

namespace {

Exec policy(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

FiniteSem model(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RandomSemOptions o;
  o.vars = n;
  o.max_parents = 3;
  o.max_time = 5;
  return random_sem(rng, o);
}

// X and Y are the first and last declared variables; contexts range over the rest.
void BM_InfluenceByEnumeration(benchmark::State& s) {
  auto m = model(12, 1);
  auto vs = m.declared();
  auto scope = default_scope(m);
  for (auto _ : s)
    benchmark::DoNotOptimize(influence_by_enumeration(m, vs.back(), vs.front(), scope, 1u << 24, policy(s)));
}
BENCHMARK(BM_InfluenceByEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimInfluence(benchmark::State& s) {
  auto m = model(9, 2);
  auto p = sem_to_sim(m);
  auto vs = m.declared();
  auto scope = default_scope(m);
  for (auto _ : s)
    benchmark::DoNotOptimize(sim_influence(p, vs.back(), vs.front(), scope, 1u << 16, 1u << 20, policy(s)));
}
BENCHMARK(BM_SimInfluence)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CheckEquiv(benchmark::State& s) {
  auto m = model(7, 3);
  auto p = sem_to_sim(m);
  auto vs = m.declared();
  auto is = all_interventions(vs);
  for (auto _ : s) benchmark::DoNotOptimize(check_equiv(m, p, vs, is, 1u << 16, policy(s)));
}
BENCHMARK(BM_CheckEquiv)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimToSem(benchmark::State& s) {
  auto m = model(14, 4);
  auto p = sem_to_sim(m);
  auto t = TimeMapDecl::from_model(m);
  auto vs = m.declared();
  for (auto _ : s) benchmark::DoNotOptimize(sim_to_sem(p, vs, t, 1u << 16, policy(s)));
}
BENCHMARK(BM_SimToSem)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// UNSAT parity of six empty-antecedent atoms: the whole search tree is explored.
void BM_SolveSat(benchmark::State& s) {
  std::vector<Formula> atoms;
  for (std::uint32_t i = 0; i < 6; ++i) atoms.push_back(make_conditional(Antecedent{}, make_var(VariableId("X", {i}))));
  Formula par = atoms[0];
  for (std::size_t i = 1; i < atoms.size(); ++i)
    par = Formula::disj(Formula::conj(par, Formula::negate(atoms[i])), Formula::conj(Formula::negate(par), atoms[i]));
  auto f = Formula::conj(par, Formula::negate(par));
  SatOptions o;
  o.exec = policy(s);
  o.jobs = 0;
  for (auto _ : s) benchmark::DoNotOptimize(solve_sat(f, System::AX, o));
}
BENCHMARK(BM_SolveSat)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
