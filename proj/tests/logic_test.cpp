#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "oucl/bridge.hpp"
#include "oucl/errors.hpp"
#include "oucl/logic.hpp"
#include "oucl/random.hpp"

namespace oucl {
namespace {

VariableId V(const char* s) { return VariableId::parse(s); }
Formula F(const char* s) { return parse_formula(s); }

std::vector<VariableId> vars_of(std::initializer_list<const char*> names) {
  std::vector<VariableId> out;
  for (auto n : names) out.push_back(V(n));
  return out;
}

Formula chain_family(int k, bool close) {
  std::vector<Formula> parts;
  auto x = [](int i) { return VariableId("X", {static_cast<std::uint32_t>(i)}); };
  auto pair = [&](const VariableId& a, const VariableId& b) {
    return Formula::conj(make_conditional(Antecedent({{a, true}}), make_var(b)),
                         make_conditional(Antecedent({{a, false}}), PropFormula::negate(make_var(b))));
  };
  for (int i = 0; i < k; ++i) parts.push_back(pair(x(i + 1), x(i)));
  if (close) parts.push_back(pair(x(0), x(k)));
  return Formula::all_of(parts);
}

// --- eval ------------------------------------------------------------------------------

TEST(EvalTest, EffectivenessAndFunctionality) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    auto m = random_sem(rng, {});
    for (const auto& x : m.declared()) {
      Antecedent a({{x, true}});
      EXPECT_TRUE(eval(m, make_conditional(a, make_var(x))));
      auto b = random_prop(rng, m.declared(), 2);
      EXPECT_TRUE(eval(m, Formula::iff(make_conditional(a, PropFormula::negate(b)),
                                       Formula::negate(make_conditional(a, b)))));
    }
  }
}

TEST(EvalTest, ConditionalsFollowSolutions) {
  auto m = parse_sem("sem\nvar X time=0 parents=[] fn=1\nvar Y time=1 parents=[X] fn=\"~X\"\n");
  EXPECT_FALSE(eval(m, F("[] Y")));
  EXPECT_TRUE(eval(m, F("[~X] Y")));
  EXPECT_TRUE(eval(m, F("[] ~Q")));  // undeclared reads 0
  EXPECT_TRUE(eval(m, F("[Q] (Q & ~Y)")));
}

TEST(EvalTest, InfluenceAtoms) {
  auto m = parse_sem("sem\nvar X time=0 parents=[] fn=0\nvar Y time=1 parents=[X] fn=\"X\"\n");
  EXPECT_TRUE(eval(m, F("X ~> Y")));
  EXPECT_FALSE(eval(m, F("Y ~> X")));
  EXPECT_FALSE(eval(m, F("X ~> Q")));
  // Y = X & U with U undeclared: U belongs to the model's scope
  auto g = parse_sem("sem\nvar Y time=1 parents=[X,U] fn=\"X & U\"\n");
  EXPECT_TRUE(eval(g, F("X ~> Y")));
  EvalOptions narrow;
  narrow.scope = std::set<VariableId>{V("X"), V("Y")};
  EXPECT_FALSE(eval(g, F("X ~> Y"), narrow));
}

TEST(EvalTest, EvaluatorCachesWithoutChangingAnswers) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    auto m = random_sem(rng, {});
    RandomFormulaOptions fo;
    fo.vars = m.declared();
    fo.influence_atom = 0.3;
    SemEvaluator ev(m);
    for (int k = 0; k < 20; ++k) {
      auto f = random_formula(rng, fo);
      EXPECT_EQ(ev(f), eval(m, f)) << print(f);
    }
  }
}

TEST(EvalTest, ProgramsAreThreeValued) {
  auto p = SimProgram::parse("read r := X[]\nwrite X[] := 0\nif r == 1 goto spin\nwrite Y[] := 1\nhalt\nspin: goto spin");
  EXPECT_EQ(eval(p, F("[] Y"), 100), Tri::True);
  EXPECT_EQ(eval(p, F("[X] Y"), 100), Tri::Unknown);
  EXPECT_EQ(eval(p, F("[X] Y | [] Y"), 100), Tri::True);
  EXPECT_EQ(eval(p, F("[X] X"), 100), Tri::True);
  EXPECT_EQ(eval(p, F("X ~> Y"), 100), Tri::Unknown);
  auto q = SimProgram::parse("read r := X[]\nwrite X[] := 0\nwrite Y[] := r\nhalt");
  EXPECT_EQ(eval(q, F("X ~> Y"), 100), Tri::True);
  EXPECT_EQ(eval(q, F("Y ~> X"), 100), Tri::False);
}

TEST(EvalTest, ProgramAndModelAgree) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 15; ++t) {
    RandomSemOptions o;
    o.vars = 4;
    auto m = random_sem(rng, o);
    auto p = sem_to_sim(m);
    RandomFormulaOptions fo;
    fo.vars = m.declared();
    for (int k = 0; k < 10; ++k) {
      auto f = random_formula(rng, fo);
      EXPECT_EQ(eval(p, f, 100000), tri(eval(m, f))) << print(f);
    }
  }
}

// --- state descriptions ------------------------------------------------------------------

TEST(StateDescriptionTest, SingleConditional) {
  auto g = expand_state_descriptions(F("[X] Y"));
  EXPECT_EQ(print(g), "[X] (~X & Y) | [X] (X & Y)");
}

TEST(StateDescriptionTest, TautologyAndContradiction) {
  auto all = expand_state_descriptions(F("[X] Y | ~[X] Y"));
  int n = 0;
  for (auto h = all; h.op() == Op::Or; h = h.lhs()) ++n;
  EXPECT_EQ(n + 1, 4);
  auto none = expand_state_descriptions(F("[X] Y & ~[X] Y"));
  EXPECT_EQ(none.op(), Op::False);
}

TEST(StateDescriptionTest, MatchesTruthTableEntailment) {
  // Each kept description entails f, each dropped one entails ~f.
  auto f = F("[A] B -> [~B] (A | C)");
  auto g = expand_state_descriptions(f);
  std::vector<Formula> kept;
  auto h = g;
  while (h.op() == Op::Or) {
    kept.push_back(h.rhs());
    h = h.lhs();
  }
  kept.push_back(h);
  // 3 variables, 2 antecedents: 64 descriptions
  std::size_t total = 0, entail = 0;
  auto vs = vars_of({"A", "B", "C"});
  auto ants = std::vector<Antecedent>{Antecedent({{V("A"), true}}), Antecedent({{V("B"), false}})};
  for (int mask = 0; mask < 64; ++mask) {
    ++total;
    auto lit = [&](int a, int x) { return ((mask >> (a * 3 + x)) & 1) != 0; };
    bool v = f.evaluate([&](const CondAtom& atom) {
      const auto& c = std::get<Conditional>(atom);
      int a = c.antecedent.as_intervention() == ants[0].as_intervention() ? 0 : 1;
      return c.consequent.evaluate([&](const VariableId& x) { return lit(a, x == vs[0] ? 0 : x == vs[1] ? 1 : 2); });
    });
    entail += v;
  }
  EXPECT_EQ(total, 64u);
  EXPECT_EQ(kept.size(), entail);
}

TEST(StateDescriptionTest, SemanticallyEquivalentOnRandomModels) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 40; ++t) {
    RandomSemOptions o;
    o.vars = 3;
    auto m = random_sem(rng, o);
    RandomFormulaOptions fo;
    fo.vars = m.declared();
    fo.max_antecedents = 2;
    auto f = random_formula(rng, fo);
    auto g = expand_state_descriptions(f);
    EXPECT_EQ(eval(m, f), eval(m, g)) << print(f);
  }
}

TEST(StateDescriptionTest, Budget) {
  EXPECT_THROW(expand_state_descriptions(F("[A] B & [B] C & [C] D"), 8), BudgetExceeded);
  EXPECT_THROW(expand_state_descriptions(F("X ~> Y")), Error);
}

// --- solver ---------------------------------------------------------------------------

void expect_valid(const Formula& f, System sys, const SatResult& r) {
  ASSERT_TRUE(r.sat);
  ASSERT_TRUE(r.certificate && r.witness);
  auto chk = verify_certificate(f, *r.certificate);
  ASSERT_TRUE(chk.ok) << chk.reason << "\n" << r.certificate->str();
  ASSERT_TRUE(eval(*r.witness, f)) << print(f) << "\n" << r.certificate->str() << print_sem(*r.witness, true);
  if (sys == System::AXPlusT) ASSERT_TRUE(is_local(*r.witness)) << print_sem(*r.witness, true);
}

TEST(SolveSatTest, ChainPrefixesAndCycle) {
  for (int k = 1; k <= 8; ++k) {
    auto f = chain_family(k, false);
    auto r = solve_sat(f, System::AX);
    expect_valid(f, System::AX, r);
    EXPECT_FALSE(solve_sat(chain_family(k, true), System::AX).sat) << k;
  }
}

TEST(SolveSatTest, TwoCycleIsUnsat) {
  EXPECT_FALSE(solve_sat(F("([X]Y & [~X]~Y) & ([Y]X & [~Y]~X)"), System::AX).sat);
  EXPECT_TRUE(solve_sat(F("[X]Y & [~X]~Y"), System::AX).sat);
}

TEST(SolveSatTest, TransSeparatesSystems) {
  auto f = F("X ~> Y & Y ~> Z & ~(X ~> Z)");
  auto plus = solve_sat(f, System::AXPlus);
  expect_valid(f, System::AXPlus, plus);
  EXPECT_FALSE(solve_sat(f, System::AXPlusT).sat);
  EXPECT_THROW(solve_sat(f, System::AX), Error);
}

TEST(SolveSatTest, InfluenceCycleIsUnsat) {
  for (auto sys : {System::AXPlus, System::AXPlusT}) {
    EXPECT_FALSE(solve_sat(F("X ~> Y & Y ~> X"), sys).sat);
    EXPECT_FALSE(solve_sat(F("X ~> Y & Y ~> Z & Z ~> X"), sys).sat);
    // a witnessed toggle forces the influence atom
    EXPECT_FALSE(solve_sat(F("[X] Y & [~X] ~Y & ~(X ~> Y)"), sys).sat);
  }
}

TEST(SolveSatTest, EmptyAndConstantFormulas) {
  EXPECT_TRUE(solve_sat(F("true"), System::AX).sat);
  EXPECT_FALSE(solve_sat(F("false"), System::AX).sat);
  EXPECT_FALSE(solve_sat(F("[X] ~X"), System::AX).sat);
  EXPECT_TRUE(solve_sat(F("[] X & [] ~Y"), System::AXPlusT).sat);
}

TEST(SolveSatTest, AgreesWithModelOracleOnL) {
  std::mt19937_64 rng(45);
  int sat = 0;
  for (int t = 0; t < 400; ++t) {
    RandomFormulaOptions fo;
    fo.vars = vars_of({"A", "B", "C"});
    fo.max_antecedents = 2;
    auto f = random_formula(rng, fo);
    auto r = solve_sat(f, System::AX);
    ASSERT_EQ(r.sat, oracle::sat_by_models(f, System::AX)) << print(f);
    ASSERT_EQ(r.sat, oracle::sat_by_certificates(f)) << print(f);
    if (r.sat) {
      ++sat;
      expect_valid(f, System::AX, r);
    }
  }
  EXPECT_GT(sat, 20);
  EXPECT_LT(sat, 380);
}

TEST(SolveSatTest, AgreesWithModelOracleOnLPlus) {
  std::mt19937_64 rng(46);
  for (auto sys : {System::AXPlus, System::AXPlusT}) {
    int sat = 0;
    for (int t = 0; t < 250; ++t) {
      RandomFormulaOptions fo;
      fo.vars = vars_of({"A", "B", "C"});
      fo.max_antecedents = 2;
      fo.influence_atom = 0.4;
      auto f = random_formula(rng, fo);
      auto r = solve_sat(f, sys);
      ASSERT_EQ(r.sat, oracle::sat_by_models(f, sys)) << print(f) << " " << to_string(sys);
      if (r.sat) {
        ++sat;
        expect_valid(f, sys, r);
      }
    }
    EXPECT_GT(sat, 5);
  }
}

TEST(SolveSatTest, ParallelMatchesSerial) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 40; ++t) {
    RandomFormulaOptions fo;
    fo.vars = vars_of({"A", "B", "C", "D"});
    auto f = random_formula(rng, fo);
    auto s = solve_sat(f, System::AX);
    SatOptions po;
    po.exec = Exec::Parallel;
    po.jobs = 4;
    auto p = solve_sat(f, System::AX, po);
    ASSERT_EQ(s.sat, p.sat);
    if (s.sat) EXPECT_EQ(s.certificate->str(), p.certificate->str());
  }
}

TEST(SolveSatTest, WitnessGadgetsForInfluence) {
  auto f = F("X ~> Y & ~(Y ~> Z) & [X] ~Y");
  for (auto sys : {System::AXPlus, System::AXPlusT}) {
    auto r = solve_sat(f, sys);
    expect_valid(f, sys, r);
    bool has_z = false;
    for (const auto& v : r.witness->declared()) has_z = has_z || v.base() == "__Z";
    EXPECT_TRUE(has_z);
    // the influence is witnessed by holding the selector
    auto w = find_influence(*r.witness, V("X"), V("Y"), default_scope(*r.witness));
    ASSERT_TRUE(w);
  }
}

TEST(SolveSatTest, LocalWitnessesUseRelays) {
  auto f = F("[A & B] C & [A & ~B] ~C & [~A] C & A ~> C");
  auto r = solve_sat(f, System::AXPlusT);
  expect_valid(f, System::AXPlusT, r);
  EXPECT_TRUE(is_local(*r.witness));
}

// --- certificates ------------------------------------------------------------------------

TEST(CertificateTest, RoundTripThroughText) {
  for (auto [text, sys] : std::vector<std::pair<const char*, System>>{
           {"[X1]X0 & [~X1]~X0", System::AX}, {"X ~> Y & [X] Y", System::AXPlus}, {"A ~> B & B ~> C", System::AXPlusT}}) {
    auto f = F(text);
    auto r = solve_sat(f, sys);
    ASSERT_TRUE(r.sat);
    auto back = SatCertificate::parse(r.certificate->str());
    EXPECT_EQ(back.str(), r.certificate->str());
    EXPECT_TRUE(verify_certificate(f, back).ok);
  }
  EXPECT_THROW(SatCertificate::parse("cert\norder X\nalpha=\"X=1\" X=1\n"), ParseError);
  try {
    SatCertificate::parse("cert\nsystem AX\nbogus\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CertificateTest, FlippedForcedEntryFails) {
  auto f = F("[X_1]X_0 & [~X_1]~X_0");
  auto c = *solve_sat(f, System::AX).certificate;
  c.table[Intervention::parse("X_1=1")][VariableId("X", {1})] = false;
  auto chk = verify_certificate(f, c);
  EXPECT_FALSE(chk.ok);
  EXPECT_NE(chk.reason.find("effectiveness"), std::string::npos) << chk.reason;
  EXPECT_THROW(synthesize_witness(f, c), InvalidCertificate);
}

TEST(CertificateTest, ChainViolationReportsTriple) {
  // The length-2 chain with X0 placed before X1: the two antecedents on X2 agree on the empty
  // prefix, so their values for X0 must agree, but the formula needs them to differ.
  auto f = chain_family(2, false);
  SatCertificate c;
  c.order = {VariableId("X", {2}), VariableId("X", {0}), VariableId("X", {1})};
  auto i = [](const char* s) { return Intervention::parse(s); };
  auto row = [](bool x0, bool x1, bool x2) {
    return std::map<VariableId, bool>{{VariableId("X", {0}), x0}, {VariableId("X", {1}), x1}, {VariableId("X", {2}), x2}};
  };
  c.table[i("X_1=1")] = row(true, true, false);
  c.table[i("X_1=0")] = row(false, false, false);
  c.table[i("X_2=1")] = row(false, true, true);
  c.table[i("X_2=0")] = row(false, false, false);
  auto chk = verify_certificate(f, c);
  EXPECT_FALSE(chk.ok);
  ASSERT_TRUE(chk.variable);
  EXPECT_EQ(*chk.variable, VariableId("X", {0}));
  EXPECT_EQ(*chk.alpha1, i("X_1=0"));
  EXPECT_EQ(*chk.alpha2, i("X_1=1"));
  // the same table under the right order verifies
  c.order = {VariableId("X", {2}), VariableId("X", {1}), VariableId("X", {0})};
  EXPECT_TRUE(verify_certificate(f, c).ok);
}

TEST(CertificateTest, StructuralRejections) {
  auto f = F("X ~> Y");
  auto c = *solve_sat(f, System::AXPlus).certificate;
  auto bad = c;
  bad.order = {V("Y"), V("X")};
  EXPECT_FALSE(verify_certificate(f, bad).ok);
  bad = c;
  bad.system = System::AX;
  EXPECT_FALSE(verify_certificate(f, bad).ok);
  bad = c;
  bad.influence.clear();
  EXPECT_FALSE(verify_certificate(f, bad).ok);
  bad = c;
  bad.fns.erase(V("Y"));
  EXPECT_FALSE(verify_certificate(f, bad).ok);
}

TEST(CertificateTest, AxPlusCountsBaseInfluence) {
  // The base model's own influence makes ~(X ~> Y) false even without a selector.
  auto f = F("~(X ~> Y) & [X] Y & [~X] ~Y");
  SatCertificate c;
  c.system = System::AXPlus;
  c.order = {V("X"), V("Y")};
  c.table[Intervention::parse("X=1")] = {{V("X"), true}, {V("Y"), true}};
  c.table[Intervention::parse("X=0")] = {{V("X"), false}, {V("Y"), false}};
  c.fns[V("X")] = {false};
  c.fns[V("Y")] = {false, true};
  auto chk = verify_certificate(f, c);
  EXPECT_FALSE(chk.ok);
  EXPECT_NE(chk.reason.find("does not satisfy"), std::string::npos);
}

TEST(CertificateTest, VerifierStepsGrowPolynomially) {
  std::vector<double> steps;
  for (int k = 1; k <= 9; ++k) {
    auto f = chain_family(k, false);
    auto r = solve_sat(f, System::AX);
    steps.push_back(static_cast<double>(verify_certificate(f, *r.certificate).steps));
  }
  // n = k + 1 variables, 2k antecedents: far below n^4
  for (std::size_t i = 0; i < steps.size(); ++i) {
    double n = static_cast<double>(i + 2);
    EXPECT_LT(steps[i], 10 * n * n * n) << i;
  }
}

}  // namespace
}  // namespace oucl
