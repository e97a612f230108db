#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "oucl/errors.hpp"
#include "oucl/sim.hpp"

namespace oucl {
namespace {

VariableId V(const char* s) { return VariableId::parse(s); }
SimProgram P(const char* s) { return SimProgram::parse(s); }

const char* kParity = R"(
  set n := 0
loop:
  write X[n] := n % 2
  set n := n + 1
  goto loop
)";

const char* kChain = R"(
  .time "X_*: i0"
  write X[0] := 1
  set n := 1
loop:
  read r := X[n - 1]
  write X[n] := r
  set n := n + 1
  if n < 6 goto loop
  halt
)";

// --- run / query ---------------------------------------------------------------------

TEST(RunTest, SingleWriter) {
  auto t = run(P("write Y[] := 1; halt"), {}, 100);
  ASSERT_EQ(t.writes.size(), 1u);
  EXPECT_EQ(t.writes[0].var, V("Y"));
  EXPECT_TRUE(t.writes[0].bit);
  EXPECT_TRUE(t.halted);
  EXPECT_EQ(t.steps, 2u);
}

TEST(RunTest, InterventionIsReadBack) {
  auto p = P("read r := X[]; write Y[] := r; halt");
  auto t = run(p, Intervention::parse("X=1"), 100);
  EXPECT_EQ(t.as_intervention().str(), "X=1,Y=1");
  EXPECT_EQ(t.writes[0].step, 0u);
  // A blank read is -1, which writes as 0.
  EXPECT_EQ(run(p, {}, 100).as_intervention().str(), "Y=0");
}

TEST(RunTest, UnboundedEmitterStopsAtBudget) {
  auto t = run(P(kParity), {}, 10000);
  EXPECT_FALSE(t.halted);
  EXPECT_EQ(t.steps, 10000u);
  // 3 steps per cell after the initial set.
  ASSERT_EQ(t.writes.size(), 3333u);
  for (std::size_t n = 0; n < t.writes.size(); ++n) {
    EXPECT_EQ(t.writes[n].var, VariableId("X", {static_cast<std::uint32_t>(n)}));
    EXPECT_EQ(t.writes[n].bit, n % 2 == 1);
  }
}

TEST(RunTest, WriteOnceDiscipline) {
  EXPECT_NO_THROW(run(P("write Y[] := 1; write Y[] := 1; halt"), {}, 10));
  EXPECT_EQ(run(P("write Y[] := 1; write Y[] := 1; halt"), {}, 10).writes.size(), 1u);
  EXPECT_THROW(run(P("write Y[] := 1\nwrite Y[] := 0\nhalt"), {}, 10), WriteConflict);
  // Writes to intervened squares are ignored, whatever their value.
  auto t = run(P("write Y[] := 0; write Z[] := 1; halt"), Intervention::parse("Y=1"), 10);
  EXPECT_EQ(t.as_intervention().str(), "Y=1,Z=1");
}

TEST(RunTest, BlankSentinelAndFaults) {
  auto t = run(P("read r := A[3]\nif r == blank goto b\nwrite Q[] := 0\nhalt\nb: write Q[] := 1"), {}, 100);
  EXPECT_EQ(t.value(V("Q")), true);
  EXPECT_TRUE(t.halted);  // ran off the end
  EXPECT_THROW(run(P("set k := 0 - 1\nwrite A[k] := 1"), {}, 10), ProgramError);
  EXPECT_THROW(run(P("set k := 1 / 0"), {}, 10), ProgramError);
}

TEST(QueryTest, Examples) {
  auto w = P("write Y[] := 1; halt");
  EXPECT_EQ(query(w, {}, V("Y"), 10), Tri::True);
  EXPECT_EQ(query(w, {}, V("Nope"), 1000), Tri::Unknown);
  EXPECT_EQ(query(P(kParity), {}, V("X_5"), 1000), Tri::True);
  // Direct execution oracle for the enumerator.
  auto t = run(P(kParity), {}, 1000);
  for (std::uint32_t n = 0; n < 50; ++n) {
    VariableId x("X", {n});
    EXPECT_EQ(query(P(kParity), {}, x, 1000), tri(*t.value(x)));
  }
  EXPECT_EQ(query(P(kParity), {}, V("X_500"), 100), Tri::Unknown);
  EXPECT_EQ(query(P(kParity), Intervention::parse("X_500=0"), V("X_500"), 1), Tri::False);
  auto many = query_many(P(kParity), {}, {V("X_1"), V("X_2"), V("Y")}, 200);
  EXPECT_EQ(many, (std::vector<Tri>{Tri::True, Tri::False, Tri::Unknown}));
}

TEST(ParseProgramTest, Errors) {
  EXPECT_THROW(P("goto nowhere"), ParseError);
  EXPECT_THROW(P("frob x"), ParseError);
  EXPECT_THROW(P("a: halt\na: halt"), ParseError);
  EXPECT_THROW(P("write X_1[] := 1"), ParseError);
  EXPECT_THROW(P("set blank := 1"), ParseError);
  try {
    P("halt\n  set r := (1 + \n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 17u);
  }
  auto p = P(kChain);
  ASSERT_TRUE(p.time_map());
  EXPECT_EQ((*p.time_map())(V("X_4")), 4u);
}

TEST(TimeMapTest, LookupOrder) {
  auto t = TimeMapDecl::parse("X:7, X_2:5, X_*: i0 * 2 + i1, *: 1");
  EXPECT_EQ(t(V("X")), 7u);
  EXPECT_EQ(t(V("X_2")), 5u);
  EXPECT_EQ(t(V("X_3")), 6u);
  EXPECT_EQ(t(V("X_3_1")), 7u);
  EXPECT_EQ(t(V("Other")), 1u);
  EXPECT_EQ(TimeMapDecl::parse("")(V("A")), 0u);
  EXPECT_THROW(TimeMapDecl::parse("X: n + 1"), ParseError);
  EXPECT_THROW(TimeMapDecl::parse("X 1"), ParseError);
  EXPECT_THROW(TimeMapDecl::parse("*: 0 - 1")(V("A")), ProgramError);
}

// --- checkers ----------------------------------------------------------------------------

TEST(FunctionalTest, UnconditionalWriterPasses) {
  auto v = check_functional(P("write Y[] := 1; halt"), {{}, Intervention::parse("Y=1")}, 100);
  EXPECT_TRUE(v.pass()) << v.detail;
}

TEST(FunctionalTest, CopyingProgramPasses) {
  auto p = P("read r := X[]; write Y[] := r; halt");
  auto v = check_functional(p, {{}, Intervention::parse("X=0"), Intervention::parse("X=1")}, 100);
  EXPECT_TRUE(v.pass()) << v.detail;
}

TEST(FunctionalTest, BlanknessProbeIsCaught) {
  auto p = P(R"(
  read r := X[]
  if r != blank goto skip
  write Z[] := 1
skip:
  write X[] := 0
  halt
)");
  auto v = check_functional(p, {{}}, 100);
  ASSERT_EQ(v.kind, Verdict::Kind::Counterexample);
  EXPECT_EQ(v.variable, V("Z"));
  EXPECT_EQ(v.intervention.str(), "X=0");
  EXPECT_EQ(v.lhs, Tri::True);
  EXPECT_EQ(v.rhs, Tri::Unknown);
}

TEST(MonotoneTest, IdentityChainRespectsIndexTime) {
  auto p = P(kChain);
  std::set<VariableId> scope;
  for (std::uint32_t n = 0; n < 6; ++n) scope.insert(VariableId("X", {n}));
  std::vector<InfluenceProbe> probes;
  for (const auto& x : scope)
    for (const auto& y : scope)
      if (x != y) probes.push_back({x, y, scope});
  auto v = check_monotone(p, *p.time_map(), probes, 1000);
  EXPECT_TRUE(v.pass()) << v.detail;
  // ...and the forward influences really are there.
  EXPECT_TRUE(sim_influence(p, V("X_1"), V("X_4"), scope, 1000, 1000, Exec::Serial).witness);
}

TEST(MonotoneTest, BackwardCopyIsCaught) {
  auto p = P("read r := X[9]\nwrite X[5] := r\nwrite X[9] := 0\nhalt");
  auto t = TimeMapDecl::parse("X_*: i0");
  auto v = check_monotone(p, t, {{V("X_9"), V("X_5"), {V("X_5"), V("X_9")}}}, 100);
  ASSERT_EQ(v.kind, Verdict::Kind::Counterexample);
  EXPECT_EQ(v.variable, V("X_5"));
  EXPECT_NE(v.lhs, v.rhs);
  EXPECT_TRUE(check_monotone(p, t, {}, 100).pass());
}

TEST(SimInfluenceTest, SerialAndParallelAgree) {
  auto p = P(R"(
  read a := A[]
  read b := B[]
  read c := C[]
  write Y[] := a > 0 && b == 1 && c != 1
  halt
)");
  std::set<VariableId> scope{V("A"), V("B"), V("C"), V("D"), V("Y")};
  for (const char* x : {"A", "B", "C", "D"}) {
    auto s = sim_influence(p, V(x), V("Y"), scope, 100, 1000, Exec::Serial);
    auto q = sim_influence(p, V(x), V("Y"), scope, 100, 1000, Exec::Parallel);
    ASSERT_EQ(s.witness.has_value(), q.witness.has_value());
    EXPECT_EQ(s.witness.has_value(), std::string(x) != "D");
    if (s.witness) EXPECT_EQ(s.witness->context, q.witness->context);
    EXPECT_EQ(s.unknown_contexts, q.unknown_contexts);
  }
  EXPECT_THROW(sim_influence(p, V("A"), V("Y"), scope, 100, 20, Exec::Serial), ScopeTooLarge);
}

TEST(WeakEquivTest, Examples) {
  auto one = P("write Y[] := 1; halt");
  auto other = P("set a := 3\nwrite Y[] := a - 2\nhalt");
  EXPECT_TRUE(weak_equiv(one, other, {V("Y")}, 100).pass());
  auto zero = P("write Y[] := 0; halt");
  auto v = weak_equiv(one, zero, {V("Y")}, 100);
  EXPECT_EQ(v.kind, Verdict::Kind::Counterexample);
  EXPECT_EQ(v.variable, V("Y"));
  auto w = weak_equiv(P("halt"), P("l: goto l"), {V("Q")}, 100);
  EXPECT_EQ(w.kind, Verdict::Kind::Indeterminate);
  auto u = weak_equiv(one, P("l: goto l"), {V("Y")}, 100);
  EXPECT_EQ(u.kind, Verdict::Kind::Counterexample);
  EXPECT_EQ(u.rhs, Tri::Unknown);
}

// --- properties over random programs ------------------------------------------------------
//
// Random loop-free programs over squares A[0..3] and B[], one statement per line.

std::string random_program(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 9), reg(0, 2), cell(0, 4), bit(0, 1);
  auto square = [&]() {
    int c = cell(rng);
    return c == 4 ? std::string("B[]") : "A[" + std::to_string(c) + "]";
  };
  std::ostringstream os;
  int n = 6 + pick(rng), labels = 0;
  for (int k = 0; k < n; ++k) {
    int r = reg(rng);
    switch (pick(rng) % 5) {
      case 0:
      case 1: os << "read r" << r << " := " << square() << "\n"; break;
      case 2: os << "write " << square() << " := (r" << r << " + r" << reg(rng) << ") % 2\n"; break;
      case 3: os << "write " << square() << " := r" << r << " == blank\n"; break;
      default:
        os << "if r" << r << (bit(rng) ? " == blank" : " > 0") << " goto L" << labels << "\n";
        os << "write " << square() << " := " << bit(rng) << "\n";
        os << "L" << labels++ << ":\n";
    }
  }
  os << "halt\n";
  return os.str();
}

// Source-level realization of i(p): writes i first, then guards every write
// so that intervened squares are skipped. Independent of the interpreter's own
// intervention handling.
std::string apply_intervention(const std::string& src, const Intervention& i, int tag) {
  std::ostringstream os;
  for (const auto& [v, b] : i) {
    os << "write " << v.base() << "[";
    for (std::size_t k = 0; k < v.indices().size(); ++k) os << (k ? "," : "") << v.indices()[k];
    os << "] := " << b << "\n";
  }
  std::istringstream in(src);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.rfind("write ", 0) != 0) {
      os << line << "\n";
      continue;
    }
    auto lb = line.find('['), rb = line.find(']');
    std::string base = line.substr(6, lb - 6), idx = line.substr(lb + 1, rb - lb - 1);
    std::string skip = "G" + std::to_string(tag) + "_" + std::to_string(n++);
    for (const auto& [v, b] : i) {
      if (v.base() != base) continue;
      if (idx.empty() != v.indices().empty()) continue;
      if (idx.empty())
        os << "goto " << skip << "\n";
      else
        os << "if " << idx << " == " << v.indices()[0] << " goto " << skip << "\n";
    }
    os << line << "\n" << skip << ":\n";
  }
  return os.str();
}

std::optional<std::map<VariableId, bool>> outcome(const SimProgram& p, const Intervention& i) {
  try {
    auto t = run(p, i, 10000);
    EXPECT_TRUE(t.halted);
    std::map<VariableId, bool> m;
    for (const auto& w : t.writes) EXPECT_TRUE(m.emplace(w.var, w.bit).second) << "square written twice";
    return m;
  } catch (const WriteConflict&) {
    return std::nullopt;
  }
}

TEST(SimPropertyTest, DeterminismAndOverride) {
  std::mt19937_64 rng(21);
  std::vector<VariableId> sq{V("A_0"), V("A_1"), V("A_2"), V("B")};
  auto all = all_interventions(sq);
  for (int t = 0; t < 200; ++t) {
    auto p = SimProgram::parse(random_program(rng));
    for (const auto& i : all) {
      auto a = outcome(p, i), b = outcome(p, i);
      ASSERT_EQ(a, b);
      if (!a) continue;
      for (const auto& [v, bit] : i) ASSERT_EQ(a->at(v), bit);
    }
  }
}

TEST(SimPropertyTest, InterventionsCompose) {
  std::mt19937_64 rng(22);
  std::vector<VariableId> sq{V("A_0"), V("A_3"), V("B")};
  auto all = all_interventions(sq);
  int compared = 0;
  for (int t = 0; t < 150; ++t) {
    std::string src = random_program(rng);
    auto p = SimProgram::parse(src);
    for (std::size_t a = 0; a < all.size(); a += 2)
      for (std::size_t b = 1; b < all.size(); b += 3) {
        const auto& inner = all[a];
        const auto& outer = all[b];
        auto direct = outcome(p, Intervention::compose(outer, inner));
        auto stacked_src = apply_intervention(apply_intervention(src, inner, 0), outer, 1);
        auto stacked = outcome(SimProgram::parse(stacked_src), {});
        ASSERT_EQ(direct, stacked) << src << "---\n" << stacked_src;
        ++compared;
      }
  }
  EXPECT_GT(compared, 1000);
}

}  // namespace
}  // namespace oucl
