#include "oucl/bridge.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>

#include "oucl/errors.hpp"

namespace oucl {

namespace {

std::string square(const VariableId& v) {
  std::string s = v.base() + "[";
  for (std::size_t k = 0; k < v.indices().size(); ++k) s += (k ? "," : "") + std::to_string(v.indices()[k]);
  return s + "]";
}

// Fully parenthesized DSL boolean expression; atoms map to registers holding 0/1.
std::string to_dsl(const PropFormula& f, const std::map<VariableId, std::string>& reg) {
  switch (f.op()) {
    case Op::False: return "0";
    case Op::True: return "1";
    case Op::Atom: return reg.at(f.atom());
    case Op::Not: return "!" + to_dsl(f.lhs(), reg);
    case Op::And: return "(" + to_dsl(f.lhs(), reg) + " && " + to_dsl(f.rhs(), reg) + ")";
    case Op::Or: return "(" + to_dsl(f.lhs(), reg) + " || " + to_dsl(f.rhs(), reg) + ")";
    case Op::Implies: return "(!" + to_dsl(f.lhs(), reg) + " || " + to_dsl(f.rhs(), reg) + ")";
    case Op::Iff: return "(" + to_dsl(f.lhs(), reg) + " == " + to_dsl(f.rhs(), reg) + ")";
  }
  return "0";
}

}  // namespace

std::string sem_to_sim_text(const FiniteSem& m) {
  const DenseSem& d = m.dense();
  // Declared variables in evaluation order get Calc numbers.
  std::vector<std::size_t> decl;
  std::map<std::size_t, std::size_t> calc_of;
  for (std::size_t s = 0; s < d.size(); ++s)
    if (d.declared(s)) {
      calc_of[s] = decl.size();
      decl.push_back(s);
    }
  // Call sites per Calc: 0 is the main loop, then one per (caller, parent).
  std::vector<std::size_t> sites(decl.size(), 1);
  std::ostringstream os;
  os << "# generated by oucl compile: one Calc block per declared variable\n";
  os << ".time \"" << TimeMapDecl::from_model(m).text() << "\"\n";
  for (std::size_t j = 0; j < decl.size(); ++j) {
    os << "  set ra_" << j << " := 0\n";
    os << "  goto calc_" << j << "  # " << d.var(decl[j]).str() << "\n";
    os << "ret_" << j << "_0:\n";
  }

  std::set<std::string> bases{"X"};
  for (std::size_t s = 0; s < d.size(); ++s) bases.insert(d.var(s).base());
  os << "  set n := 0\n";
  std::size_t k = 0;
  for (const auto& b : bases) {
    os << "  read r := " << b << "[]\n  if r != blank goto s_" << k << "\n  write " << b << "[] := 0\ns_" << k
       << ":\n";
    ++k;
  }
  os << "stream:\n";
  for (const auto& b : bases) {
    os << "  read r := " << b << "[n]\n  if r != blank goto s_" << k << "\n  write " << b << "[n] := 0\ns_" << k
       << ":\n";
    ++k;
  }
  os << "  set n := n + 1\n  goto stream\n";

  for (std::size_t j = 0; j < decl.size(); ++j) {
    std::size_t s = decl[j];
    const VariableId& x = d.var(s);
    const StructuralFn& fn = m.equations().at(x).fn;
    os << "calc_" << j << ":\n";
    os << "  read c := " << square(x) << "\n  if c != blank goto done_" << j << "\n";
    std::map<VariableId, std::string> reg;
    for (std::size_t q = 0; q < fn.parents().size(); ++q) {
      const VariableId& pv = fn.parents()[q];
      std::string r = "p_" + std::to_string(j) + "_" + std::to_string(q);
      std::string have = "have_" + std::to_string(j) + "_" + std::to_string(q);
      reg.emplace(pv, r);
      os << "  read " << r << " := " << square(pv) << "\n  if " << r << " != blank goto " << have << "\n";
      auto ps = static_cast<std::size_t>(d.slot(pv));
      if (d.declared(ps)) {
        std::size_t callee = calc_of.at(ps);
        std::size_t site = sites[callee]++;
        os << "  set ra_" << callee << " := " << site << "\n  goto calc_" << callee << "\nret_" << callee << "_" << site
           << ":\n  read " << r << " := " << square(pv) << "\n";
      } else {
        os << "  write " << square(pv) << " := 0\n  set " << r << " := 0\n";
      }
      os << have << ":\n";
    }
    PropFormula f = fn.is_table() ? table_to_expr(fn.parents(), fn.rows()) : fn.expr();
    os << "  write " << square(x) << " := " << to_dsl(f, reg) << "\n";
    os << "done_" << j << ":\n";
  }
  // Return dispatch, emitted last so every call site is known.
  std::string text = os.str();
  std::ostringstream ret;
  for (std::size_t j = 0; j < decl.size(); ++j) {
    std::ostringstream r;
    for (std::size_t site = 0; site < sites[j]; ++site)
      r << "  if ra_" << j << " == " << site << " goto ret_" << j << "_" << site << "\n";
    std::string marker = "done_" + std::to_string(j) + ":\n";
    auto at = text.find(marker);
    text.insert(at + marker.size(), r.str());
  }
  return text;
}

SimProgram sem_to_sim(const FiniteSem& m) { return SimProgram::parse(sem_to_sim_text(m)); }

FiniteSem sim_to_sem(const SimProgram& p, const std::vector<VariableId>& vars_in, const TimeMapDecl& t,
                     std::uint64_t step_budget, Exec exec) {
  std::vector<VariableId> vars = vars_in;
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  std::vector<std::uint64_t> times;
  for (const auto& v : vars) times.push_back(t(v));

  struct Block {
    std::vector<std::size_t> earlier;  // indices into vars
    std::size_t offset = 0;
    std::size_t rows = 0;
  };
  std::vector<Block> blocks(vars.size());
  std::size_t cells = 0;
  for (std::size_t x = 0; x < vars.size(); ++x) {
    for (std::size_t y = 0; y < vars.size(); ++y)
      if (times[y] < times[x]) blocks[x].earlier.push_back(y);
    if (blocks[x].earlier.size() > 24)
      throw ScopeTooLarge("extracting " + vars[x].str() + " needs 2^" + std::to_string(blocks[x].earlier.size()) +
                          " runs");
    blocks[x].rows = std::size_t{1} << blocks[x].earlier.size();
    blocks[x].offset = cells;
    cells += blocks[x].rows;
  }
  std::vector<std::size_t> owner(cells);
  for (std::size_t x = 0; x < vars.size(); ++x)
    std::fill(owner.begin() + static_cast<std::ptrdiff_t>(blocks[x].offset),
              owner.begin() + static_cast<std::ptrdiff_t>(blocks[x].offset + blocks[x].rows), x);

  auto row_intervention = [&](std::size_t x, std::size_t r) {
    Intervention i;
    const auto& e = blocks[x].earlier;
    for (std::size_t k = 0; k < e.size(); ++k) i.set(vars[e[k]], (r >> (e.size() - 1 - k)) & 1u);
    return i;
  };

  std::vector<Tri> value(cells, Tri::Unknown);
  std::exception_ptr err;
  std::size_t err_at = cells;
  std::mutex mu;
  auto cell = [&](std::size_t c) {
    std::size_t x = owner[c];
    value[c] = query(p, row_intervention(x, c - blocks[x].offset), vars[x], step_budget);
  };
  const auto n = static_cast<std::int64_t>(cells);
  if (exec == Exec::Serial) {
    for (std::size_t c = 0; c < cells; ++c) cell(c);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t c = 0; c < n; ++c) {
      try {
        cell(static_cast<std::size_t>(c));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (static_cast<std::size_t>(c) < err_at) {
          err_at = static_cast<std::size_t>(c);
          err = std::current_exception();
        }
      }
    }
    if (err) std::rethrow_exception(err);
  }
  for (std::size_t c = 0; c < cells; ++c)
    if (value[c] == Tri::Unknown) {
      std::size_t x = owner[c];
      auto i = row_intervention(x, c - blocks[x].offset);
      throw ExtractionIncomplete("cell " + vars[x].str() + " under {" + i.str() + "} unwritten within " +
                                 std::to_string(step_budget) + " steps");
    }

  std::map<VariableId, Equation> eqs;
  for (std::size_t x = 0; x < vars.size(); ++x) {
    const Block& b = blocks[x];
    const std::size_t w = b.earlier.size();
    auto at = [&](std::size_t r) { return value[b.offset + r] == Tri::True; };
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < w; ++k) {
      std::size_t bit = std::size_t{1} << (w - 1 - k);
      for (std::size_t r = 0; r < b.rows; ++r)
        if (at(r) != at(r ^ bit)) {
          keep.push_back(k);
          break;
        }
    }
    std::vector<VariableId> parents;
    for (auto k : keep) parents.push_back(vars[b.earlier[k]]);
    std::vector<bool> rows(std::size_t{1} << keep.size());
    for (std::size_t q = 0; q < rows.size(); ++q) {
      std::size_t r = 0;
      for (std::size_t j = 0; j < keep.size(); ++j)
        if ((q >> (keep.size() - 1 - j)) & 1u) r |= std::size_t{1} << (w - 1 - keep[j]);
      rows[q] = at(r);
    }
    eqs.emplace(vars[x], Equation{StructuralFn::table(std::move(parents), std::move(rows)), times[x]});
  }
  return FiniteSem(std::move(eqs));
}

Verdict check_equiv(const FiniteSem& m, const SimProgram& p, const std::vector<VariableId>& vars,
                    const std::vector<Intervention>& interventions, std::uint64_t step_budget, Exec exec) {
  // Per intervention: index of the first mismatching var, and whether it was Unknown.
  struct Result {
    std::size_t var = SIZE_MAX;
    bool unknown = false;
    bool expect = false;
    Tri got = Tri::Unknown;
  };
  std::vector<Result> res(interventions.size());
  std::exception_ptr err;
  std::size_t err_at = SIZE_MAX;
  std::mutex mu;
  auto one = [&](std::size_t k) {
    const Intervention& i = interventions[k];
    Valuation v = solve(m, i);
    auto got = query_many(p, i, vars, step_budget);
    // A definite mismatch outranks an earlier unanswered query.
    for (std::size_t q = 0; q < vars.size(); ++q)
      if (got[q] != Tri::Unknown && got[q] != tri(v(vars[q]))) {
        res[k] = {q, false, v(vars[q]), got[q]};
        return;
      }
    for (std::size_t q = 0; q < vars.size(); ++q)
      if (got[q] == Tri::Unknown) {
        res[k] = {q, true, v(vars[q]), got[q]};
        return;
      }
  };
  const auto n = static_cast<std::int64_t>(interventions.size());
  if (exec == Exec::Serial) {
    for (std::size_t k = 0; k < interventions.size(); ++k) one(k);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t k = 0; k < n; ++k) {
      try {
        one(static_cast<std::size_t>(k));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (static_cast<std::size_t>(k) < err_at) {
          err_at = static_cast<std::size_t>(k);
          err = std::current_exception();
        }
      }
    }
    if (err) std::rethrow_exception(err);
  }

  auto report = [&](std::size_t k) {
    const Result& r = res[k];
    Verdict out;
    out.kind = r.unknown ? Verdict::Kind::Indeterminate : Verdict::Kind::Counterexample;
    out.intervention = interventions[k];
    out.variable = vars[r.var];
    out.lhs = tri(r.expect);
    out.rhs = r.got;
    out.detail = vars[r.var].str() + " under {" + interventions[k].str() + "}: model " + (r.expect ? "1" : "0") +
                 ", program " + (r.unknown ? "unwritten within " + std::to_string(step_budget) + " steps"
                                           : std::string(r.got == Tri::True ? "1" : "0"));
    return out;
  };
  for (std::size_t k = 0; k < res.size(); ++k)
    if (res[k].var != SIZE_MAX && !res[k].unknown) return report(k);
  for (std::size_t k = 0; k < res.size(); ++k)
    if (res[k].var != SIZE_MAX) return report(k);
  Verdict ok;
  ok.detail = std::to_string(interventions.size()) + " interventions x " + std::to_string(vars.size()) +
              " variables agree";
  return ok;
}

}  // namespace oucl
