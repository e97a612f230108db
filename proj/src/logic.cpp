#include "oucl/logic.hpp"

#include <algorithm>
#include <sstream>

#include "logic_internal.hpp"
#include "oucl/errors.hpp"

namespace oucl {

namespace detail {

Compiled compile(const Formula& f) {
  Compiled c;
  auto vs = free_vars(f);
  c.vars.assign(vs.begin(), vs.end());
  if (c.vars.size() > 62) throw ScopeTooLarge("formula mentions more than 62 variables");
  for (std::size_t i = 0; i < c.vars.size(); ++i) c.index[c.vars[i]] = static_cast<int>(i);
  auto as = antecedents_of(f);
  c.ants.assign(as.begin(), as.end());
  c.fixed.assign(c.ants.size(), std::vector<std::int8_t>(c.vars.size(), -1));
  for (std::size_t a = 0; a < c.ants.size(); ++a)
    for (const auto& [v, b] : c.ants[a]) c.fixed[a][c.index.at(v)] = b ? 1 : 0;

  std::vector<CondAtom> seen;
  c.skeleton = f.map_atoms([&](const CondAtom& atom) {
    for (std::size_t k = 0; k < seen.size(); ++k)
      if (same_atom_modulo_antecedent_order(seen[k], atom)) return Expr<int>::atom(static_cast<int>(k));
    IndexedAtom ia;
    if (const auto* cond = std::get_if<Conditional>(&atom)) {
      auto alpha = cond->antecedent.as_intervention();
      ia.ant = static_cast<int>(std::lower_bound(c.ants.begin(), c.ants.end(), alpha) - c.ants.begin());
      ia.cons = cond->consequent.map_atoms([&](const VariableId& v) { return Expr<int>::atom(c.index.at(v)); });
    } else {
      const auto& inf = std::get<Influence>(atom);
      ia.influence = true;
      ia.src = c.index.at(inf.source);
      ia.tgt = c.index.at(inf.target);
      c.has_influence = true;
    }
    seen.push_back(atom);
    c.atoms.push_back(std::move(ia));
    return Expr<int>::atom(static_cast<int>(c.atoms.size() - 1));
  });
  return c;
}

bool table_influence(const std::vector<std::vector<bool>>& fns, int j, int k, std::uint64_t* steps) {
  std::vector<int> others;
  for (int q = 0; q < k; ++q)
    if (q != j) others.push_back(q);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < others.size(); ++i) total *= 3;
  std::vector<std::int8_t> ctx(k + 1, -1);
  std::vector<std::uint8_t> a(k + 1), b(k + 1);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int q : others) {
      ctx[q] = static_cast<std::int8_t>(static_cast<int>(c % 3) - 1);
      c /= 3;
    }
    ctx[j] = 0;
    solve_tables(fns, ctx, k, a);
    ctx[j] = 1;
    solve_tables(fns, ctx, k, b);
    if (steps) *steps += 2 * (k + 1);
    if (a[k] != b[k]) return true;
  }
  return false;
}

bool depends_on(const std::vector<bool>& rows, int k, int q) {
  std::uint64_t bit = std::uint64_t{1} << (k - 1 - q);
  for (std::uint64_t r = 0; r < rows.size(); ++r)
    if (!(r & bit) && rows[r] != rows[r | bit]) return true;
  return false;
}

}  // namespace detail

using detail::Compiled;

// --- eval ------------------------------------------------------------------------------

SemEvaluator::SemEvaluator(const FiniteSem& m, EvalOptions opts) : m_(&m), opts_(std::move(opts)) {
  if (opts_.scope) {
    base_scope_ = *opts_.scope;
  } else {
    const auto& d = m.dense();
    for (std::size_t s = 0; s < d.size(); ++s) base_scope_.insert(d.var(s));
  }
}

bool SemEvaluator::atom(const CondAtom& a) {
  if (const auto* c = std::get_if<Conditional>(&a)) {
    auto alpha = c->antecedent.as_intervention();
    auto it = solutions_.find(alpha);
    if (it == solutions_.end()) it = solutions_.emplace(alpha, solve(*m_, alpha)).first;
    const Valuation& v = it->second;
    return c->consequent.evaluate([&](const VariableId& x) { return v(x); });
  }
  const auto& inf = std::get<Influence>(a);
  auto key = std::make_pair(inf.source, inf.target);
  auto it = influence_.find(key);
  if (it != influence_.end()) return it->second;
  auto scope = base_scope_;
  if (!opts_.scope) {
    scope.insert(inf.source);
    scope.insert(inf.target);
  }
  bool r = influences(*m_, inf.source, inf.target, scope, opts_.influence);
  influence_.emplace(key, r);
  return r;
}

bool SemEvaluator::operator()(const Formula& f) {
  return f.evaluate([&](const CondAtom& a) { return atom(a); });
}

bool eval(const FiniteSem& m, const Formula& f, const EvalOptions& opts) { return SemEvaluator(m, opts)(f); }

Tri eval(const SimProgram& p, const Formula& f, std::uint64_t step_budget, const EvalOptions& opts) {
  std::set<VariableId> scope = opts.scope ? *opts.scope : free_vars(f);
  return evaluate3(f, [&](const CondAtom& a) -> Tri {
    if (const auto* c = std::get_if<Conditional>(&a)) {
      auto vs = free_vars(c->consequent);
      std::vector<VariableId> xs(vs.begin(), vs.end());
      auto vals = query_many(p, c->antecedent.as_intervention(), xs, step_budget);
      return evaluate3(c->consequent, [&](const VariableId& x) {
        return vals[std::lower_bound(xs.begin(), xs.end(), x) - xs.begin()];
      });
    }
    const auto& inf = std::get<Influence>(a);
    auto s = scope;
    s.insert(inf.source);
    s.insert(inf.target);
    auto r = sim_influence(p, inf.source, inf.target, s, step_budget, opts.context_budget, opts.exec);
    if (r.witness) return Tri::True;
    return r.unknown_contexts ? Tri::Unknown : Tri::False;
  });
}

// --- state descriptions ------------------------------------------------------------------

Formula expand_state_descriptions(const Formula& f, std::size_t budget) {
  Compiled c = detail::compile(f);
  if (c.has_influence) throw Error("state descriptions are defined for formulas without influence atoms");
  const std::size_t n = c.vars.size(), na = c.ants.size();
  const std::size_t bits = n * na;
  if (bits > budget || bits > 40)
    throw BudgetExceeded("state descriptions need 2^" + std::to_string(bits) + " cases; budget is 2^" +
                         std::to_string(budget));
  std::vector<Antecedent> ants;
  for (const auto& a : c.ants) ants.push_back(Antecedent::from_intervention(a));

  std::vector<Formula> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    auto bit = [&](std::size_t a, std::size_t x) { return ((mask >> (a * n + x)) & 1) != 0; };
    bool entails = c.skeleton.evaluate([&](int k) {
      const auto& at = c.atoms[k];
      return at.cons.evaluate([&](int x) { return bit(at.ant, x); });
    });
    if (!entails) continue;
    std::vector<Formula> parts;
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<PropFormula> lits;
      for (std::size_t x = 0; x < n; ++x) lits.push_back(make_literal({c.vars[x], bit(a, x)}));
      parts.push_back(make_conditional(ants[a], PropFormula::all_of(std::move(lits))));
    }
    out.push_back(Formula::all_of(std::move(parts)));
  }
  return Formula::any_of(std::move(out));
}

// --- certificates ---------------------------------------------------------------------

const char* to_string(System s) noexcept {
  switch (s) {
    case System::AX: return "AX";
    case System::AXPlus: return "AX+";
    case System::AXPlusT: return "AX+T";
  }
  return "?";
}

System parse_system(std::string_view s) {
  if (s == "AX") return System::AX;
  if (s == "AX+") return System::AXPlus;
  if (s == "AX+T") return System::AXPlusT;
  throw Error("unknown system '" + std::string(s) + "' (expected AX, AX+ or AX+T)");
}

std::string SatCertificate::str() const {
  std::ostringstream o;
  o << "cert\nsystem " << to_string(system) << "\norder";
  for (const auto& v : order) o << ' ' << v.str();
  o << '\n';
  for (const auto& [alpha, row] : table) {
    o << "alpha=\"" << alpha.str() << "\" |";
    for (const auto& v : order) {
      auto it = row.find(v);
      if (it != row.end()) o << ' ' << v.str() << '=' << (it->second ? 1 : 0);
    }
    o << '\n';
  }
  for (const auto& [x, y] : influence) o << "influence " << x.str() << ' ' << y.str() << '\n';
  for (const auto& v : order) {
    auto it = fns.find(v);
    if (it == fns.end()) continue;
    o << "fn " << v.str() << " table:";
    for (bool b : it->second) o << (b ? '1' : '0');
    o << '\n';
  }
  return o.str();
}

namespace {

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

SatCertificate SatCertificate::parse(std::string_view text) {
  SatCertificate c;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    auto bad = [&](const std::string& msg) { return ParseError(line_no, 1, msg); };
    try {
      if (!header) {
        if (line != "cert") throw bad("expected 'cert'");
        header = true;
        continue;
      }
      auto w = words(line);
      if (w[0] == "system") {
        if (w.size() != 2) throw bad("expected 'system AX|AX+|AX+T'");
        c.system = parse_system(w[1]);
      } else if (w[0] == "order") {
        c.order.clear();
        for (std::size_t i = 1; i < w.size(); ++i) c.order.push_back(VariableId::parse(w[i]));
      } else if (line.rfind("alpha=\"", 0) == 0) {
        auto close = line.find('"', 7);
        if (close == std::string_view::npos) throw bad("unterminated antecedent");
        auto alpha = Intervention::parse(line.substr(7, close - 7));
        auto rest = trim(line.substr(close + 1));
        if (rest.empty() || rest.front() != '|') throw bad("expected '|' after the antecedent");
        auto& row = c.table[alpha];
        for (const auto& cell : words(rest.substr(1))) {
          auto eq = cell.find('=');
          if (eq == std::string::npos || eq + 2 != cell.size() || (cell[eq + 1] != '0' && cell[eq + 1] != '1'))
            throw bad("expected X=0 or X=1, got '" + cell + "'");
          row[VariableId::parse(cell.substr(0, eq))] = cell[eq + 1] == '1';
        }
      } else if (w[0] == "influence") {
        if (w.size() != 3) throw bad("expected 'influence X Y'");
        c.influence.emplace(VariableId::parse(w[1]), VariableId::parse(w[2]));
      } else if (w[0] == "fn") {
        if (w.size() != 3 || w[2].rfind("table:", 0) != 0) throw bad("expected 'fn X table:<bits>'");
        std::vector<bool> rows;
        for (char ch : w[2].substr(6)) {
          if (ch != '0' && ch != '1') throw bad("table bits must be 0 or 1");
          rows.push_back(ch == '1');
        }
        c.fns[VariableId::parse(w[1])] = std::move(rows);
      } else {
        throw bad("unknown certificate line '" + w[0] + "'");
      }
    } catch (const ParseError& e) {
      if (e.line() == line_no) throw;
      throw ParseError(line_no, 1, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  if (!header) throw ParseError(line_no + 1, 1, "empty certificate");
  return c;
}

// --- verification ----------------------------------------------------------------------

namespace {

struct Checked {
  Compiled C;
  std::vector<int> at;   // position -> var index
  std::vector<int> pos;  // var index -> position
  std::vector<std::vector<bool>> fns;  // by position
  std::vector<std::pair<int, int>> pairs;  // influence pairs as positions
};

CertCheck check(const Formula& f, const SatCertificate& c, Checked& k) {
  CertCheck out;
  auto fail = [&](std::string r) {
    out.ok = false;
    out.reason = std::move(r);
    return out;
  };
  k.C = detail::compile(f);
  const Compiled& C = k.C;
  out.steps += f.size();
  const int n = static_cast<int>(C.vars.size());
  const int na = static_cast<int>(C.ants.size());
  if (C.has_influence && c.system == System::AX) return fail("influence atoms need AX+ or AX+T");

  if (static_cast<int>(c.order.size()) != n)
    return fail("order lists " + std::to_string(c.order.size()) + " variables; the formula has " +
                std::to_string(n));
  k.at.assign(n, -1);
  k.pos.assign(n, -1);
  for (int p = 0; p < n; ++p) {
    ++out.steps;
    auto it = C.index.find(c.order[p]);
    if (it == C.index.end()) return fail("order names " + c.order[p].str() + ", which the formula does not mention");
    if (k.pos[it->second] >= 0) return fail("order repeats " + c.order[p].str());
    k.pos[it->second] = p;
    k.at[p] = it->second;
  }

  if (static_cast<int>(c.table.size()) != na)
    return fail("table has " + std::to_string(c.table.size()) + " rows; the formula has " + std::to_string(na) +
                " antecedents");
  std::vector<std::vector<std::uint8_t>> T(na, std::vector<std::uint8_t>(n));
  for (int a = 0; a < na; ++a) {
    auto it = c.table.find(C.ants[a]);
    if (it == c.table.end()) return fail("no row for antecedent \"" + C.ants[a].str() + "\"");
    if (static_cast<int>(it->second.size()) != n) return fail("row \"" + C.ants[a].str() + "\" is incomplete");
    for (int x = 0; x < n; ++x) {
      ++out.steps;
      auto cell = it->second.find(C.vars[x]);
      if (cell == it->second.end()) return fail("row \"" + C.ants[a].str() + "\" lacks " + C.vars[x].str());
      T[a][x] = cell->second;
    }
  }

  for (int a = 0; a < na; ++a)
    for (int x = 0; x < n; ++x) {
      ++out.steps;
      if (C.fixed[a][x] >= 0 && T[a][x] != C.fixed[a][x])
        return fail("effectiveness: row \"" + C.ants[a].str() + "\" gives " + C.vars[x].str() + "=" +
                    std::to_string(T[a][x]));
    }

  for (int m = 0; m < n; ++m) {
    int x = k.at[m];
    std::map<std::uint64_t, int> seen;
    for (int a = 0; a < na; ++a) {
      if (C.fixed[a][x] >= 0) continue;
      std::uint64_t key = 0;
      for (int q = 0; q < m; ++q) key = (key << 1) | T[a][k.at[q]];
      out.steps += m + 1;
      auto [it, fresh] = seen.emplace(key, a);
      if (!fresh && T[it->second][x] != T[a][x]) {
        out.alpha1 = C.ants[it->second];
        out.alpha2 = C.ants[a];
        out.variable = C.vars[x];
        return fail("chain consistency: \"" + C.ants[it->second].str() + "\" and \"" + C.ants[a].str() +
                    "\" agree before " + C.vars[x].str() + " but disagree on it");
      }
    }
  }

  std::vector<std::vector<std::uint8_t>> E(n, std::vector<std::uint8_t>(n, 0));
  if (c.system == System::AX) {
    if (!c.influence.empty() || !c.fns.empty()) return fail("AX certificates carry no influence or fn lines");
  } else {
    if (static_cast<int>(c.fns.size()) != n) return fail("expected one fn line per variable");
    k.fns.assign(n, {});
    for (int m = 0; m < n; ++m) {
      int x = k.at[m];
      auto it = c.fns.find(C.vars[x]);
      if (it == c.fns.end()) return fail("no fn line for " + C.vars[x].str());
      if (it->second.size() != (std::size_t{1} << m))
        return fail("fn " + C.vars[x].str() + " needs " + std::to_string(std::size_t{1} << m) + " rows");
      k.fns[m] = it->second;
      for (int a = 0; a < na; ++a) {
        if (C.fixed[a][x] >= 0) continue;
        std::uint64_t key = 0;
        for (int q = 0; q < m; ++q) key = (key << 1) | T[a][k.at[q]];
        out.steps += m + 1;
        if (k.fns[m][key] != (T[a][x] != 0))
          return fail("fn " + C.vars[x].str() + " disagrees with row \"" + C.ants[a].str() + "\"");
      }
    }
    for (const auto& [s, t] : c.influence) {
      auto is = C.index.find(s), it = C.index.find(t);
      if (is == C.index.end() || it == C.index.end() || s == t)
        return fail("influence " + s.str() + " " + t.str() + " is not a pair of distinct formula variables");
      int ps = k.pos[is->second], pt = k.pos[it->second];
      if (ps >= pt) return fail("influence " + s.str() + " " + t.str() + " goes against the order");
      k.pairs.emplace_back(ps, pt);
      E[is->second][it->second] = 1;
    }
    if (c.system == System::AXPlus) {
      std::map<VariableId, Equation> eqs;
      for (int m = 0; m < n; ++m) {
        std::vector<VariableId> parents;
        for (int q = 0; q < m; ++q) parents.push_back(C.vars[k.at[q]]);
        eqs[C.vars[k.at[m]]] = Equation{StructuralFn::table(parents, k.fns[m]), static_cast<std::uint64_t>(m)};
      }
      FiniteSem M(std::move(eqs));
      std::set<VariableId> scope(C.vars.begin(), C.vars.end());
      for (const auto& at : C.atoms) {
        if (!at.influence || E[at.src][at.tgt]) continue;
        out.steps += std::uint64_t{1} << std::min(n, 40);
        if (k.pos[at.src] < k.pos[at.tgt] && influences(M, C.vars[at.src], C.vars[at.tgt], scope))
          E[at.src][at.tgt] = 1;
      }
    } else {
      // closure of direct dependencies and the pairs, by position
      std::vector<std::uint64_t> reach(n, 0);
      for (int m = 0; m < n; ++m) {
        std::uint64_t r = 0;
        for (int q = 0; q < m; ++q) {
          out.steps += std::uint64_t{1} << m;
          if (detail::depends_on(k.fns[m], m, q)) r |= (std::uint64_t{1} << q) | reach[q];
        }
        for (auto [ps, pt] : k.pairs)
          if (pt == m) r |= (std::uint64_t{1} << ps) | reach[ps];
        reach[m] = r;
      }
      for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) E[s][t] = (reach[k.pos[t]] >> k.pos[s]) & 1;
    }
  }

  bool sat = C.skeleton.evaluate([&](int i) {
    const auto& at = C.atoms[i];
    ++out.steps;
    if (at.influence) return E[at.src][at.tgt] != 0;
    return at.cons.evaluate([&](int x) {
      ++out.steps;
      return T[at.ant][x] != 0;
    });
  });
  if (!sat) return fail("the table does not satisfy the formula");
  out.ok = true;
  return out;
}

// Drops predecessors the table ignores. Returns kept positions and the reduced table.
std::pair<std::vector<int>, std::vector<bool>> shrink(const std::vector<bool>& rows, int k) {
  std::vector<int> kept;
  for (int q = 0; q < k; ++q)
    if (detail::depends_on(rows, k, q)) kept.push_back(q);
  std::vector<bool> out(std::size_t{1} << kept.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::uint64_t full = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
      if ((r >> (kept.size() - 1 - i)) & 1) full |= std::uint64_t{1} << (k - 1 - kept[i]);
    out[r] = rows[full];
  }
  return {std::move(kept), std::move(out)};
}

StructuralFn table_fn(const std::vector<VariableId>& parents, const std::vector<bool>& rows) {
  if (parents.empty()) return StructuralFn::constant(rows[0]);
  return StructuralFn::table(parents, rows);
}

VariableId gadget(const char* base, std::vector<std::uint32_t> idx) { return VariableId(base, std::move(idx)); }

// base ∧ no selector set, or exactly one selector set and its source.
StructuralFn with_selectors(std::vector<VariableId> base_parents, const std::vector<bool>& base_rows,
                            const std::vector<VariableId>& all_z,
                            const std::vector<std::pair<VariableId, VariableId>>& sel) {
  if (all_z.empty()) return table_fn(base_parents, base_rows);
  std::vector<PropFormula> none;
  for (const auto& z : all_z) none.push_back(PropFormula::negate(make_var(z)));
  PropFormula base = base_parents.empty() ? PropFormula::constant(base_rows[0]) : table_to_expr(base_parents, base_rows);
  std::vector<PropFormula> cases{PropFormula::conj(PropFormula::all_of(none), base)};
  for (const auto& [z, src] : sel) {
    std::vector<PropFormula> only{make_var(z)};
    for (const auto& z2 : all_z)
      if (z2 != z) only.push_back(PropFormula::negate(make_var(z2)));
    only.push_back(make_var(src));
    cases.push_back(PropFormula::all_of(std::move(only)));
  }
  auto parents = std::move(base_parents);
  auto add = [&](const VariableId& v) {
    if (std::find(parents.begin(), parents.end(), v) == parents.end()) parents.push_back(v);
  };
  for (const auto& [z, src] : sel) add(src);
  for (const auto& z : all_z) add(z);
  return StructuralFn::expression(std::move(parents), PropFormula::any_of(std::move(cases)));
}

}  // namespace

CertCheck verify_certificate(const Formula& f, const SatCertificate& c) {
  Checked k;
  return check(f, c, k);
}

FiniteSem synthesize_witness(const Formula& f, const SatCertificate& c) {
  Checked k;
  auto chk = check(f, c, k);
  if (!chk) throw InvalidCertificate(chk.reason);
  const Compiled& C = k.C;
  const int n = static_cast<int>(C.vars.size());
  auto name = [&](int p) { return C.vars[k.at[p]]; };

  std::vector<std::vector<bool>> fns = k.fns;
  if (c.system == System::AX) {
    fns.assign(n, {});
    for (int m = 0; m < n; ++m) {
      fns[m].assign(std::size_t{1} << m, false);
      const auto& x = name(m);
      for (const auto& [alpha, row] : c.table) {
        if (alpha.contains(x)) continue;
        std::uint64_t key = 0;
        for (int q = 0; q < m; ++q) key = (key << 1) | (row.at(name(q)) ? 1 : 0);
        fns[m][key] = row.at(x);
      }
    }
  }

  std::map<VariableId, Equation> eqs;
  auto pos_u = [](int p) { return static_cast<std::uint32_t>(p); };

  if (c.system != System::AXPlusT) {
    const std::uint64_t shift = c.system == System::AXPlus ? 1 : 0;
    std::vector<VariableId> all_z;
    for (auto [s, t] : k.pairs) {
      all_z.push_back(gadget("__Z", {pos_u(s), pos_u(t)}));
      eqs[all_z.back()] = Equation{StructuralFn::constant(false), 0};
    }
    for (int m = 0; m < n; ++m) {
      auto [kept, rows] = shrink(fns[m], m);
      std::vector<VariableId> parents;
      for (int q : kept) parents.push_back(name(q));
      std::vector<std::pair<VariableId, VariableId>> sel;
      for (auto [s, t] : k.pairs)
        if (t == m) sel.emplace_back(gadget("__Z", {pos_u(s), pos_u(t)}), name(s));
      eqs[name(m)] = Equation{with_selectors(parents, rows, all_z, sel), m + shift};
    }
    return FiniteSem(std::move(eqs));
  }

  // local re-timing
  std::vector<int> relay_to(n, -1);  // highest relay time needed per source position
  auto relay = [&](int q, int t) -> VariableId {
    if (t == q) return name(q);
    relay_to[q] = std::max(relay_to[q], t);
    return gadget("__W", {pos_u(q), pos_u(t)});
  };
  for (int m = 0; m < n; ++m) {
    auto [kept, rows] = shrink(fns[m], m);
    std::vector<VariableId> parents;
    for (int q : kept) parents.push_back(relay(q, m - 1));
    std::vector<VariableId> zs;
    std::vector<std::pair<VariableId, VariableId>> sel;
    for (auto [s, t] : k.pairs) {
      if (t != m) continue;
      VariableId z = gadget("__Z", {pos_u(s), pos_u(t)});
      eqs[z] = Equation{StructuralFn::constant(false), static_cast<std::uint64_t>(m - 1)};
      VariableId prev = name(s);
      for (int tt = s + 1; tt <= m - 1; ++tt) {
        VariableId w = gadget("__W", {pos_u(s), pos_u(m), pos_u(tt)});
        eqs[w] = Equation{StructuralFn::expression({prev}, make_var(prev)), static_cast<std::uint64_t>(tt)};
        prev = w;
      }
      zs.push_back(z);
      sel.emplace_back(z, prev);
    }
    eqs[name(m)] = Equation{with_selectors(parents, rows, zs, sel), static_cast<std::uint64_t>(m)};
  }
  for (int q = 0; q < n; ++q) {
    VariableId prev = name(q);
    for (int t = q + 1; t <= relay_to[q]; ++t) {
      VariableId w = gadget("__W", {pos_u(q), pos_u(t)});
      eqs[w] = Equation{StructuralFn::expression({prev}, make_var(prev)), static_cast<std::uint64_t>(t)};
      prev = w;
    }
  }
  return FiniteSem(std::move(eqs));
}

}  // namespace oucl
