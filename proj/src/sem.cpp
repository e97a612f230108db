#include "oucl/sem.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <limits>
#include <sstream>

#include "oucl/errors.hpp"

namespace oucl {

namespace {

constexpr std::size_t kTableParentLimit = 10;

// Postfix opcodes; non-negative codes push a parent value.
enum : int { kFalse = -1, kTrue = -2, kNot = -3, kAnd = -4, kOr = -5, kImp = -6, kIff = -7 };

void emit(const PropFormula& f, const std::map<VariableId, int>& pos, std::vector<int>& code) {
  switch (f.op()) {
    case Op::False: code.push_back(kFalse); return;
    case Op::True: code.push_back(kTrue); return;
    case Op::Atom: code.push_back(pos.at(f.atom())); return;
    case Op::Not:
      emit(f.lhs(), pos, code);
      code.push_back(kNot);
      return;
    default:
      emit(f.lhs(), pos, code);
      emit(f.rhs(), pos, code);
      code.push_back(f.op() == Op::And ? kAnd : f.op() == Op::Or ? kOr : f.op() == Op::Implies ? kImp : kIff);
  }
}

bool run_code(const std::vector<int>& code, std::span<const std::uint8_t> pv) {
  std::vector<std::uint8_t> st;
  st.reserve(16);
  for (int c : code) {
    if (c >= 0) {
      st.push_back(pv[static_cast<std::size_t>(c)]);
      continue;
    }
    switch (c) {
      case kFalse: st.push_back(0); break;
      case kTrue: st.push_back(1); break;
      case kNot: st.back() = !st.back(); break;
      default: {
        std::uint8_t b = st.back();
        st.pop_back();
        std::uint8_t a = st.back();
        st.back() = c == kAnd ? (a && b) : c == kOr ? (a || b) : c == kImp ? (!a || b) : (a == b);
      }
    }
  }
  return st.back() != 0;
}

std::size_t row_index(std::span<const std::uint8_t> pv) {
  std::size_t r = 0;
  for (auto b : pv) r = (r << 1) | (b ? 1u : 0u);
  return r;
}

PropFormula shannon(const std::vector<VariableId>& parents, const std::vector<bool>& rows, std::size_t k,
                    std::size_t lo, std::size_t hi) {
  bool all0 = true, all1 = true;
  for (std::size_t r = lo; r < hi; ++r) (rows[r] ? all0 : all1) = false;
  if (all0) return PropFormula::constant(false);
  if (all1) return PropFormula::constant(true);
  std::size_t mid = lo + (hi - lo) / 2;
  PropFormula f0 = shannon(parents, rows, k + 1, lo, mid);
  PropFormula f1 = shannon(parents, rows, k + 1, mid, hi);
  PropFormula p = make_var(parents[k]);
  PropFormula np = PropFormula::negate(p);
  if (f0 == f1) return f0;
  bool c0 = f0.op() == Op::True || f0.op() == Op::False;
  bool c1 = f1.op() == Op::True || f1.op() == Op::False;
  if (c0 && c1) return f1.op() == Op::True ? p : np;
  if (f1.op() == Op::True) return PropFormula::disj(p, f0);
  if (f1.op() == Op::False) return PropFormula::conj(np, f0);
  if (f0.op() == Op::True) return PropFormula::disj(np, f1);
  if (f0.op() == Op::False) return PropFormula::conj(p, f1);
  return PropFormula::disj(PropFormula::conj(p, f1), PropFormula::conj(np, f0));
}

}  // namespace

// --- StructuralFn ------------------------------------------------------------

StructuralFn StructuralFn::constant(bool value) {
  StructuralFn f;
  f.expr_ = PropFormula::constant(value);
  return f;
}

StructuralFn StructuralFn::expression(std::vector<VariableId> parents, PropFormula expr) {
  std::set<VariableId> ps(parents.begin(), parents.end());
  if (ps.size() != parents.size()) throw Error("duplicate parent in parent list");
  for (const auto& v : free_vars(expr))
    if (!ps.count(v)) throw Error("function mentions " + v.str() + ", which is not a listed parent");
  StructuralFn f;
  f.parents_ = std::move(parents);
  f.expr_ = std::move(expr);
  return f;
}

StructuralFn StructuralFn::table(std::vector<VariableId> parents, std::vector<bool> rows) {
  std::set<VariableId> ps(parents.begin(), parents.end());
  if (ps.size() != parents.size()) throw Error("duplicate parent in parent list");
  if (parents.size() >= 63 || rows.size() != (std::size_t{1} << parents.size()))
    throw Error("truth table needs 2^" + std::to_string(parents.size()) + " rows, got " +
                std::to_string(rows.size()));
  StructuralFn f;
  f.parents_ = std::move(parents);
  f.is_table_ = true;
  f.rows_ = std::move(rows);
  return f;
}

bool StructuralFn::evaluate(std::span<const std::uint8_t> pv) const {
  if (is_table_) return rows_[row_index(pv)];
  std::map<VariableId, bool> val;
  for (std::size_t k = 0; k < parents_.size(); ++k) val[parents_[k]] = pv[k] != 0;
  return expr_.evaluate([&](const VariableId& v) { return val.at(v); });
}

std::string StructuralFn::text() const {
  if (!is_table_) return print(expr_);
  std::string s = "table:";
  for (bool b : rows_) s += b ? '1' : '0';
  return s;
}

PropFormula table_to_expr(const std::vector<VariableId>& parents, const std::vector<bool>& rows) {
  if (rows.size() != (std::size_t{1} << parents.size())) throw Error("truth table size mismatch");
  return shannon(parents, rows, 0, 0, rows.size());
}

// --- Valuation -----------------------------------------------------------------

std::string Valuation::str() const {
  std::string s;
  for (const auto& [v, b] : values_) {
    if (!s.empty()) s += ' ';
    s += v.str() + "=" + (b ? "1" : "0");
  }
  return s;
}

bool operator==(const Valuation& a, const Valuation& b) {
  for (const auto& [v, x] : a.values_)
    if (b(v) != x) return false;
  for (const auto& [v, x] : b.values_)
    if (a(v) != x) return false;
  return true;
}

// --- DenseSem ------------------------------------------------------------------

int DenseSem::slot(const VariableId& v) const {
  auto it = index_.find(v);
  return it == index_.end() ? -1 : it->second;
}

bool DenseSem::eval(std::size_t s, std::span<const std::uint8_t> pv) const {
  if (!declared_[s]) return false;
  if (!tables_[s].empty()) return tables_[s][row_index(pv)] != 0;
  return run_code(programs_[s].code, pv);
}

void DenseSem::solve(std::span<const std::int8_t> fixed, std::span<std::uint8_t> values) const {
  std::vector<std::uint8_t> pv;
  for (std::size_t s = 0; s < vars_.size(); ++s) {
    if (fixed[s] >= 0) {
      values[s] = static_cast<std::uint8_t>(fixed[s]);
      continue;
    }
    pv.clear();
    for (int p : parents_[s]) pv.push_back(values[static_cast<std::size_t>(p)]);
    values[s] = eval(s, pv);
  }
}

// --- FiniteSem -----------------------------------------------------------------

FiniteSem::FiniteSem() : FiniteSem(std::map<VariableId, Equation>{}) {}

FiniteSem::FiniteSem(std::map<VariableId, Equation> equations) : equations_(std::move(equations)) {
  for (const auto& [x, eq] : equations_) {
    for (const auto& p : eq.fn.parents()) {
      std::uint64_t tp = time(p);
      if (tp >= eq.time)
        throw TemporalViolation("parent " + p.str() + " (time " + std::to_string(tp) + ") does not precede " +
                                x.str() + " (time " + std::to_string(eq.time) + ")");
    }
  }

  auto d = std::make_shared<DenseSem>();
  std::set<VariableId> all;
  for (const auto& [x, eq] : equations_) {
    all.insert(x);
    all.insert(eq.fn.parents().begin(), eq.fn.parents().end());
  }
  std::vector<std::pair<std::uint64_t, VariableId>> order;
  for (const auto& v : all) order.emplace_back(time(v), v);
  std::sort(order.begin(), order.end());
  for (std::size_t s = 0; s < order.size(); ++s) {
    d->vars_.push_back(order[s].second);
    d->times_.push_back(order[s].first);
    d->index_.emplace(order[s].second, static_cast<int>(s));
  }
  std::size_t n = order.size();
  d->declared_.assign(n, 0);
  d->parents_.assign(n, {});
  d->tables_.assign(n, {});
  d->programs_.assign(n, {});
  for (std::size_t s = 0; s < n; ++s) {
    auto it = equations_.find(d->vars_[s]);
    if (it == equations_.end()) continue;
    const StructuralFn& fn = it->second.fn;
    d->declared_[s] = 1;
    std::map<VariableId, int> pos;
    for (std::size_t k = 0; k < fn.parents().size(); ++k) {
      d->parents_[s].push_back(d->index_.at(fn.parents()[k]));
      pos.emplace(fn.parents()[k], static_cast<int>(k));
    }
    if (fn.is_table()) {
      d->tables_[s].assign(fn.rows().begin(), fn.rows().end());
      continue;
    }
    emit(fn.expr(), pos, d->programs_[s].code);
    std::size_t k = fn.parents().size();
    if (k <= kTableParentLimit) {
      std::vector<std::uint8_t> pv(k);
      auto& t = d->tables_[s];
      t.resize(std::size_t{1} << k);
      for (std::size_t r = 0; r < t.size(); ++r) {
        for (std::size_t j = 0; j < k; ++j) pv[j] = (r >> (k - 1 - j)) & 1u;
        t[r] = run_code(d->programs_[s].code, pv);
      }
    }
  }
  dense_ = std::move(d);
}

std::uint64_t FiniteSem::time(const VariableId& v) const {
  auto it = equations_.find(v);
  return it == equations_.end() ? 0 : it->second.time;
}

std::vector<VariableId> FiniteSem::declared() const {
  std::vector<VariableId> out;
  for (const auto& [x, eq] : equations_) out.push_back(x);
  return out;
}

namespace {

std::vector<std::int8_t> fixed_from(const DenseSem& d, const Intervention& i) {
  std::vector<std::int8_t> fixed(d.size(), -1);
  for (const auto& [v, b] : i) {
    int s = d.slot(v);
    if (s >= 0) fixed[static_cast<std::size_t>(s)] = b ? 1 : 0;
  }
  return fixed;
}

// Solves slots 0..upto inclusive.
void solve_prefix(const DenseSem& d, std::span<const std::int8_t> fixed, std::span<std::uint8_t> vals,
                  std::size_t upto, std::vector<std::uint8_t>& pv) {
  for (std::size_t s = 0; s <= upto; ++s) {
    if (fixed[s] >= 0) {
      vals[s] = static_cast<std::uint8_t>(fixed[s]);
      continue;
    }
    pv.clear();
    for (int p : d.parents(s)) pv.push_back(vals[static_cast<std::size_t>(p)]);
    vals[s] = d.eval(s, pv);
  }
}

}  // namespace

Valuation solve(const FiniteSem& m) { return solve(m, Intervention{}); }

Valuation solve(const FiniteSem& m, const Intervention& i) {
  const DenseSem& d = m.dense();
  auto fixed = fixed_from(d, i);
  std::vector<std::uint8_t> vals(d.size());
  d.solve(fixed, vals);
  std::map<VariableId, bool> out;
  for (std::size_t s = 0; s < d.size(); ++s) out.emplace(d.var(s), vals[s] != 0);
  for (const auto& [v, b] : i) out[v] = b;
  return Valuation(std::move(out));
}

FiniteSem intervene(const FiniteSem& m, const Intervention& i) {
  auto eqs = m.equations();
  for (const auto& [v, b] : i) eqs[v] = Equation{StructuralFn::constant(b), m.time(v)};
  return FiniteSem(std::move(eqs));
}

bool is_local(const FiniteSem& m) {
  for (const auto& [x, eq] : m.equations())
    for (const auto& p : eq.fn.parents())
      if (m.time(p) + 1 != eq.time) return false;
  return true;
}

std::set<VariableId> default_scope(const FiniteSem& m, const std::set<VariableId>& extra) {
  std::set<VariableId> out = extra;
  for (const auto& [x, eq] : m.equations()) out.insert(x);
  return out;
}

// --- influence: frontier search over y's ancestral cone ----------------------
//
// Both runs (x = 0 and x = 1) are evaluated side by side. A state records, for
// every cone variable still needed by a later cone variable, the pair of
// values it takes in the two runs (code = v1 | v2 << 1). Scope variables may
// be left free or held at 0 or 1 in both runs. States with the same frontier
// are merged, so the cost is governed by the frontier width rather than by
// 3^|scope|.

std::optional<InfluenceWitness> find_influence(const FiniteSem& m, const VariableId& x, const VariableId& y,
                                               const std::set<VariableId>& scope, InfluenceOptions opts) {
  if (x == y) throw Error("influence needs two distinct variables");
  const DenseSem& d = m.dense();
  int xs = d.slot(x), ys = d.slot(y);
  if (xs < 0 || ys < 0 || !d.declared(static_cast<std::size_t>(ys))) return std::nullopt;

  std::vector<char> in_cone(d.size(), 0);
  in_cone[static_cast<std::size_t>(ys)] = 1;
  for (int s = ys; s >= 0; --s)
    if (in_cone[static_cast<std::size_t>(s)])
      for (int p : d.parents(static_cast<std::size_t>(s))) in_cone[static_cast<std::size_t>(p)] = 1;
  if (!in_cone[static_cast<std::size_t>(xs)]) return std::nullopt;

  std::vector<int> cone;
  for (int s = 0; s <= ys; ++s)
    if (in_cone[static_cast<std::size_t>(s)]) cone.push_back(s);
  const std::size_t K = cone.size();

  // Step at which each cone variable is last read.
  std::vector<std::size_t> last_use(d.size(), 0);
  for (std::size_t k = 0; k < K; ++k)
    for (int p : d.parents(static_cast<std::size_t>(cone[k]))) last_use[static_cast<std::size_t>(p)] = k;

  // Static frontier slot assignment.
  std::vector<int> fslot(d.size(), -1);
  std::vector<int> free_slots;
  std::vector<std::vector<int>> release(K);
  int width = 0;
  for (std::size_t k = 0; k < K; ++k) {
    auto s = static_cast<std::size_t>(cone[k]);
    if (free_slots.empty()) {
      fslot[s] = width++;
    } else {
      fslot[s] = free_slots.back();
      free_slots.pop_back();
    }
    std::set<int> done;
    for (int p : d.parents(s))
      if (last_use[static_cast<std::size_t>(p)] == k && done.insert(p).second) {
        release[k].push_back(fslot[static_cast<std::size_t>(p)]);
        free_slots.push_back(fslot[static_cast<std::size_t>(p)]);
      }
  }

  struct Entry {
    int prev;
    std::uint8_t choice;  // 0 free, 1 held at 0, 2 held at 1
  };
  std::vector<std::vector<Entry>> layers(K);
  std::vector<std::string> keys{std::string(static_cast<std::size_t>(width), '\0')};
  std::size_t total = 1;
  std::vector<std::uint8_t> pv1, pv2;

  for (std::size_t k = 0; k < K; ++k) {
    auto s = static_cast<std::size_t>(cone[k]);
    const int fs = fslot[s];
    const bool in_domain = scope.count(d.var(s)) && cone[k] != xs && cone[k] != ys;
    std::vector<std::string> next;
    std::unordered_map<std::string, int> seen;
    for (std::size_t si = 0; si < keys.size(); ++si) {
      const std::string& key = keys[si];
      std::uint8_t free_code;
      if (cone[k] == xs) {
        free_code = 2;  // x = 0 in run 1, 1 in run 2
      } else {
        pv1.clear();
        pv2.clear();
        for (int p : d.parents(s)) {
          auto c = static_cast<std::uint8_t>(key[static_cast<std::size_t>(fslot[static_cast<std::size_t>(p)])]);
          pv1.push_back(c & 1u);
          pv2.push_back((c >> 1) & 1u);
        }
        free_code = static_cast<std::uint8_t>(d.eval(s, pv1) | (d.eval(s, pv2) << 1));
      }
      std::array<std::pair<std::uint8_t, std::uint8_t>, 3> opts3{{{0, free_code}, {1, 0}, {2, 3}}};
      std::size_t nopt = in_domain ? 3 : 1;
      for (std::size_t o = 0; o < nopt; ++o) {
        auto [choice, code] = opts3[o];
        if (o > 0 && code == free_code) continue;
        std::string nk = key;
        nk[static_cast<std::size_t>(fs)] = static_cast<char>(code);
        for (int r : release[k])
          if (r != fs) nk[static_cast<std::size_t>(r)] = '\0';
        auto [it, fresh] = seen.emplace(nk, static_cast<int>(next.size()));
        if (!fresh) continue;
        next.push_back(std::move(nk));
        layers[k].push_back({static_cast<int>(si), choice});
        if (++total > opts.state_budget)
          throw ScopeTooLarge("influence search for " + x.str() + " ~> " + y.str() + " exceeded " +
                              std::to_string(opts.state_budget) + " states");
      }
    }
    keys = std::move(next);
  }

  const auto yf = static_cast<std::size_t>(fslot[static_cast<std::size_t>(ys)]);
  for (std::size_t si = 0; si < keys.size(); ++si) {
    auto c = static_cast<std::uint8_t>(keys[si][yf]);
    if (c != 1 && c != 2) continue;
    InfluenceWitness w;
    int idx = static_cast<int>(si);
    for (std::size_t k = K; k-- > 0;) {
      const Entry& e = layers[k][static_cast<std::size_t>(idx)];
      if (e.choice) w.context.set(d.var(static_cast<std::size_t>(cone[k])), e.choice == 2);
      idx = e.prev;
    }
    return w;
  }
  return std::nullopt;
}

bool influences(const FiniteSem& m, const VariableId& x, const VariableId& y, const std::set<VariableId>& scope,
                InfluenceOptions opts) {
  return find_influence(m, x, y, scope, opts).has_value();
}

// --- influence: literal enumeration kernel -----------------------------------

std::optional<InfluenceWitness> influence_by_enumeration(const FiniteSem& m, const VariableId& x,
                                                         const VariableId& y, const std::set<VariableId>& scope,
                                                         std::uint64_t context_budget, Exec exec) {
  if (x == y) throw Error("influence needs two distinct variables");
  // A context that holds y fixed cannot witness anything, so y is left out.
  std::vector<VariableId> domain;
  for (const auto& v : scope)
    if (v != x && v != y) domain.push_back(v);
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    if (total > context_budget / 3)
      throw ScopeTooLarge("3^" + std::to_string(domain.size()) + " contexts exceed the budget of " +
                          std::to_string(context_budget));
    total *= 3;
  }
  if (total > context_budget) throw ScopeTooLarge("context budget exceeded");

  const DenseSem& d = m.dense();
  int xs = d.slot(x), ys = d.slot(y);
  if (xs < 0 || ys < 0 || !d.declared(static_cast<std::size_t>(ys))) return std::nullopt;
  std::vector<int> dslot;
  for (const auto& v : domain) dslot.push_back(d.slot(v));
  const auto upto = static_cast<std::size_t>(ys);

  auto differs = [&](std::uint64_t c, std::vector<std::int8_t>& fixed, std::vector<std::uint8_t>& vals,
                     std::vector<std::uint8_t>& pv) {
    std::fill(fixed.begin(), fixed.end(), -1);
    for (std::size_t k = 0; k < domain.size(); ++k, c /= 3)
      if (c % 3 && dslot[k] >= 0) fixed[static_cast<std::size_t>(dslot[k])] = static_cast<std::int8_t>(c % 3 - 1);
    fixed[static_cast<std::size_t>(xs)] = 0;
    solve_prefix(d, fixed, vals, upto, pv);
    std::uint8_t a = vals[upto];
    fixed[static_cast<std::size_t>(xs)] = 1;
    solve_prefix(d, fixed, vals, upto, pv);
    return a != vals[upto];
  };

  std::uint64_t best = total;
  if (exec == Exec::Serial) {
    std::vector<std::int8_t> fixed(d.size());
    std::vector<std::uint8_t> vals(d.size()), pv;
    for (std::uint64_t c = 0; c < total; ++c)
      if (differs(c, fixed, vals, pv)) {
        best = c;
        break;
      }
  } else {
    std::atomic<std::uint64_t> found{total};
    const auto n = static_cast<std::int64_t>(total);
#pragma omp parallel
    {
      std::vector<std::int8_t> fixed(d.size());
      std::vector<std::uint8_t> vals(d.size()), pv;
#pragma omp for schedule(dynamic, 256)
      for (std::int64_t c = 0; c < n; ++c) {
        auto uc = static_cast<std::uint64_t>(c);
        if (uc > found.load(std::memory_order_relaxed)) continue;
        if (!differs(uc, fixed, vals, pv)) continue;
        std::uint64_t cur = found.load();
        while (uc < cur && !found.compare_exchange_weak(cur, uc)) {
        }
      }
    }
    best = found.load();
  }
  if (best == total) return std::nullopt;
  InfluenceWitness w;
  for (std::size_t k = 0; k < domain.size(); ++k, best /= 3)
    if (best % 3) w.context.set(domain[k], best % 3 == 2);
  return w;
}

// --- mediator --------------------------------------------------------------------

Mediation find_mediator(const FiniteSem& m, const VariableId& x, const VariableId& y,
                        const InfluenceWitness& witness) {
  if (!is_local(m)) throw InvalidWitness("mediator search needs a local model");
  if (m.time(y) <= m.time(x) + 1)
    throw InvalidWitness("time(" + y.str() + ") must exceed time(" + x.str() + ") + 1");
  if (witness.context.contains(x) || witness.context.contains(y))
    throw InvalidWitness("witness context may not fix the endpoints");
  if (witness.x1 == witness.x2) throw InvalidWitness("witness must toggle " + x.str());
  Intervention c1 = witness.context, c2 = witness.context;
  c1.set(x, witness.x1);
  c2.set(x, witness.x2);
  Valuation v1 = solve(m, c1), v2 = solve(m, c2);
  if (v1(y) == v2(y)) throw InvalidWitness("witness does not change " + y.str());

  std::vector<VariableId> parents = m.equations().at(y).fn.parents();
  std::sort(parents.begin(), parents.end());
  Intervention cur;
  for (const auto& p : parents) cur.set(p, v1(p));
  bool yval = v1(y);
  for (const auto& p : parents) {
    if (v1(p) == v2(p)) continue;
    Intervention before = cur;
    cur.set(p, v2(p));
    bool now = solve(m, cur)(y);
    if (now != yval) {
      before.erase(p);
      return Mediation{p, witness, InfluenceWitness{before, v1(p), v2(p)}};
    }
    yval = now;
  }
  // Unreachable for a genuine witness: the walk ends at v2's parent values.
  throw Error("mediator walk did not change " + y.str());
}

// --- model file ---------------------------------------------------------------------

namespace {

struct LineReader {
  std::string_view s;
  std::size_t line;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, i + 1, msg); }
  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  std::string_view word() {
    skip_ws();
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '=') ++i;
    return s.substr(b, i - b);
  }
  VariableId var(std::string_view text, std::size_t col) const {
    try {
      return VariableId::parse(text);
    } catch (const ParseError& e) {
      throw ParseError(line, col + 1, "bad variable '" + std::string(text) + "'");
    }
  }
};

std::string_view strip_comment(std::string_view l) {
  bool quoted = false;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == '"') quoted = !quoted;
    if (l[i] == '#' && !quoted) return l.substr(0, i);
  }
  return l;
}

}  // namespace

FiniteSem parse_sem(std::string_view text) {
  std::map<VariableId, Equation> eqs;
  bool header = false, witness = false;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    LineReader r{strip_comment(raw), lineno};
    if (r.done()) continue;
    std::size_t kwcol = r.i;
    auto kw = r.word();
    if (!header) {
      if (kw != "sem") throw ParseError(lineno, kwcol + 1, "expected 'sem' header");
      if (!r.done()) {
        if (r.word() != "witness") r.fail("unexpected text after 'sem'");
        witness = true;
      }
      if (!r.done()) r.fail("unexpected text after header");
      header = true;
      continue;
    }
    if (kw != "var") throw ParseError(lineno, kwcol + 1, "expected 'var'");
    r.skip_ws();
    std::size_t vcol = r.i;
    VariableId x = r.var(r.word(), vcol);
    if (x.is_reserved() && !witness) throw ParseError(lineno, vcol + 1, "reserved variable name " + x.str());
    if (eqs.count(x)) throw ParseError(lineno, vcol + 1, "variable " + x.str() + " declared twice");
    std::optional<std::uint64_t> time;
    std::vector<VariableId> parents;
    std::optional<std::pair<std::string, std::size_t>> fn_text;
    while (!r.done()) {
      std::size_t kcol = r.i;
      auto key = r.word();
      if (r.i >= r.s.size() || r.s[r.i] != '=') r.fail("expected '=' after '" + std::string(key) + "'");
      ++r.i;
      if (key == "time") {
        std::size_t b = r.i;
        while (r.i < r.s.size() && std::isdigit(static_cast<unsigned char>(r.s[r.i]))) ++r.i;
        if (b == r.i) r.fail("expected a natural number");
        time = std::stoull(std::string(r.s.substr(b, r.i - b)));
      } else if (key == "parents") {
        if (r.i >= r.s.size() || r.s[r.i] != '[') r.fail("expected '['");
        ++r.i;
        while (true) {
          r.skip_ws();
          if (r.i < r.s.size() && r.s[r.i] == ']') {
            ++r.i;
            break;
          }
          std::size_t b = r.i;
          while (r.i < r.s.size() && r.s[r.i] != ',' && r.s[r.i] != ']' && r.s[r.i] != ' ') ++r.i;
          if (b == r.i) r.fail("expected a parent variable");
          parents.push_back(r.var(r.s.substr(b, r.i - b), b));
          r.skip_ws();
          if (r.i < r.s.size() && r.s[r.i] == ',') ++r.i;
        }
      } else if (key == "fn") {
        if (r.i < r.s.size() && r.s[r.i] == '"') {
          std::size_t b = ++r.i;
          while (r.i < r.s.size() && r.s[r.i] != '"') ++r.i;
          if (r.i >= r.s.size()) r.fail("unterminated string");
          fn_text = {{std::string(r.s.substr(b, r.i - b)), b}};
          ++r.i;
        } else {
          std::size_t b = r.i;
          while (r.i < r.s.size() && r.s[r.i] != ' ' && r.s[r.i] != '\t') ++r.i;
          fn_text = {{std::string(r.s.substr(b, r.i - b)), b}};
        }
      } else {
        throw ParseError(lineno, kcol + 1, "unknown key '" + std::string(key) + "'");
      }
    }
    if (!fn_text) r.fail("missing fn=");
    auto& [ft, fcol] = *fn_text;
    StructuralFn fn;
    try {
      if (ft.rfind("table:", 0) == 0) {
        std::vector<bool> rows;
        for (char c : ft.substr(6)) {
          if (c != '0' && c != '1') throw ParseError(lineno, fcol + 1, "table rows must be 0/1");
          rows.push_back(c == '1');
        }
        fn = StructuralFn::table(parents, std::move(rows));
      } else if (ft == "0" || ft == "1") {
        fn = StructuralFn::expression(parents, PropFormula::constant(ft == "1"));
      } else {
        PropFormula e;
        try {
          e = parse_prop(ft, lineno);
        } catch (const ParseError& pe) {
          std::string msg = pe.what();
          throw ParseError(lineno, fcol + pe.column(), msg.substr(msg.find(": ") + 2));
        }
        fn = StructuralFn::expression(parents, e);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, fcol + 1, e.what());
    }
    eqs.emplace(std::move(x), Equation{std::move(fn), time.value_or(0)});
  }
  if (!header) throw ParseError(lineno == 0 ? 1 : lineno, 1, "missing 'sem' header");
  return FiniteSem(std::move(eqs));
}

std::string print_sem(const FiniteSem& m, bool witness_header) {
  std::ostringstream os;
  os << (witness_header ? "sem witness\n" : "sem\n");
  const DenseSem& d = m.dense();
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (!d.declared(s)) continue;
    const auto& eq = m.equations().at(d.var(s));
    os << "var " << d.var(s).str() << " time=" << eq.time << " parents=[";
    for (std::size_t k = 0; k < eq.fn.parents().size(); ++k) os << (k ? "," : "") << eq.fn.parents()[k].str();
    os << "] fn=";
    if (eq.fn.is_table())
      os << eq.fn.text();
    else
      os << '"' << eq.fn.text() << '"';
    os << '\n';
  }
  return os.str();
}

}  // namespace oucl
