#include "oucl/axioms.hpp"

#include <algorithm>

#include "oucl/errors.hpp"
#include "oucl/random.hpp"

namespace oucl {

const char* to_string(Schema s) noexcept {
  switch (s) {
    case Schema::R: return "R";
    case Schema::K: return "K";
    case Schema::FD: return "FD";
    case Schema::C: return "C";
    case Schema::Rec: return "Rec";
    case Schema::Wit: return "Wit";
    case Schema::RecPlus: return "Rec+";
    case Schema::Trans: return "Trans";
  }
  return "?";
}

Schema parse_schema(std::string_view s) {
  for (Schema k : kAllSchemas)
    if (s == to_string(k)) return k;
  if (s == "F/D") return Schema::FD;
  throw Error("unknown axiom schema '" + std::string(s) + "'");
}

bool schema_in_system(Schema s, System sys) noexcept {
  switch (s) {
    case Schema::Wit:
    case Schema::RecPlus: return sys != System::AX;
    case Schema::Trans: return sys == System::AXPlusT;
    default: return true;
  }
}

namespace {

const Conditional* cond(const Formula& f) {
  return f.is_atom() ? std::get_if<Conditional>(&f.atom()) : nullptr;
}
const Influence* infl(const Formula& f) { return f.is_atom() ? std::get_if<Influence>(&f.atom()) : nullptr; }

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f.op() == Op::And) {
    flatten_and(f.lhs(), out);
    flatten_and(f.rhs(), out);
  } else {
    out.push_back(f);
  }
}

std::optional<Literal> literal_of(const PropFormula& p) {
  if (p.is_atom()) return Literal{p.atom(), true};
  if (p.op() == Op::Not && p.lhs().is_atom()) return Literal{p.lhs().atom(), false};
  return std::nullopt;
}

// b is the negation of the literal a: the opposite literal, or ~a itself.
bool complementary(const PropFormula& a, const PropFormula& b) {
  auto la = literal_of(a), lb = literal_of(b);
  if (!la) return false;
  if (lb && lb->var == la->var && lb->positive != la->positive) return true;
  return b.op() == Op::Not && b.lhs() == a;
}

// A conjunction of literals over distinct variables, `true` for none.
std::optional<std::vector<Literal>> conj_literals(const PropFormula& p) {
  std::vector<Literal> out;
  if (p.op() == Op::True) return out;
  auto rec = [&](auto&& self, const PropFormula& q) -> bool {
    if (q.op() == Op::And) return self(self, q.lhs()) && self(self, q.rhs());
    auto l = literal_of(q);
    if (!l) return false;
    for (const auto& o : out)
      if (o.var == l->var) return false;
    out.push_back(*l);
    return true;
  };
  if (!rec(rec, p)) return std::nullopt;
  return out;
}

struct Pair {
  VariableId x;
  Literal ell;
};

// [α & X]l and [α & ~X]~l.
std::optional<Pair> witness_pair(const Formula& a, const Formula& b) {
  const auto* ca = cond(a);
  const auto* cb = cond(b);
  if (!ca || !cb) return std::nullopt;
  auto ell = literal_of(ca->consequent);
  if (!ell || !complementary(ca->consequent, cb->consequent)) return std::nullopt;
  auto ia = ca->antecedent.as_intervention(), ib = cb->antecedent.as_intervention();
  if (ia.size() != ib.size()) return std::nullopt;
  std::optional<VariableId> x;
  for (const auto& [v, val] : ia) {
    auto other = ib.get(v);
    if (!other) return std::nullopt;
    if (*other == val) continue;
    if (x || !val) return std::nullopt;
    x = v;
  }
  if (!x) return std::nullopt;
  return Pair{*x, *ell};
}

bool match_r(const Formula& f) {
  const auto* c = cond(f);
  if (!c) return false;
  auto lits = conj_literals(c->consequent);
  if (!lits || lits->size() != c->antecedent.size()) return false;
  auto want = c->antecedent.literals();
  std::sort(want.begin(), want.end());
  std::sort(lits->begin(), lits->end());
  return want == *lits;
}

bool match_k(const Formula& f) {
  if (f.op() != Op::Implies || f.rhs().op() != Op::Implies) return false;
  const auto *c1 = cond(f.lhs()), *c2 = cond(f.rhs().lhs()), *c3 = cond(f.rhs().rhs());
  if (!c1 || !c2 || !c3 || c1->consequent.op() != Op::Implies) return false;
  auto a = c1->antecedent.as_intervention();
  return a == c2->antecedent.as_intervention() && a == c3->antecedent.as_intervention() &&
         c1->consequent.lhs() == c2->consequent && c1->consequent.rhs() == c3->consequent;
}

bool match_fd(const Formula& f) {
  if (f.op() != Op::Iff || f.rhs().op() != Op::Not) return false;
  const auto *c1 = cond(f.lhs()), *c2 = cond(f.rhs().lhs());
  if (!c1 || !c2 || c1->consequent.op() != Op::Not) return false;
  return c1->antecedent.as_intervention() == c2->antecedent.as_intervention() &&
         c1->consequent.lhs() == c2->consequent;
}

bool match_c(const Formula& f) {
  if (f.op() != Op::Implies || f.lhs().op() != Op::And) return false;
  const auto *c1 = cond(f.lhs().lhs()), *c2 = cond(f.lhs().rhs()), *c3 = cond(f.rhs());
  if (!c1 || !c2 || !c3) return false;
  auto alpha = c1->antecedent.as_intervention();
  if (alpha != c2->antecedent.as_intervention() || !(c2->consequent == c3->consequent)) return false;
  auto beta = conj_literals(c1->consequent);
  if (!beta) return false;
  Intervention both = alpha;
  for (const auto& l : *beta) {
    if (alpha.contains(l.var)) return false;
    both.set(l.var, l.positive);
  }
  return both == c3->antecedent.as_intervention();
}

bool match_rec(const Formula& f) {
  if (f.op() != Op::Implies || f.rhs().op() != Op::Not || f.rhs().lhs().op() != Op::And) return false;
  std::vector<Formula> prem;
  flatten_and(f.lhs(), prem);
  if (prem.size() < 2 || prem.size() % 2) return false;
  std::vector<Pair> chain;
  for (std::size_t i = 0; i < prem.size(); i += 2) {
    auto p = witness_pair(prem[i], prem[i + 1]);
    if (!p) return false;
    chain.push_back(*p);
  }
  auto last = witness_pair(f.rhs().lhs().lhs(), f.rhs().lhs().rhs());
  if (!last) return false;
  chain.push_back(*last);
  const std::size_t k = chain.size();
  for (std::size_t i = 0; i + 1 < k; ++i)
    if (chain[i].ell.var != chain[i + 1].x) return false;
  return chain[k - 1].ell.var == chain[0].x && chain[0].x != chain[k - 1].x;
}

bool match_wit(const Formula& f) {
  if (f.op() != Op::Implies || f.lhs().op() != Op::And) return false;
  const auto* i = infl(f.rhs());
  auto p = witness_pair(f.lhs().lhs(), f.lhs().rhs());
  return i && p && p->x == i->source && p->ell.var == i->target;
}

bool match_recplus(const Formula& f) {
  if (f.op() != Op::Implies || f.rhs().op() != Op::Not) return false;
  const auto* back = infl(f.rhs().lhs());
  if (!back) return false;
  std::vector<Formula> prem;
  flatten_and(f.lhs(), prem);
  std::vector<const Influence*> chain;
  for (const auto& p : prem) {
    const auto* i = infl(p);
    if (!i) return false;
    chain.push_back(i);
  }
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (chain[i]->target != chain[i + 1]->source) return false;
  return back->source == chain.back()->target && back->target == chain.front()->source;
}

bool match_trans(const Formula& f) {
  if (f.op() != Op::Implies || f.lhs().op() != Op::And) return false;
  const auto *a = infl(f.lhs().lhs()), *b = infl(f.lhs().rhs()), *c = infl(f.rhs());
  return a && b && c && a->target == b->source && c->source == a->source && c->target == b->target;
}

}  // namespace

bool match_axiom(const Formula& f, Schema s, System sys) {
  if (!schema_in_system(s, sys)) return false;
  switch (s) {
    case Schema::R: return match_r(f);
    case Schema::K: return match_k(f);
    case Schema::FD: return match_fd(f);
    case Schema::C: return match_c(f);
    case Schema::Rec: return match_rec(f);
    case Schema::Wit: return match_wit(f);
    case Schema::RecPlus: return match_recplus(f);
    case Schema::Trans: return match_trans(f);
  }
  return false;
}

// --- generators --------------------------------------------------------------------------

namespace {

std::size_t below(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(std::mt19937_64& rng) { return below(rng, 2) == 1; }

std::vector<Literal> random_lits(std::mt19937_64& rng, std::vector<VariableId> pool, std::size_t max) {
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t k = below(rng, std::min(max, pool.size()) + 1);
  std::vector<Literal> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({pool[i], coin(rng)});
  return out;
}

std::vector<VariableId> without(std::vector<VariableId> vs, std::initializer_list<VariableId> drop) {
  vs.erase(std::remove_if(vs.begin(), vs.end(),
                          [&](const VariableId& v) { return std::find(drop.begin(), drop.end(), v) != drop.end(); }),
           vs.end());
  return vs;
}

PropFormula conj(const std::vector<Literal>& ls) {
  std::vector<PropFormula> parts;
  for (const auto& l : ls) parts.push_back(make_literal(l));
  return PropFormula::all_of(std::move(parts));
}

Antecedent with(std::vector<Literal> base, const Literal& extra) {
  base.push_back(extra);
  return Antecedent(std::move(base));
}

Literal flip(Literal l) {
  l.positive = !l.positive;
  return l;
}

// [α & X]l & [α & ~X]~l
Formula pair_atoms(const std::vector<Literal>& alpha, const VariableId& x, const Literal& ell) {
  return Formula::conj(make_conditional(with(alpha, {x, true}), make_literal(ell)),
                       make_conditional(with(alpha, {x, false}), make_literal(flip(ell))));
}

// k variables with consecutive entries distinct and first != last.
std::vector<VariableId> chain_vars(std::mt19937_64& rng, const std::vector<VariableId>& vars, std::size_t k) {
  for (;;) {
    std::vector<VariableId> out;
    for (std::size_t i = 0; i < k; ++i) {
      VariableId v = vars[below(rng, vars.size())];
      while (!out.empty() && v == out.back()) v = vars[below(rng, vars.size())];
      out.push_back(v);
    }
    if (out.front() != out.back()) return out;
  }
}

}  // namespace

Formula random_instance(std::mt19937_64& rng, Schema s, const AxiomGenOptions& o) {
  const auto& vs = o.vars;
  if (vs.size() < 3) throw Error("axiom generators need at least three variables");
  auto prop = [&] { return random_prop(rng, vs, o.consequent_depth); };
  auto alpha = [&](std::vector<VariableId> pool) { return random_lits(rng, std::move(pool), o.max_antecedent); };
  switch (s) {
    case Schema::R: {
      auto a = alpha(vs);
      return make_conditional(Antecedent(a), conj(a));
    }
    case Schema::K: {
      Antecedent a(alpha(vs));
      auto b = prop(), c = prop();
      return Formula::implies(make_conditional(a, PropFormula::implies(b, c)),
                              Formula::implies(make_conditional(a, b), make_conditional(a, c)));
    }
    case Schema::FD: {
      Antecedent a(alpha(vs));
      auto b = prop();
      return Formula::iff(make_conditional(a, PropFormula::negate(b)), Formula::negate(make_conditional(a, b)));
    }
    case Schema::C: {
      auto a = alpha(vs);
      std::vector<VariableId> rest;
      for (const auto& v : vs)
        if (std::none_of(a.begin(), a.end(), [&](const Literal& l) { return l.var == v; })) rest.push_back(v);
      auto b = random_lits(rng, rest, 2);
      auto g = prop();
      auto ab = a;
      ab.insert(ab.end(), b.begin(), b.end());
      return Formula::implies(
          Formula::conj(make_conditional(Antecedent(a), conj(b)), make_conditional(Antecedent(a), g)),
          make_conditional(Antecedent(ab), g));
    }
    case Schema::Rec: {
      std::size_t k = 2 + below(rng, std::max<std::size_t>(o.max_chain, 2) - 1);
      auto xs = chain_vars(rng, vs, k);
      std::vector<Literal> ls;
      for (const auto& x : xs) ls.push_back({x, coin(rng)});
      std::vector<Formula> prem;
      for (std::size_t i = 0; i + 1 < k; ++i) prem.push_back(pair_atoms(alpha(without(vs, {xs[i]})), xs[i], ls[i + 1]));
      Formula p = prem.front();
      for (std::size_t i = 1; i < prem.size(); ++i) p = Formula::conj(p, prem[i]);
      return Formula::implies(p, Formula::negate(pair_atoms(alpha(without(vs, {xs[k - 1]})), xs[k - 1], ls[0])));
    }
    case Schema::Wit: {
      auto xs = chain_vars(rng, vs, 2);
      Literal l{xs[1], coin(rng)};
      return Formula::implies(pair_atoms(alpha(without(vs, {xs[0]})), xs[0], l), make_influence(xs[0], xs[1]));
    }
    case Schema::RecPlus: {
      std::size_t k = 2 + below(rng, std::min(std::max<std::size_t>(o.max_chain, 2), vs.size()) - 1);
      auto xs = vs;
      std::shuffle(xs.begin(), xs.end(), rng);
      xs.resize(k);
      std::vector<Formula> prem;
      for (std::size_t i = 0; i + 1 < k; ++i) prem.push_back(make_influence(xs[i], xs[i + 1]));
      return Formula::implies(Formula::all_of(prem), Formula::negate(make_influence(xs[k - 1], xs[0])));
    }
    case Schema::Trans: {
      auto xs = vs;
      std::shuffle(xs.begin(), xs.end(), rng);
      return Formula::implies(Formula::conj(make_influence(xs[0], xs[1]), make_influence(xs[1], xs[2])),
                              make_influence(xs[0], xs[2]));
    }
  }
  throw Error("unknown schema");
}

Formula random_reversibility(std::mt19937_64& rng, const AxiomGenOptions& o) {
  if (o.vars.size() < 3) throw Error("axiom generators need at least three variables");
  auto xs = o.vars;
  std::shuffle(xs.begin(), xs.end(), rng);
  Literal w{xs[0], coin(rng)}, y{xs[1], coin(rng)};
  auto a = random_lits(rng, without(o.vars, {xs[0], xs[1]}), o.max_antecedent);
  return Formula::implies(Formula::conj(make_conditional(with(a, w), make_literal(y)),
                                        make_conditional(with(a, y), make_literal(w))),
                          make_conditional(Antecedent(a), make_literal(y)));
}

}  // namespace oucl
