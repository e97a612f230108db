#include "oucl/proof.hpp"

#include <cctype>
#include <sstream>

#include "oucl/errors.hpp"
#include "oucl/logic.hpp"

namespace oucl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t parse_number(std::string_view s, std::size_t line, const char* what) {
  if (s.empty() || s.size() > 9) throw ParseError(line, 1, std::string("expected ") + what);
  std::size_t n = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError(line, 1, std::string("expected ") + what);
    n = n * 10 + static_cast<std::size_t>(c - '0');
  }
  return n;
}

Justification parse_just(std::string_view s, std::size_t line) {
  Justification j;
  std::istringstream in{std::string(s)};
  std::string head;
  in >> head;
  if (head.rfind("ax:", 0) == 0) {
    j.kind = Justification::Kind::Axiom;
    try {
      j.schema = parse_schema(head.substr(3));
    } catch (const Error& e) {
      throw ParseError(line, 1, e.what());
    }
  } else if (head == "taut") {
    j.kind = Justification::Kind::Taut;
  } else if (head == "mp") {
    j.kind = Justification::Kind::MP;
    std::string a, b;
    in >> a >> b;
    j.a = parse_number(a, line, "two line numbers after mp");
    j.b = parse_number(b, line, "two line numbers after mp");
  } else if (head == "rw") {
    j.kind = Justification::Kind::RW;
    std::string a;
    in >> a;
    j.a = parse_number(a, line, "a line number after rw");
    std::string rest, tok;
    while (in >> tok) rest += tok;
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']')
      throw ParseError(line, 1, "expected an antecedent like [X=1,Y=0] after rw");
    try {
      j.alpha = Intervention::parse(rest.substr(1, rest.size() - 2));
    } catch (const Error& e) {
      throw ParseError(line, 1, e.what());
    }
  } else {
    throw ParseError(line, 1, "unknown justification '" + head + "'");
  }
  std::string extra;
  if (in >> extra) throw ParseError(line, 1, "unexpected '" + extra + "' after the justification");
  return j;
}

std::string just_str(const Justification& j) {
  switch (j.kind) {
    case Justification::Kind::Axiom: return std::string("ax:") + to_string(j.schema);
    case Justification::Kind::Taut: return "taut";
    case Justification::Kind::MP: return "mp " + std::to_string(j.a) + " " + std::to_string(j.b);
    case Justification::Kind::RW: return "rw " + std::to_string(j.a) + " [" + j.alpha.str() + "]";
  }
  return "?";
}

}  // namespace

Derivation Derivation::parse(std::string_view text) {
  Derivation d;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    auto dot = line.find('.');
    if (dot == std::string_view::npos) throw ParseError(line_no, 1, "expected 'n. <formula> ; <justification>'");
    DerivationLine dl;
    dl.source_line = line_no;
    dl.number = parse_number(trim(line.substr(0, dot)), line_no, "a line number");
    if (dl.number != d.lines.size() + 1)
      throw ParseError(line_no, 1, "expected line number " + std::to_string(d.lines.size() + 1));
    auto body = line.substr(dot + 1);
    auto semi = body.rfind(';');
    if (semi == std::string_view::npos) throw ParseError(line_no, 1, "missing '; <justification>'");
    auto ftext = trim(body.substr(0, semi));
    if (ftext.find('[') != std::string_view::npos || ftext.find("~>") != std::string_view::npos)
      dl.formula = parse_formula(ftext, line_no);
    else
      dl.formula = parse_prop(ftext, line_no);
    dl.just = parse_just(trim(body.substr(semi + 1)), line_no);
    d.lines.push_back(std::move(dl));
  }
  return d;
}

std::string print(const LineFormula& f) {
  return std::visit([](const auto& g) { return print(g); }, f);
}

std::string Derivation::str() const {
  std::string out;
  for (const auto& l : lines) out += std::to_string(l.number) + ". " + print(l.formula) + " ; " + just_str(l.just) + "\n";
  return out;
}

// --- tautologies -----------------------------------------------------------------------

namespace {

template <class Atom, class Same>
bool taut(const Expr<Atom>& f, Same same) {
  std::vector<Atom> atoms;
  f.for_each_atom([&](const Atom& a) {
    for (const auto& b : atoms)
      if (same(a, b)) return;
    atoms.push_back(a);
  });
  if (atoms.size() > 24) throw ScopeTooLarge("tautology check over more than 24 atoms");
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << atoms.size()); ++m) {
    bool v = f.evaluate([&](const Atom& a) {
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (same(a, atoms[i])) return ((m >> i) & 1) != 0;
      return false;
    });
    if (!v) return false;
  }
  return true;
}

}  // namespace

bool is_tautology(const Formula& f) { return taut(f, same_atom_modulo_antecedent_order); }
bool is_tautology(const PropFormula& f) {
  return taut(f, [](const VariableId& a, const VariableId& b) { return a == b; });
}

// --- checking ----------------------------------------------------------------------------

namespace {

bool same_line(const LineFormula& a, const LineFormula& b) {
  if (a.index() != b.index()) return false;
  if (const auto* fa = std::get_if<Formula>(&a)) return same_modulo_antecedent_order(*fa, std::get<Formula>(b));
  return std::get<PropFormula>(a) == std::get<PropFormula>(b);
}

// Is `imp` the formula `lhs -> rhs`?
bool is_implication(const LineFormula& imp, const LineFormula& lhs, const LineFormula& rhs) {
  if (imp.index() != lhs.index() || imp.index() != rhs.index()) return false;
  return std::visit(
      [&](const auto& f) {
        using E = std::decay_t<decltype(f)>;
        if (f.op() != Op::Implies) return false;
        return same_line(LineFormula{f.lhs()}, lhs) && same_line(LineFormula{f.rhs()}, rhs) &&
               std::holds_alternative<E>(lhs);
      },
      imp);
}

const Conditional* cond(const Formula& f) {
  return f.is_atom() ? std::get_if<Conditional>(&f.atom()) : nullptr;
}

}  // namespace

ProofCheck check_derivation(const Derivation& d, System sys) {
  for (std::size_t i = 0; i < d.lines.size(); ++i) {
    const auto& l = d.lines[i];
    auto fail = [&](std::string why) { return ProofCheck{false, l.number, std::move(why)}; };
    auto earlier = [&](std::size_t k) -> const DerivationLine* {
      for (std::size_t j = 0; j < i; ++j)
        if (d.lines[j].number == k) return &d.lines[j];
      return nullptr;
    };
    switch (l.just.kind) {
      case Justification::Kind::Axiom: {
        if (!schema_in_system(l.just.schema, sys))
          return fail(std::string(to_string(l.just.schema)) + " is not an axiom of " + to_string(sys));
        const auto* f = std::get_if<Formula>(&l.formula);
        if (!f || !match_axiom(*f, l.just.schema, sys))
          return fail(std::string("not an instance of ") + to_string(l.just.schema));
        break;
      }
      case Justification::Kind::Taut: {
        bool ok = false;
        try {
          ok = std::visit([](const auto& f) { return is_tautology(f); }, l.formula);
        } catch (const ScopeTooLarge& e) {
          return fail(e.what());
        }
        if (!ok) return fail("not a propositional tautology");
        break;
      }
      case Justification::Kind::MP: {
        const auto *a = earlier(l.just.a), *b = earlier(l.just.b);
        if (!a) return fail("mp cites line " + std::to_string(l.just.a) + ", which is not earlier");
        if (!b) return fail("mp cites line " + std::to_string(l.just.b) + ", which is not earlier");
        if (!is_implication(b->formula, a->formula, l.formula) && !is_implication(a->formula, b->formula, l.formula))
          return fail("mp: neither cited line is an implication from the other to this line");
        break;
      }
      case Justification::Kind::RW: {
        const auto* a = earlier(l.just.a);
        if (!a) return fail("rw cites line " + std::to_string(l.just.a) + ", which is not earlier");
        const auto* prem = std::get_if<PropFormula>(&a->formula);
        if (!prem || prem->op() != Op::Implies)
          return fail("rw needs a propositional implication on line " + std::to_string(l.just.a));
        const auto* f = std::get_if<Formula>(&l.formula);
        if (!f || f->op() != Op::Implies) return fail("rw must produce [a]b -> [a]b'");
        const auto *c1 = cond(f->lhs()), *c2 = cond(f->rhs());
        if (!c1 || !c2) return fail("rw must produce [a]b -> [a]b'");
        if (c1->antecedent.as_intervention() != l.just.alpha || c2->antecedent.as_intervention() != l.just.alpha)
          return fail("rw antecedent differs from [" + l.just.alpha.str() + "]");
        if (!(c1->consequent == prem->lhs()) || !(c2->consequent == prem->rhs()))
          return fail("rw consequents do not match line " + std::to_string(l.just.a));
        break;
      }
    }
  }
  return {};
}

Verdict cross_validate(const Derivation& d, const std::vector<FiniteSem>& models) {
  Verdict v;
  v.kind = Verdict::Kind::Pass;
  if (d.lines.empty()) return v;
  const auto& last = d.lines.back();
  for (std::size_t i = 0; i < models.size(); ++i) {
    bool ok;
    if (const auto* f = std::get_if<Formula>(&last.formula)) {
      ok = eval(models[i], *f);
    } else {
      auto s = solve(models[i]);
      ok = std::get<PropFormula>(last.formula).evaluate([&](const VariableId& x) { return s(x); });
    }
    if (!ok) {
      v.kind = Verdict::Kind::Counterexample;
      v.detail = "soundness alarm: line " + std::to_string(last.number) + " is false on model " + std::to_string(i);
      return v;
    }
  }
  return v;
}

}  // namespace oucl
