#include "oucl/formula.hpp"

#include <cctype>
#include <functional>

#include "oucl/errors.hpp"

namespace oucl {

// ---------------------------------------------------------------------------
// Antecedent

Antecedent::Antecedent(std::vector<Literal> literals) : literals_(std::move(literals)) {
  std::set<VariableId> seen;
  for (const auto& l : literals_)
    if (!seen.insert(l.var).second)
      throw WellFormednessError(1, 1, "variable " + l.var.str() + " repeated in antecedent");
}

bool Antecedent::mentions(const VariableId& v) const {
  for (const auto& l : literals_)
    if (l.var == v) return true;
  return false;
}

Intervention Antecedent::as_intervention() const {
  Intervention out;
  for (const auto& l : literals_) out.set(l.var, l.positive);
  return out;
}

Antecedent Antecedent::from_intervention(const Intervention& i) {
  std::vector<Literal> lits;
  for (const auto& [v, b] : i) lits.push_back({v, b});
  return Antecedent(std::move(lits));
}

PropFormula Antecedent::as_prop() const {
  std::vector<PropFormula> items;
  for (const auto& l : literals_) items.push_back(make_literal(l));
  return PropFormula::all_of(std::move(items));
}

Formula make_influence(VariableId source, VariableId target) {
  if (source == target)
    throw WellFormednessError(1, 1, "influence atom " + source.str() + " ~> " + target.str() + " has identical endpoints");
  return Formula::atom(Influence{std::move(source), std::move(target)});
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { LBrack, RBrack, LParen, RParen, Not, And, Or, Imp, Iff, LeadsTo, True, False, Ident, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Not: return "'~'";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::Imp: return "'->'";
    case Tok::Iff: return "'<->'";
    case Tok::LeadsTo: return "'~>'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::Ident: return "variable";
    case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view s, std::size_t line) {
  std::vector<Token> out;
  std::size_t col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t len) {
    out.push_back({k, std::string(s.substr(i, len)), line, col});
    i += len;
    col += len;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    switch (c) {
      case '[': push(Tok::LBrack, 1); continue;
      case ']': push(Tok::RBrack, 1); continue;
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case '&': push(Tok::And, 1); continue;
      case '|': push(Tok::Or, 1); continue;
      case '~':
        if (i + 1 < s.size() && s[i + 1] == '>')
          push(Tok::LeadsTo, 2);
        else
          push(Tok::Not, 1);
        continue;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          push(Tok::Imp, 2);
          continue;
        }
        break;
      case '<':
        if (s.substr(i, 3) == "<->") {
          push(Tok::Iff, 3);
          continue;
        }
        break;
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string_view word = s.substr(i, j - i);
      Tok k = word == "true" ? Tok::True : word == "false" ? Tok::False : Tok::Ident;
      push(k, j - i);
      continue;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, std::size_t line) : toks_(lex(text, line)) {}

  Formula formula() { return level<Formula>(0, [this] { return outer_unary(); }); }
  PropFormula prop() { return level<PropFormula>(0, [this] { return prop_unary(); }); }

  void expect_end() {
    if (peek().kind != Tok::End) fail("expected end of formula, got " + std::string(describe(peek().kind)));
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(peek().line, peek().column, msg); }
  [[noreturn]] void ill_formed(const Token& at, const std::string& msg) const {
    throw WellFormednessError(at.line, at.column, msg);
  }
  void expect(Tok k) {
    if (!accept(k))
      fail("expected " + std::string(describe(k)) + ", got " + std::string(describe(peek().kind)));
  }

  static Tok level_token(int lvl) {
    switch (lvl) {
      case 0: return Tok::Iff;
      case 1: return Tok::Imp;
      case 2: return Tok::Or;
      default: return Tok::And;
    }
  }
  static Op level_op(int lvl) {
    switch (lvl) {
      case 0: return Op::Iff;
      case 1: return Op::Implies;
      case 2: return Op::Or;
      default: return Op::And;
    }
  }

  // Levels 0..3 are <->, ->, |, & (all left-associative); level 4 is unary.
  template <class E, class Unary>
  E level(int lvl, const Unary& unary) {
    if (lvl == 4) return unary();
    E lhs = level<E>(lvl + 1, unary);
    while (accept(level_token(lvl))) {
      E rhs = level<E>(lvl + 1, unary);
      lhs = E::binary(level_op(lvl), std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  VariableId variable() {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail("expected variable, got " + std::string(describe(t.kind)));
    next();
    VariableId v;
    try {
      v = VariableId::parse(t.text);
    } catch (const ParseError& e) {
      throw ParseError(t.line, t.column, e.what());
    }
    if (v.is_reserved()) ill_formed(t, "variable " + v.str() + " uses a reserved gadget namespace (__Z/__W)");
    return v;
  }

  PropFormula prop_unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Not: next(); return PropFormula::negate(prop_unary());
      case Tok::LParen: {
        next();
        PropFormula inner = prop();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::True: next(); return PropFormula::constant(true);
      case Tok::False: next(); return PropFormula::constant(false);
      case Tok::LBrack: ill_formed(t, "conditionals may not be nested inside a consequent");
      case Tok::Ident: {
        VariableId v = variable();
        if (peek().kind == Tok::LeadsTo) ill_formed(peek(), "influence atoms may not appear inside a consequent");
        return make_var(std::move(v));
      }
      default: fail("expected propositional formula, got " + std::string(describe(t.kind)));
    }
  }

  Formula outer_unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Not: next(); return Formula::negate(outer_unary());
      case Tok::LParen: {
        next();
        Formula inner = formula();
        expect(Tok::RParen);
        return inner;
      }
      case Tok::True: next(); return Formula::constant(true);
      case Tok::False: next(); return Formula::constant(false);
      case Tok::LBrack: return conditional();
      case Tok::Ident: {
        const Token& at = t;
        VariableId src = variable();
        if (!accept(Tok::LeadsTo))
          fail("expected '~>' after variable " + src.str() + " (a bare variable is not a formula; write [] " +
               src.str() + ")");
        VariableId dst = variable();
        if (src == dst) ill_formed(at, "influence atom " + src.str() + " ~> " + dst.str() + " has identical endpoints");
        return Formula::atom(Influence{std::move(src), std::move(dst)});
      }
      default: fail("expected formula, got " + std::string(describe(t.kind)));
    }
  }

  Formula conditional() {
    expect(Tok::LBrack);
    std::vector<Literal> lits;
    std::set<VariableId> seen;
    if (peek().kind != Tok::RBrack) {
      do {
        bool positive = !accept(Tok::Not);
        const Token& at = peek();
        VariableId v = variable();
        if (!seen.insert(v).second) ill_formed(at, "variable " + v.str() + " repeated in antecedent");
        lits.push_back({std::move(v), positive});
      } while (accept(Tok::And));
    }
    if (peek().kind == Tok::LBrack) ill_formed(peek(), "conditionals may not be nested inside an antecedent");
    expect(Tok::RBrack);
    PropFormula consequent = prop_unary();
    return make_conditional(Antecedent(std::move(lits)), std::move(consequent));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(Op op) {
  switch (op) {
    case Op::Iff: return 1;
    case Op::Implies: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    default: return 5;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Iff: return " <-> ";
    case Op::Implies: return " -> ";
    case Op::Or: return " | ";
    case Op::And: return " & ";
    default: return "?";
  }
}

// `tight_atom(a)` says whether an atom prints without surrounding parentheses
// when negated (influence atoms get parenthesized for readability).
template <class Atom, class AtomPrinter>
void print_expr(const Expr<Atom>& e, std::string& out, const AtomPrinter& atom_text, bool (*tight_atom)(const Atom&)) {
  auto sub = [&](const Expr<Atom>& k, bool parens) {
    if (parens) out += '(';
    print_expr(k, out, atom_text, tight_atom);
    if (parens) out += ')';
  };
  switch (e.op()) {
    case Op::False: out += "false"; return;
    case Op::True: out += "true"; return;
    case Op::Atom: out += atom_text(e.atom()); return;
    case Op::Not: {
      const auto& k = e.lhs();
      bool parens = precedence(k.op()) < 5 || (k.is_atom() && !tight_atom(k.atom()));
      out += '~';
      sub(k, parens);
      return;
    }
    default: {
      int p = precedence(e.op());
      bool assoc = e.op() == Op::And || e.op() == Op::Or;
      int pl = precedence(e.lhs().op()), pr = precedence(e.rhs().op());
      sub(e.lhs(), pl < p || (pl == p && !assoc));
      out += op_text(e.op());
      sub(e.rhs(), pr <= p);
      return;
    }
  }
}

bool prop_atom_tight(const VariableId&) { return true; }
bool cond_atom_tight(const CondAtom& a) { return std::holds_alternative<Conditional>(a); }

std::string print_consequent(const PropFormula& f) {
  std::string body = print(f);
  return precedence(f.op()) < 5 ? "(" + body + ")" : body;
}

}  // namespace

std::string print(const PropFormula& f) {
  std::string out;
  print_expr<VariableId>(f, out, [](const VariableId& v) { return v.str(); }, &prop_atom_tight);
  return out;
}

std::string print(const Antecedent& a) {
  std::string out = "[";
  for (std::size_t i = 0; i < a.literals().size(); ++i) {
    if (i) out += " & ";
    if (!a.literals()[i].positive) out += '~';
    out += a.literals()[i].var.str();
  }
  return out + "]";
}

std::string print(const Formula& f) {
  std::string out;
  print_expr<CondAtom>(
      f, out,
      [](const CondAtom& a) -> std::string {
        if (const auto* c = std::get_if<Conditional>(&a)) return print(c->antecedent) + " " + print_consequent(c->consequent);
        const auto& i = std::get<Influence>(a);
        return i.source.str() + " ~> " + i.target.str();
      },
      &cond_atom_tight);
  return out;
}

Formula parse_formula(std::string_view text, std::size_t line) {
  Parser p(text, line);
  Formula f = p.formula();
  p.expect_end();
  return f;
}

PropFormula parse_prop(std::string_view text, std::size_t line) {
  Parser p(text, line);
  PropFormula f = p.prop();
  p.expect_end();
  return f;
}

// ---------------------------------------------------------------------------
// Structural queries

std::set<VariableId> free_vars(const PropFormula& f) {
  std::set<VariableId> out;
  f.for_each_atom([&](const VariableId& v) { out.insert(v); });
  return out;
}

std::set<VariableId> free_vars(const Formula& f) {
  std::set<VariableId> out;
  f.for_each_atom([&](const CondAtom& a) {
    if (const auto* c = std::get_if<Conditional>(&a)) {
      for (const auto& l : c->antecedent.literals()) out.insert(l.var);
      c->consequent.for_each_atom([&](const VariableId& v) { out.insert(v); });
    } else {
      const auto& i = std::get<Influence>(a);
      out.insert(i.source);
      out.insert(i.target);
    }
  });
  return out;
}

std::set<Intervention> antecedents_of(const Formula& f) {
  std::set<Intervention> out;
  f.for_each_atom([&](const CondAtom& a) {
    if (const auto* c = std::get_if<Conditional>(&a)) out.insert(c->antecedent.as_intervention());
  });
  return out;
}

bool has_influence_atoms(const Formula& f) {
  bool any = false;
  f.for_each_atom([&](const CondAtom& a) { any = any || std::holds_alternative<Influence>(a); });
  return any;
}

bool same_atom_modulo_antecedent_order(const CondAtom& a, const CondAtom& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<Conditional>(&a)) {
    const auto& cb = std::get<Conditional>(b);
    return ca->antecedent.as_intervention() == cb.antecedent.as_intervention() && ca->consequent == cb.consequent;
  }
  return std::get<Influence>(a) == std::get<Influence>(b);
}

bool same_modulo_antecedent_order(const Formula& a, const Formula& b) {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::False:
    case Op::True: return true;
    case Op::Atom: return same_atom_modulo_antecedent_order(a.atom(), b.atom());
    case Op::Not: return same_modulo_antecedent_order(a.lhs(), b.lhs());
    default:
      return same_modulo_antecedent_order(a.lhs(), b.lhs()) && same_modulo_antecedent_order(a.rhs(), b.rhs());
  }
}

std::vector<NumberedFormula> parse_formula_file(std::string_view text) {
  std::vector<NumberedFormula> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    out.push_back({line_no, parse_formula(line, line_no)});
  }
  return out;
}

}  // namespace oucl
