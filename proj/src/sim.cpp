#include "oucl/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <unordered_map>

#include "oucl/errors.hpp"

namespace oucl {

namespace {

enum : int { kLit, kName, kNeg, kNot, kOr, kAnd, kEq, kNe, kLt, kLe, kGt, kGe, kAdd, kSub, kMul, kDiv, kMod };

constexpr std::int64_t kBlank = -1;

// --- lexer ---------------------------------------------------------------------

struct Token {
  enum Kind { Int, Ident, Sym, End } kind = End;
  std::string text;
  std::int64_t value = 0;
  std::size_t col = 0;  // 1-based
};

std::vector<Token> lex(std::string_view s, std::size_t line, std::size_t col0) {
  static const char* two[] = {"||", "&&", "==", "!=", "<=", ">=", ":="};
  std::vector<Token> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    Token t;
    t.col = col0 + i + 1;
    if (i >= s.size()) {
      out.push_back(t);
      return out;
    }
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      t.kind = Token::Int;
      t.text = std::string(s.substr(b, i - b));
      try {
        t.value = std::stoll(t.text);
      } catch (const std::exception&) {
        throw ParseError(line, t.col, "integer literal out of range");
      }
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      t.kind = Token::Ident;
      t.text = std::string(s.substr(b, i - b));
    } else {
      t.kind = Token::Sym;
      for (const char* op : two)
        if (s.substr(i, 2) == op) t.text = op;
      if (t.text.empty()) {
        if (std::string_view("<>+-*/%!()[],:").find(c) == std::string_view::npos)
          throw ParseError(line, t.col, std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
      }
      i += t.text.size();
    }
    out.push_back(std::move(t));
  }
}

class TokenStream {
 public:
  TokenStream(std::vector<Token> toks, std::size_t line) : toks_(std::move(toks)), line_(line) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() {
    Token t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Token::Sym && peek(k).text == s; }
  bool accept(const char* s) {
    if (!is_sym(s)) return false;
    next();
    return true;
  }
  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'");
  }
  std::string ident(const char* what) {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  bool at_end() const { return peek().kind == Token::End; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(line_, t.col, msg + (t.kind == Token::End ? " at end of statement" : ", found '" + t.text + "'"));
  }
  std::size_t line() const { return line_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

// --- expressions ------------------------------------------------------------------

class ExprParser {
 public:
  explicit ExprParser(TokenStream& ts) : ts_(ts) {}

  IntExpr parse() {
    IntExpr e;
    out_ = &e;
    e.root = level(0);
    return e;
  }

 private:
  int add(IntExpr::Node n) {
    out_->nodes.push_back(std::move(n));
    return static_cast<int>(out_->nodes.size() - 1);
  }

  // 0: ||  1: &&  2: comparisons  3: + -  4: * / %
  int level(int lv) {
    if (lv == 5) return unary();
    int lhs = level(lv + 1);
    while (true) {
      int op = -1;
      const Token& t = ts_.peek();
      if (t.kind == Token::Sym) {
        const std::string& s = t.text;
        if (lv == 0 && s == "||") op = kOr;
        if (lv == 1 && s == "&&") op = kAnd;
        if (lv == 2) {
          if (s == "==") op = kEq;
          if (s == "!=") op = kNe;
          if (s == "<") op = kLt;
          if (s == "<=") op = kLe;
          if (s == ">") op = kGt;
          if (s == ">=") op = kGe;
        }
        if (lv == 3 && (s == "+" || s == "-")) op = s == "+" ? kAdd : kSub;
        if (lv == 4 && (s == "*" || s == "/" || s == "%")) op = s == "*" ? kMul : s == "/" ? kDiv : kMod;
      }
      if (op < 0) return lhs;
      ts_.next();
      int rhs = level(lv + 1);
      lhs = add({op, 0, lhs, rhs, {}});
    }
  }

  int unary() {
    if (ts_.accept("-")) return add({kNeg, 0, unary(), -1, {}});
    if (ts_.accept("!")) return add({kNot, 0, unary(), -1, {}});
    if (ts_.accept("(")) {
      int e = level(0);
      ts_.expect(")");
      return e;
    }
    const Token& t = ts_.peek();
    if (t.kind == Token::Int) return add({kLit, ts_.next().value, -1, -1, {}});
    if (t.kind == Token::Ident) {
      std::string name = ts_.next().text;
      if (name == "blank") return add({kLit, kBlank, -1, -1, {}});
      return add({kName, 0, -1, -1, std::move(name)});
    }
    ts_.fail("expected an expression");
  }

  TokenStream& ts_;
  IntExpr* out_ = nullptr;
};

std::int64_t wrap(std::uint64_t u) { return static_cast<std::int64_t>(u); }

std::int64_t eval(const IntExpr& e, int n, const std::int64_t* slots) {
  const auto& nd = e.nodes[static_cast<std::size_t>(n)];
  switch (nd.op) {
    case kLit: return nd.v;
    case kName: return slots[nd.v];
    case kNeg: return wrap(0 - static_cast<std::uint64_t>(eval(e, nd.a, slots)));
    case kNot: return eval(e, nd.a, slots) == 0;
    case kOr: return eval(e, nd.a, slots) != 0 || eval(e, nd.b, slots) != 0;
    case kAnd: return eval(e, nd.a, slots) != 0 && eval(e, nd.b, slots) != 0;
    default: break;
  }
  std::int64_t a = eval(e, nd.a, slots), b = eval(e, nd.b, slots);
  auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
  switch (nd.op) {
    case kEq: return a == b;
    case kNe: return a != b;
    case kLt: return a < b;
    case kLe: return a <= b;
    case kGt: return a > b;
    case kGe: return a >= b;
    case kAdd: return wrap(ua + ub);
    case kSub: return wrap(ua - ub);
    case kMul: return wrap(ua * ub);
    default:
      if (b == 0) throw ProgramError("division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) throw ProgramError("division overflow");
      return nd.op == kDiv ? a / b : a % b;
  }
}

// Replaces names by slot numbers via `resolve(name, col) -> slot`.
template <class F>
void resolve_names(IntExpr& e, F&& resolve) {
  for (auto& n : e.nodes)
    if (n.op == kName) n.v = resolve(n.name);
}

}  // namespace

IntExpr IntExpr::parse(std::string_view text, std::size_t line, std::size_t col0) {
  TokenStream ts(lex(text, line, col0), line);
  IntExpr e = ExprParser(ts).parse();
  if (!ts.at_end()) ts.fail("unexpected token");
  return e;
}

// --- time maps ------------------------------------------------------------------------

TimeMapDecl TimeMapDecl::parse(std::string_view text) {
  TimeMapDecl t;
  t.text_ = std::string(text);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    std::size_t colon = item.find(':');
    std::size_t lead = 0;
    while (lead < item.size() && std::isspace(static_cast<unsigned char>(item[lead]))) ++lead;
    if (lead == item.size()) {
      if (end == text.size() && start > 0) throw ParseError(1, start + 1, "empty time map entry");
      if (end == text.size()) break;
      throw ParseError(1, start + 1, "empty time map entry");
    }
    if (colon == std::string_view::npos) throw ParseError(1, start + lead + 1, "expected 'key: expression'");
    std::string_view key = item.substr(lead, colon - lead);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
    Entry e;
    if (key == "*") {
      e.kind = Entry::Kind::Wildcard;
    } else if (key.size() > 2 && key.substr(key.size() - 2) == "_*") {
      e.kind = Entry::Kind::Family;
      e.base = std::string(key.substr(0, key.size() - 2));
      if (!is_valid_base(e.base)) throw ParseError(1, start + lead + 1, "bad variable family '" + std::string(key) + "'");
    } else {
      try {
        e.key = VariableId::parse(key);
      } catch (const ParseError&) {
        throw ParseError(1, start + lead + 1, "bad variable '" + std::string(key) + "'");
      }
    }
    e.expr = IntExpr::parse(item.substr(colon + 1), 1, start + colon + 1);
    for (auto& n : e.expr.nodes) {
      if (n.op != kName) continue;
      bool ok = n.name.size() > 1 && n.name[0] == 'i' &&
                std::all_of(n.name.begin() + 1, n.name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      if (!ok) throw ParseError(1, start + colon + 2, "time expressions may only use i0, i1, ...; found '" + n.name + "'");
      n.v = std::stoll(n.name.substr(1));
    }
    t.entries_.push_back(std::move(e));
    start = end + 1;
  }
  return t;
}

TimeMapDecl TimeMapDecl::from_model(const FiniteSem& m) {
  std::string s;
  for (const auto& [x, eq] : m.equations()) s += x.str() + ":" + std::to_string(eq.time) + ", ";
  s += "*: 0";
  return parse(s);
}

std::uint64_t TimeMapDecl::operator()(const VariableId& v) const {
  const Entry* hit = nullptr;
  for (const auto& e : entries_)
    if (e.kind == Entry::Kind::Exact && e.key == v) hit = hit ? hit : &e;
  if (!hit)
    for (const auto& e : entries_)
      if (e.kind == Entry::Kind::Family && e.base == v.base() && !v.indices().empty()) hit = hit ? hit : &e;
  if (!hit)
    for (const auto& e : entries_)
      if (e.kind == Entry::Kind::Wildcard) hit = hit ? hit : &e;
  if (!hit) return 0;
  std::int64_t top = 0;
  for (const auto& n : hit->expr.nodes)
    if (n.op == kName) top = std::max(top, n.v + 1);
  std::vector<std::int64_t> slots(static_cast<std::size_t>(top), 0);
  for (std::size_t k = 0; k < v.indices().size() && k < slots.size(); ++k) slots[k] = v.indices()[k];
  std::int64_t r = eval(hit->expr, hit->expr.root, slots.data());
  if (r < 0) throw ProgramError("time of " + v.str() + " is negative (" + std::to_string(r) + ")");
  return static_cast<std::uint64_t>(r);
}

// --- programs -----------------------------------------------------------------------------

namespace {

struct Instr {
  enum Kind { Set, Write, Read, If, Goto, Halt } kind = Halt;
  int reg = -1;
  std::string base;
  std::vector<IntExpr> idx;
  IntExpr e;
  int target = -1;
  std::string label;  // pending jump target
  std::size_t line = 0, col = 0;
};

}  // namespace

struct SimProgram::Impl {
  std::string source;
  std::optional<TimeMapDecl> time;
  std::vector<Instr> code;
  std::vector<std::string> regs;
};

SimProgram::SimProgram() : impl_(std::make_shared<Impl>()) {}

const std::string& SimProgram::source() const { return impl_->source; }
const std::optional<TimeMapDecl>& SimProgram::time_map() const { return impl_->time; }
std::size_t SimProgram::size() const { return impl_->code.size(); }

namespace {

// Splits a line into `;`-separated statements (outside quotes), dropping a `#` comment.
std::vector<std::pair<std::size_t, std::string_view>> statements(std::string_view l) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  bool quoted = false;
  std::size_t b = 0, i = 0;
  for (; i < l.size(); ++i) {
    if (l[i] == '"') quoted = !quoted;
    if (quoted) continue;
    if (l[i] == '#') break;
    if (l[i] == ';') {
      out.emplace_back(b, l.substr(b, i - b));
      b = i + 1;
    }
  }
  out.emplace_back(b, l.substr(b, i - b));
  return out;
}

}  // namespace

SimProgram SimProgram::parse(std::string_view text) {
  auto impl = std::make_shared<Impl>();
  impl->source = std::string(text);
  std::map<std::string, int> labels;
  std::map<std::string, int> regs;
  auto reg = [&](const std::string& name) {
    auto [it, fresh] = regs.emplace(name, static_cast<int>(impl->regs.size()));
    if (fresh) impl->regs.push_back(name);
    return it->second;
  };

  std::size_t lineno = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++lineno;
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    for (auto [off, stmt] : statements(line)) {
      std::size_t lead = 0;
      while (lead < stmt.size() && std::isspace(static_cast<unsigned char>(stmt[lead]))) ++lead;
      if (stmt.substr(lead).rfind(".time", 0) == 0) {
        std::string_view d = stmt.substr(lead + 5);
        std::size_t q1 = d.find('"'), q2 = d.rfind('"');
        if (q1 == std::string_view::npos || q2 == q1) throw ParseError(lineno, off + lead + 1, ".time needs a quoted declaration");
        if (impl->time) throw ParseError(lineno, off + lead + 1, "duplicate .time directive");
        try {
          impl->time = TimeMapDecl::parse(d.substr(q1 + 1, q2 - q1 - 1));
        } catch (const ParseError& e) {
          std::string msg = e.what();
          throw ParseError(lineno, off + lead + 5 + q1 + 1 + e.column(), msg.substr(msg.find(": ") + 2));
        }
        continue;
      }
      TokenStream ts(lex(stmt, lineno, off), lineno);
      // leading labels
      while (ts.peek().kind == Token::Ident && ts.is_sym(":", 1)) {
        Token t = ts.next();
        ts.next();
        if (!labels.emplace(t.text, static_cast<int>(impl->code.size())).second)
          throw ParseError(lineno, t.col, "duplicate label '" + t.text + "'");
      }
      if (ts.at_end()) continue;
      Instr in;
      in.line = lineno;
      in.col = ts.peek().col;
      std::string kw = ts.ident("an instruction");
      auto square = [&]() {
        std::size_t col = ts.peek().col;
        in.base = ts.ident("a variable base");
        if (!is_valid_base(in.base)) throw ParseError(lineno, col, "bad variable base '" + in.base + "'");
        ts.expect("[");
        if (!ts.accept("]")) {
          do in.idx.push_back(ExprParser(ts).parse());
          while (ts.accept(","));
          ts.expect("]");
        }
      };
      auto reg_name = [&]() {
        std::size_t col = ts.peek().col;
        std::string r = ts.ident("a register");
        if (r == "blank") throw ParseError(lineno, col, "'blank' is not a register");
        return reg(r);
      };
      if (kw == "set") {
        in.kind = Instr::Set;
        in.reg = reg_name();
        ts.expect(":=");
        in.e = ExprParser(ts).parse();
      } else if (kw == "write") {
        in.kind = Instr::Write;
        square();
        ts.expect(":=");
        in.e = ExprParser(ts).parse();
      } else if (kw == "read") {
        in.kind = Instr::Read;
        in.reg = reg_name();
        ts.expect(":=");
        square();
      } else if (kw == "if") {
        in.kind = Instr::If;
        in.e = ExprParser(ts).parse();
        if (ts.peek().kind != Token::Ident || ts.peek().text != "goto") ts.fail("expected 'goto'");
        ts.next();
        in.col = ts.peek().col;
        in.label = ts.ident("a label");
      } else if (kw == "goto") {
        in.kind = Instr::Goto;
        in.col = ts.peek().col;
        in.label = ts.ident("a label");
      } else if (kw == "halt") {
        in.kind = Instr::Halt;
      } else {
        throw ParseError(lineno, in.col, "unknown instruction '" + kw + "'");
      }
      if (!ts.at_end()) ts.fail("unexpected token");
      impl->code.push_back(std::move(in));
    }
  }
  for (auto& in : impl->code) {
    if (!in.label.empty()) {
      auto it = labels.find(in.label);
      if (it == labels.end()) throw ParseError(in.line, in.col, "unknown label '" + in.label + "'");
      in.target = it->second;
    }
    auto res = [&](const std::string& name) -> std::int64_t { return reg(name); };
    resolve_names(in.e, res);
    for (auto& ix : in.idx) resolve_names(ix, res);
  }
  SimProgram p;
  p.impl_ = std::move(impl);
  return p;
}

// --- interpreter ---------------------------------------------------------------------------

namespace {

class Machine {
 public:
  Machine(const SimProgram::Impl& p, const Intervention& iv) : p_(p), iv_(iv), regs_(p.regs.size(), 0) {
    for (const auto& [v, b] : iv) {
      tape_.emplace(v, b);
      trace_.writes.push_back({v, b, 0});
    }
  }

  // Runs until halt, budget, or `stop(var)` returns true after a fresh write.
  template <class Stop>
  void go(std::uint64_t budget, Stop&& stop) {
    const auto& code = p_.code;
    while (true) {
      if (pc_ >= code.size()) {
        trace_.halted = true;
        return;
      }
      if (trace_.steps >= budget) return;
      const Instr& in = code[pc_];
      ++trace_.steps;
      ++pc_;
      try {
        switch (in.kind) {
          case Instr::Set: regs_[static_cast<std::size_t>(in.reg)] = eval(in.e, in.e.root, regs_.data()); break;
          case Instr::If:
            if (eval(in.e, in.e.root, regs_.data()) != 0) pc_ = static_cast<std::size_t>(in.target);
            break;
          case Instr::Goto: pc_ = static_cast<std::size_t>(in.target); break;
          case Instr::Halt: trace_.halted = true; return;
          case Instr::Read: {
            auto it = tape_.find(address(in));
            regs_[static_cast<std::size_t>(in.reg)] = it == tape_.end() ? kBlank : it->second;
            break;
          }
          case Instr::Write: {
            VariableId v = address(in);
            std::uint8_t bit = eval(in.e, in.e.root, regs_.data()) > 0 ? 1 : 0;
            auto [it, fresh] = tape_.emplace(v, bit);
            if (!fresh) {
              if (it->second != bit && !iv_.contains(v))
                throw WriteConflict("line " + std::to_string(in.line) + ": square " + v.str() + " holds " +
                                    std::to_string(it->second) + ", write of " + std::to_string(bit) + " at step " +
                                    std::to_string(trace_.steps));
              break;
            }
            trace_.writes.push_back({v, bit != 0, trace_.steps});
            if (stop(trace_.writes.back().var)) return;
            break;
          }
        }
      } catch (const WriteConflict&) {
        throw;
      } catch (const ProgramError& e) {
        std::string msg = e.what();
        if (msg.rfind("line ", 0) == 0) throw;
        throw ProgramError("line " + std::to_string(in.line) + ": " + msg);
      }
    }
  }

  RunTrace& trace() { return trace_; }
  const std::unordered_map<VariableId, std::uint8_t, VariableIdHash>& tape() const { return tape_; }

 private:
  VariableId address(const Instr& in) const {
    std::vector<std::uint32_t> idx;
    idx.reserve(in.idx.size());
    for (const auto& e : in.idx) {
      std::int64_t v = eval(e, e.root, regs_.data());
      if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
        throw ProgramError("tape index " + std::to_string(v) + " out of range for " + in.base);
      idx.push_back(static_cast<std::uint32_t>(v));
    }
    return VariableId(in.base, std::move(idx));
  }

  const SimProgram::Impl& p_;
  const Intervention& iv_;
  std::vector<std::int64_t> regs_;
  std::unordered_map<VariableId, std::uint8_t, VariableIdHash> tape_;
  RunTrace trace_;
  std::size_t pc_ = 0;
};

}  // namespace

std::optional<bool> RunTrace::value(const VariableId& v) const {
  for (const auto& w : writes)
    if (w.var == v) return w.bit;
  return std::nullopt;
}

Intervention RunTrace::as_intervention() const {
  Intervention i;
  for (const auto& w : writes) i.set(w.var, w.bit);
  return i;
}

RunTrace run(const SimProgram& p, const Intervention& i, std::uint64_t step_budget) {
  Machine m(p.impl(), i);
  m.go(step_budget, [](const VariableId&) { return false; });
  return std::move(m.trace());
}

Tri query(const SimProgram& p, const Intervention& i, const VariableId& x, std::uint64_t step_budget) {
  return query_many(p, i, {x}, step_budget)[0];
}

std::vector<Tri> query_many(const SimProgram& p, const Intervention& i, const std::vector<VariableId>& xs,
                            std::uint64_t step_budget) {
  std::vector<Tri> out(xs.size(), Tri::Unknown);
  std::unordered_map<VariableId, std::vector<std::size_t>, VariableIdHash> pending;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (auto b = i.get(xs[k]))
      out[k] = tri(*b);
    else
      pending[xs[k]].push_back(k);
  }
  if (pending.empty()) return out;
  Machine m(p.impl(), i);
  m.go(step_budget, [&](const VariableId& v) {
    auto it = pending.find(v);
    if (it == pending.end()) return false;
    bool b = m.tape().at(v) != 0;
    for (auto k : it->second) out[k] = tri(b);
    pending.erase(it);
    return pending.empty();
  });
  return out;
}

const char* to_string(Verdict::Kind k) noexcept {
  switch (k) {
    case Verdict::Kind::Pass: return "pass";
    case Verdict::Kind::Counterexample: return "counterexample";
    case Verdict::Kind::Indeterminate: return "indeterminate";
  }
  return "?";
}

// --- checkers ----------------------------------------------------------------------------------

namespace {

Verdict counterexample(std::string detail, Intervention i, std::optional<VariableId> v = std::nullopt,
                       Tri lhs = Tri::Unknown, Tri rhs = Tri::Unknown) {
  Verdict out;
  out.kind = Verdict::Kind::Counterexample;
  out.detail = std::move(detail);
  out.intervention = std::move(i);
  out.variable = std::move(v);
  out.lhs = lhs;
  out.rhs = rhs;
  return out;
}

std::vector<Intervention> restrictions(const RunTrace& t, std::mt19937_64& rng, const FunctionalOptions& o) {
  std::vector<Intervention> out;
  const auto& w = t.writes;
  if (w.empty()) return out;
  out.push_back(t.as_intervention());
  for (std::size_t k = 0; k < w.size() && k < o.max_singletons; ++k) out.push_back(Intervention({{w[k].var, w[k].bit}}));
  for (std::size_t q = 1; q < 4; ++q) {
    Intervention pre;
    for (std::size_t k = 0; k < w.size() * q / 4; ++k) pre.set(w[k].var, w[k].bit);
    out.push_back(std::move(pre));
  }
  std::bernoulli_distribution half(0.5);
  for (std::size_t s = 0; s < o.random_samples; ++s) {
    Intervention r;
    for (const auto& x : w)
      if (half(rng)) r.set(x.var, x.bit);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Verdict check_functional(const SimProgram& p, const std::vector<Intervention>& tests, std::uint64_t step_budget,
                         FunctionalOptions opts) {
  std::mt19937_64 rng(opts.seed);
  std::size_t runs = 0;
  for (const auto& i : tests) {
    RunTrace base;
    try {
      base = run(p, i, step_budget);
    } catch (const Error& e) {
      return counterexample(std::string("run faults: ") + e.what(), i);
    }
    std::map<VariableId, bool> bv;
    for (const auto& w : base.writes) bv.emplace(w.var, w.bit);
    for (const auto& r : restrictions(base, rng, opts)) {
      Intervention stacked = Intervention::compose(r, i);
      RunTrace t;
      try {
        t = run(p, stacked, step_budget);
      } catch (const Error& e) {
        return counterexample(std::string("rerun under a restriction of its own trace faults: ") + e.what(), stacked);
      }
      ++runs;
      std::map<VariableId, bool> tv;
      for (const auto& w : t.writes) tv.emplace(w.var, w.bit);
      std::set<VariableId> all;
      for (const auto& [v, b] : bv) all.insert(v);
      for (const auto& [v, b] : tv) all.insert(v);
      for (const auto& v : all) {
        auto a = bv.find(v), b = tv.find(v);
        Tri lhs = a == bv.end() ? Tri::Unknown : tri(a->second);
        Tri rhs = b == tv.end() ? Tri::Unknown : tri(b->second);
        bool diverges = (lhs != Tri::Unknown && rhs != Tri::Unknown && lhs != rhs) ||
                        (lhs == Tri::Unknown && base.halted) || (rhs == Tri::Unknown && t.halted);
        if (diverges)
          return counterexample("restricting the intervention to part of its own outcome changes " + v.str() +
                                    " (base intervention " + (i.empty() ? std::string("empty") : i.str()) + ")",
                                stacked, v, lhs, rhs);
      }
    }
  }
  Verdict ok;
  ok.detail = std::to_string(runs) + " reruns agreed";
  return ok;
}

SimInfluence sim_influence(const SimProgram& p, const VariableId& x, const VariableId& y,
                           const std::set<VariableId>& scope, std::uint64_t step_budget,
                           std::uint64_t context_budget, Exec exec) {
  if (x == y) throw Error("influence needs two distinct variables");
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

  auto context = [&](std::uint64_t c) {
    Intervention i;
    for (std::size_t k = 0; k < domain.size(); ++k, c /= 3)
      if (c % 3) i.set(domain[k], c % 3 == 2);
    return i;
  };
  // 0 = no difference, 1 = difference, 2 = y unwritten in some run
  auto probe = [&](std::uint64_t c) -> int {
    Intervention a = context(c), b = a;
    a.set(x, false);
    b.set(x, true);
    Tri ya = query(p, a, y, step_budget), yb = query(p, b, y, step_budget);
    if (ya == Tri::Unknown || yb == Tri::Unknown) return 2;
    return ya != yb ? 1 : 0;
  };

  std::vector<std::uint8_t> unknown(total, 0);
  std::uint64_t best = total;
  if (exec == Exec::Serial) {
    for (std::uint64_t c = 0; c < total; ++c) {
      int r = probe(c);
      unknown[c] = r == 2;
      if (r == 1) {
        best = c;
        break;
      }
    }
  } else {
    std::atomic<std::uint64_t> found{total};
    std::uint64_t err_at = total;
    std::exception_ptr err;
    std::mutex mu;
    const auto n = static_cast<std::int64_t>(total);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t sc = 0; sc < n; ++sc) {
      auto c = static_cast<std::uint64_t>(sc);
      if (c > found.load(std::memory_order_relaxed)) continue;
      try {
        int r = probe(c);
        unknown[c] = r == 2;
        if (r == 1) {
          std::uint64_t cur = found.load();
          while (c < cur && !found.compare_exchange_weak(cur, c)) {
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (c < err_at) {
          err_at = c;
          err = std::current_exception();
        }
      }
    }
    best = found.load();
    if (err && err_at < best) std::rethrow_exception(err);
  }
  SimInfluence out;
  for (std::uint64_t c = 0; c < std::min(best, total); ++c) out.unknown_contexts += unknown[c];
  if (best < total) out.witness = InfluenceWitness{context(best), false, true};
  return out;
}

Verdict check_monotone(const SimProgram& p, const TimeMapDecl& t, const std::vector<InfluenceProbe>& probes,
                       std::uint64_t step_budget, std::uint64_t context_budget, Exec exec) {
  std::size_t searched = 0;
  for (const auto& pr : probes) {
    std::uint64_t tx = t(pr.x), ty = t(pr.y);
    if (tx < ty) continue;
    ++searched;
    auto r = sim_influence(p, pr.x, pr.y, pr.scope, step_budget, context_budget, exec);
    if (!r.witness) continue;
    Intervention a = r.witness->context, b = a;
    a.set(pr.x, false);
    b.set(pr.x, true);
    return counterexample(pr.x.str() + " ~> " + pr.y.str() + " although t(" + pr.x.str() + ") = " +
                              std::to_string(tx) + " >= t(" + pr.y.str() + ") = " + std::to_string(ty),
                          r.witness->context, pr.y, query(p, a, pr.y, step_budget), query(p, b, pr.y, step_budget));
  }
  Verdict ok;
  ok.detail = std::to_string(searched) + " of " + std::to_string(probes.size()) + " probes searched";
  return ok;
}

Verdict weak_equiv(const SimProgram& p, const SimProgram& q, const std::set<VariableId>& vars,
                   std::uint64_t step_budget) {
  std::vector<VariableId> vs(vars.begin(), vars.end());
  auto a = query_many(p, {}, vs, step_budget);
  auto b = query_many(q, {}, vs, step_budget);
  std::optional<std::size_t> undecided;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    if (a[k] == b[k] && a[k] != Tri::Unknown) continue;
    if (a[k] == Tri::Unknown && b[k] == Tri::Unknown) {
      if (!undecided) undecided = k;
      continue;
    }
    return counterexample(vs[k].str() + ": " + to_string(a[k]) + " vs " + to_string(b[k]), {}, vs[k], a[k], b[k]);
  }
  Verdict out;
  if (undecided) {
    out.kind = Verdict::Kind::Indeterminate;
    out.variable = vs[*undecided];
    out.detail = vs[*undecided].str() + " unwritten by both programs within the budget";
  } else {
    out.detail = std::to_string(vs.size()) + " variables agree";
  }
  return out;
}

}  // namespace oucl
