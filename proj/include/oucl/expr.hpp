#pragma once

#include <cassert>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace oucl {

enum class Op : std::uint8_t { False, True, Atom, Not, And, Or, Implies, Iff };

// Immutable propositional expression over atoms of type `Atom`. Nodes are
// shared, so copies are cheap and values may be used from any thread.
template <class Atom>
class Expr {
 public:
  Expr() : Expr(constant(false)) {}

  static Expr constant(bool value) { return Expr(Node{value ? Op::True : Op::False, std::nullopt, {}}); }
  static Expr atom(Atom a) { return Expr(Node{Op::Atom, std::move(a), {}}); }
  static Expr negate(Expr e) { return Expr(Node{Op::Not, std::nullopt, {std::move(e)}}); }
  static Expr binary(Op op, Expr lhs, Expr rhs) {
    assert(op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Iff);
    return Expr(Node{op, std::nullopt, {std::move(lhs), std::move(rhs)}});
  }
  static Expr conj(Expr lhs, Expr rhs) { return binary(Op::And, std::move(lhs), std::move(rhs)); }
  static Expr disj(Expr lhs, Expr rhs) { return binary(Op::Or, std::move(lhs), std::move(rhs)); }
  static Expr implies(Expr lhs, Expr rhs) { return binary(Op::Implies, std::move(lhs), std::move(rhs)); }
  static Expr iff(Expr lhs, Expr rhs) { return binary(Op::Iff, std::move(lhs), std::move(rhs)); }

  // Left-associated conjunction; `true` when empty.
  static Expr all_of(std::vector<Expr> items) {
    if (items.empty()) return constant(true);
    Expr out = std::move(items.front());
    for (std::size_t i = 1; i < items.size(); ++i) out = conj(std::move(out), std::move(items[i]));
    return out;
  }
  // Left-associated disjunction; `false` when empty.
  static Expr any_of(std::vector<Expr> items) {
    if (items.empty()) return constant(false);
    Expr out = std::move(items.front());
    for (std::size_t i = 1; i < items.size(); ++i) out = disj(std::move(out), std::move(items[i]));
    return out;
  }

  Op op() const noexcept { return node_->op; }
  bool is_atom() const noexcept { return node_->op == Op::Atom; }
  const Atom& atom() const {
    assert(is_atom());
    return *node_->atom;
  }
  std::size_t arity() const noexcept { return node_->kids.size(); }
  const Expr& child(std::size_t i) const { return node_->kids[i]; }
  const Expr& lhs() const { return node_->kids[0]; }
  const Expr& rhs() const { return node_->kids[1]; }

  // Post-order visit of every atom.
  template <class F>
  void for_each_atom(F&& f) const {
    if (is_atom()) {
      f(atom());
      return;
    }
    for (const auto& k : node_->kids) k.for_each_atom(f);
  }

  // Rebuilds the tree with each atom replaced by `f(atom)` (an Expr<NewAtom>).
  template <class F>
  auto map_atoms(F&& f) const -> decltype(f(std::declval<const Atom&>())) {
    using Out = decltype(f(std::declval<const Atom&>()));
    switch (op()) {
      case Op::False: return Out::constant(false);
      case Op::True: return Out::constant(true);
      case Op::Atom: return f(atom());
      case Op::Not: return Out::negate(lhs().map_atoms(f));
      default: return Out::binary(op(), lhs().map_atoms(f), rhs().map_atoms(f));
    }
  }

  // Two-valued evaluation with `value(atom) -> bool`.
  template <class F>
  bool evaluate(F&& value) const {
    switch (op()) {
      case Op::False: return false;
      case Op::True: return true;
      case Op::Atom: return value(atom());
      case Op::Not: return !lhs().evaluate(value);
      case Op::And: return lhs().evaluate(value) && rhs().evaluate(value);
      case Op::Or: return lhs().evaluate(value) || rhs().evaluate(value);
      case Op::Implies: return !lhs().evaluate(value) || rhs().evaluate(value);
      case Op::Iff: return lhs().evaluate(value) == rhs().evaluate(value);
    }
    return false;
  }

  // Number of nodes.
  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& k : node_->kids) n += k.size();
    return n;
  }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op() || a.arity() != b.arity()) return false;
    if (a.is_atom()) return a.atom() == b.atom();
    for (std::size_t i = 0; i < a.arity(); ++i)
      if (!(a.child(i) == b.child(i))) return false;
    return true;
  }

 private:
  struct Node {
    Op op;
    std::optional<Atom> atom;
    std::vector<Expr> kids;
  };

  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

  std::shared_ptr<const Node> node_;
};

// Three-valued truth (Kleene), used wherever a budget may leave a value unestablished.
enum class Tri : std::uint8_t { False, True, Unknown };

inline Tri tri(bool b) noexcept { return b ? Tri::True : Tri::False; }
inline Tri tri_not(Tri a) noexcept {
  return a == Tri::Unknown ? Tri::Unknown : (a == Tri::True ? Tri::False : Tri::True);
}
inline Tri tri_and(Tri a, Tri b) noexcept {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}
inline Tri tri_or(Tri a, Tri b) noexcept { return tri_not(tri_and(tri_not(a), tri_not(b))); }
inline const char* to_string(Tri t) noexcept {
  return t == Tri::True ? "true" : (t == Tri::False ? "false" : "unknown");
}

// Kleene evaluation with `value(atom) -> Tri`.
template <class Atom, class F>
Tri evaluate3(const Expr<Atom>& e, F&& value) {
  switch (e.op()) {
    case Op::False: return Tri::False;
    case Op::True: return Tri::True;
    case Op::Atom: return value(e.atom());
    case Op::Not: return tri_not(evaluate3(e.lhs(), value));
    case Op::And: return tri_and(evaluate3(e.lhs(), value), evaluate3(e.rhs(), value));
    case Op::Or: return tri_or(evaluate3(e.lhs(), value), evaluate3(e.rhs(), value));
    case Op::Implies: return tri_or(tri_not(evaluate3(e.lhs(), value)), evaluate3(e.rhs(), value));
    case Op::Iff: {
      Tri a = evaluate3(e.lhs(), value), b = evaluate3(e.rhs(), value);
      if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
      return tri(a == b);
    }
  }
  return Tri::Unknown;
}

}  // namespace oucl
