#pragma once

#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "oucl/formula.hpp"
#include "oucl/logic.hpp"

namespace oucl {

// Axiom schemas of AX (R, K, FD, C, Rec), AX+ (adds Wit, Rec+) and AX+T (adds Trans).
//   R      [α]α
//   K      [α](β -> γ) -> ([α]β -> [α]γ)
//   FD     [α]~β <-> ~[α]β
//   C      ([α]β & [α]γ) -> [α & β]γ          β a literal conjunction disjoint from α
//   Rec    ([α1 & X1]l2 & [α1 & ~X1]~l2 & ... & [α(k-1) & X(k-1)]lk & [α(k-1) & ~X(k-1)]~lk)
//            -> ~([αk & Xk]l1 & [αk & ~Xk]~l1)  li an Xi-literal, X1 != Xk
//   Wit    ([α & X1]l2 & [α & ~X1]~l2) -> X1 ~> X2
//   Rec+   (X1 ~> X2 & ... & X(k-1) ~> Xk) -> ~(Xk ~> X1)
//   Trans  (X ~> Y & Y ~> Z) -> X ~> Z
enum class Schema { R, K, FD, C, Rec, Wit, RecPlus, Trans };

inline constexpr Schema kAllSchemas[] = {Schema::R,   Schema::K,   Schema::FD,      Schema::C,
                                         Schema::Rec, Schema::Wit, Schema::RecPlus, Schema::Trans};

// "R", "K", "FD", "C", "Rec", "Wit", "Rec+", "Trans".
const char* to_string(Schema s) noexcept;
// Also accepts "F/D". Throws Error.
Schema parse_schema(std::string_view s);
bool schema_in_system(Schema s, System sys) noexcept;

// Exact recognizer. Antecedents compare as interventions; conjunction chains
// in the Rec and Rec+ premises may be associated either way. Returns false
// when the schema is not part of `sys`.
bool match_axiom(const Formula& f, Schema s, System sys);

struct AxiomGenOptions {
  std::vector<VariableId> vars;  // at least 3
  std::size_t max_antecedent = 2;
  int consequent_depth = 2;
  std::size_t max_chain = 4;  // k for Rec and Rec+
};

// A random instance of the schema over opts.vars.
Formula random_instance(std::mt19937_64& rng, Schema s, const AxiomGenOptions& opts);

// ([α & w]y & [α & y]w) -> [α]y for literals w, y over distinct variables not in α.
Formula random_reversibility(std::mt19937_64& rng, const AxiomGenOptions& opts);

}  // namespace oucl
