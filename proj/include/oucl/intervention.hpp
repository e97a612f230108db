#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oucl/variable.hpp"

namespace oucl {

// Finite partial map from variables to {0,1}: the variables held fixed and their values.
class Intervention {
 public:
  using Map = std::map<VariableId, bool>;

  Intervention() = default;
  explicit Intervention(Map assignments) : assignments_(std::move(assignments)) {}

  // Parses `X=1,Y_3=0`; the empty string is the empty intervention.
  static Intervention parse(std::string_view text);

  // `outer` wins on overlap: compose(i', i) fixes dom(i') ∪ dom(i).
  static Intervention compose(const Intervention& outer, const Intervention& inner);

  bool empty() const noexcept { return assignments_.empty(); }
  std::size_t size() const noexcept { return assignments_.size(); }
  bool contains(const VariableId& v) const { return assignments_.count(v) != 0; }
  std::optional<bool> get(const VariableId& v) const;
  void set(const VariableId& v, bool value) { assignments_[v] = value; }
  void erase(const VariableId& v) { assignments_.erase(v); }

  const Map& assignments() const noexcept { return assignments_; }
  auto begin() const { return assignments_.begin(); }
  auto end() const { return assignments_.end(); }

  // True iff every assignment of *this also appears in `other`.
  bool is_restriction_of(const Intervention& other) const;

  std::string str() const;

  friend auto operator<=>(const Intervention&, const Intervention&) = default;
  friend bool operator==(const Intervention&, const Intervention&) = default;

 private:
  Map assignments_;
};

// All 3^n interventions over `vars` (each variable free, fixed 0 or fixed 1),
// in base-3 counting order with the first variable as the least significant digit.
std::vector<Intervention> all_interventions(const std::vector<VariableId>& vars);

}  // namespace oucl
