#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace oucl {

// A member of the countably infinite variable space: a base identifier plus a
// (possibly empty) list of natural-number indices. Spelled `X`, `X_3`, `X_3_1`.
//
// The base may itself contain underscores, but it may not end in `_<digits>`;
// that suffix is always read as an index so that printing round-trips.
class VariableId {
 public:
  VariableId() = default;
  explicit VariableId(std::string base, std::vector<std::uint32_t> indices = {});

  // Parses a full spelling such as "X_3_1". Throws ParseError.
  static VariableId parse(std::string_view text);

  const std::string& base() const noexcept { return base_; }
  const std::vector<std::uint32_t>& indices() const noexcept { return indices_; }

  std::string str() const;

  // Bases `__Z...` and `__W...` belong to synthesized gadget variables.
  bool is_reserved() const noexcept;

  // Canonical order: lexicographic on base, then on the index list.
  friend auto operator<=>(const VariableId&, const VariableId&) = default;
  friend bool operator==(const VariableId&, const VariableId&) = default;

 private:
  std::string base_;
  std::vector<std::uint32_t> indices_;
};

struct VariableIdHash {
  std::size_t operator()(const VariableId& v) const noexcept;
};

bool is_valid_base(std::string_view base) noexcept;

}  // namespace oucl
