#include "oucl/variable.hpp"

#include <cctype>
#include <charconv>
#include <functional>

#include "oucl/errors.hpp"

namespace oucl {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a trailing `_<digits>` group, or 0.
std::size_t trailing_index_group(std::string_view s) {
  std::size_t i = s.size();
  while (i > 0 && is_digit(s[i - 1])) --i;
  if (i == s.size() || i < 2 || s[i - 1] != '_') return 0;
  return s.size() - (i - 1);
}

}  // namespace

bool is_valid_base(std::string_view base) noexcept {
  if (base.empty() || !is_ident_start(base.front())) return false;
  for (char c : base)
    if (!is_ident_char(c)) return false;
  return trailing_index_group(base) == 0;
}

VariableId::VariableId(std::string base, std::vector<std::uint32_t> indices)
    : base_(std::move(base)), indices_(std::move(indices)) {
  if (!is_valid_base(base_)) throw Error("invalid variable base '" + base_ + "'");
}

VariableId VariableId::parse(std::string_view text) {
  if (text.empty() || !is_ident_start(text.front()))
    throw ParseError(1, 1, "expected a variable name, got '" + std::string(text) + "'");
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!is_ident_char(text[i]))
      throw ParseError(1, i + 1, "invalid character in variable name '" + std::string(text) + "'");

  std::vector<std::uint32_t> rev;
  std::string_view rest = text;
  while (std::size_t n = trailing_index_group(rest)) {
    std::string_view digits = rest.substr(rest.size() - n + 1);
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
      throw ParseError(1, rest.size() - n + 2, "variable index out of range in '" + std::string(text) + "'");
    rev.push_back(value);
    rest.remove_suffix(n);
  }
  return VariableId(std::string(rest), std::vector<std::uint32_t>(rev.rbegin(), rev.rend()));
}

std::string VariableId::str() const {
  std::string out = base_;
  for (auto i : indices_) {
    out += '_';
    out += std::to_string(i);
  }
  return out;
}

bool VariableId::is_reserved() const noexcept {
  return base_.rfind("__Z", 0) == 0 || base_.rfind("__W", 0) == 0;
}

std::size_t VariableIdHash::operator()(const VariableId& v) const noexcept {
  std::size_t h = std::hash<std::string>{}(v.base());
  for (auto i : v.indices()) h ^= std::hash<std::uint32_t>{}(i) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace oucl
