#include "oucl/intervention.hpp"

#include "oucl/errors.hpp"

namespace oucl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Intervention Intervention::parse(std::string_view text) {
  Intervention out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t column = 1;
  while (true) {
    auto comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(1, column, "expected VAR=0|1 in intervention, got '" + std::string(item) + "'");
    VariableId var = VariableId::parse(trim(item.substr(0, eq)));
    std::string_view value = trim(item.substr(eq + 1));
    if (value != "0" && value != "1")
      throw ParseError(1, column, "intervention value must be 0 or 1, got '" + std::string(value) + "'");
    if (out.contains(var)) throw ParseError(1, column, "variable " + var.str() + " assigned twice");
    out.set(var, value == "1");
    if (comma == std::string_view::npos) break;
    column += comma + 1;
    text.remove_prefix(comma + 1);
  }
  return out;
}

Intervention Intervention::compose(const Intervention& outer, const Intervention& inner) {
  Intervention out = inner;
  for (const auto& [v, b] : outer) out.set(v, b);
  return out;
}

std::optional<bool> Intervention::get(const VariableId& v) const {
  auto it = assignments_.find(v);
  if (it == assignments_.end()) return std::nullopt;
  return it->second;
}

bool Intervention::is_restriction_of(const Intervention& other) const {
  for (const auto& [v, b] : assignments_) {
    auto o = other.get(v);
    if (!o || *o != b) return false;
  }
  return true;
}

std::string Intervention::str() const {
  std::string out;
  for (const auto& [v, b] : assignments_) {
    if (!out.empty()) out += ',';
    out += v.str();
    out += b ? "=1" : "=0";
  }
  return out;
}

std::vector<Intervention> all_interventions(const std::vector<VariableId>& vars) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) total *= 3;
  std::vector<Intervention> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    Intervention iv;
    std::size_t c = code;
    for (const auto& v : vars) {
      auto digit = c % 3;
      c /= 3;
      if (digit != 0) iv.set(v, digit == 2);
    }
    out.push_back(std::move(iv));
  }
  return out;
}

}  // namespace oucl
