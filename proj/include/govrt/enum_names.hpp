#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "govrt/canonical.hpp"

namespace govrt {

/// Specialize with `static constexpr std::array<std::pair<E, std::string_view>, N> table`.
template <typename E>
struct EnumNames;

template <typename E>
concept NamedEnum = requires { EnumNames<E>::table; };

template <NamedEnum E>
constexpr std::string_view to_string(E value) {
  for (const auto& [v, name] : EnumNames<E>::table) {
    if (v == value) return name;
  }
  return "?";
}

template <NamedEnum E>
constexpr std::optional<E> parse_enum(std::string_view name) {
  for (const auto& [v, n] : EnumNames<E>::table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

template <NamedEnum E>
void to_json(Json& j, const E& value) {
  j = std::string(to_string(value));
}

template <NamedEnum E>
void from_json(const Json& j, E& value) {
  if (!j.is_string()) fail(ErrorCode::InvalidRecord, "expected enum name string");
  auto parsed = parse_enum<E>(j.get_ref<const std::string&>());
  if (!parsed) fail(ErrorCode::InvalidRecord, "unknown enum value '" + j.get<std::string>() + "'");
  value = *parsed;
}

}  // namespace govrt
