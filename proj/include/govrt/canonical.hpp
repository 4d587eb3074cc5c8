#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "govrt/digest.hpp"
#include "govrt/error.hpp"

namespace govrt {

// std::map-backed objects keep keys in lexicographic order, which the
// canonical form relies on.
using Json = nlohmann::json;

/// UTF-8, keys sorted, no insignificant whitespace, integers base-10,
/// doubles as shortest round-trip decimal. Non-finite numbers are rejected.
std::string canonical_serialize(const Json& value);

template <typename T>
std::string canonical_serialize_record(const T& record) {
  return canonical_serialize(Json(record));
}

/// SHA-256 over the canonical serialization of `content` (a JSON string).
Digest content_digest(std::string_view content);

/// First 16 bytes of SHA-256 over the canonical form of `parts`, hex-encoded.
std::string derive_id(const Json& parts);

/// Parses canonical JSON text; throws InvalidRecord on malformed input.
Json parse_json(std::string_view text);

/// Accepts JSON or TOML text and returns the JSON tree.
Json parse_structured_text(std::string_view text, std::string_view origin = "<text>");
Json load_structured_file(const std::filesystem::path& path);

// Field accessors for from_json implementations: throw InvalidRecord naming
// the offending field instead of nlohmann's generic type errors.
const Json& require_field(const Json& j, std::string_view key);

template <typename T>
T get_field(const Json& j, std::string_view key) {
  const Json& v = require_field(j, key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidRecord, "field '" + std::string(key) + "': " + e.what());
  }
}

template <typename T>
T get_field_or(const Json& j, std::string_view key, T fallback) {
  if (!j.is_object()) fail(ErrorCode::InvalidRecord, "expected object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidRecord, "field '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace govrt
