#include "govrt/canonical.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

namespace govrt {
namespace {

void check_finite(const Json& value) {
  switch (value.type()) {
    case Json::value_t::number_float:
      if (!std::isfinite(value.get<double>())) {
        fail(ErrorCode::InvalidRecord, "non-finite number in record");
      }
      break;
    case Json::value_t::object:
    case Json::value_t::array:
      for (const auto& child : value) check_finite(child);
      break;
    default:
      break;
  }
}

}  // namespace

std::string canonical_serialize(const Json& value) {
  check_finite(value);
  try {
    return value.dump();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidRecord, std::string("cannot serialize: ") + e.what());
  }
}

Digest content_digest(std::string_view content) {
  return sha256(canonical_serialize(Json(std::string(content))));
}

std::string derive_id(const Json& parts) {
  const Digest d = sha256(canonical_serialize(parts));
  return to_hex(std::span<const std::uint8_t>(d.data(), 16));
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidRecord, std::string("malformed JSON: ") + e.what());
  }
}

Json parse_structured_text(std::string_view text, std::string_view origin) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_json(text);
  try {
    toml::table table = toml::parse(text, origin);
    std::ostringstream out;
    out << toml::json_formatter{table};
    return parse_json(out.str());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ": " << e.description();
    fail(ErrorCode::InvalidRecord, msg.str());
  }
}

Json load_structured_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_structured_text(buf.str(), path.string());
}

const Json& require_field(const Json& j, std::string_view key) {
  if (!j.is_object()) fail(ErrorCode::InvalidRecord, "expected object holding '" + std::string(key) + "'");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::InvalidRecord, "missing field '" + std::string(key) + "'");
  return *it;
}

}  // namespace govrt
