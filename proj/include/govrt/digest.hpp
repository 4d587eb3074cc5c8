#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace govrt {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr Digest kZeroDigest{};

Digest sha256(std::string_view bytes);
Digest sha256(std::span<const std::uint8_t> prefix, std::string_view bytes);

/// Lowercase hex.
std::string to_hex(std::span<const std::uint8_t> bytes);
inline std::string to_hex(const Digest& d) { return to_hex(std::span<const std::uint8_t>(d)); }

/// Strict: exactly 64 lowercase hex characters.
std::optional<Digest> digest_from_hex(std::string_view hex);

}  // namespace govrt
