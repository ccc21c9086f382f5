#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autonom {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

// hex digest of the UTF-8 bytes of `data`, lowercase
std::string sha256_hex(std::string_view data);

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string to_hex(const Digest& digest);

// strict: even length, [0-9a-fA-F] only; nullopt otherwise
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

}  // namespace autonom
