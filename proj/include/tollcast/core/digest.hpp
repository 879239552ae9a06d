#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace tollcast {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::span<const std::uint8_t> bytes);
Sha256 sha256(std::string_view text);
std::string to_hex(const Sha256& digest);
/// Hex SHA-256 of a file's bytes; throws if unreadable.
std::string file_digest(const std::filesystem::path& path);

}  // namespace tollcast
