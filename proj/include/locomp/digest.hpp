#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace locomp {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::span<const std::uint8_t> data);
std::string to_hex(std::span<const std::uint8_t> data);

/// Hex SHA-256 of a file's contents. Throws MissingFile / Io.
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace locomp
