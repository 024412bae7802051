#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace locomp {

/// Whole-file read. Throws MissingFile if absent, Io on read failure.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace locomp
