#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "locomp/image.hpp"

namespace locomp {

/// Reads 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary PGM/PPM
/// (P5/P6, maxval <= 255) into a u8 image. Alpha is dropped.
/// Throws MissingFile, Io, UnsupportedImage.
Image load_image(const std::filesystem::path& path);

Image decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Image& image);

/// 1- or 3-channel u8 image as PGM/PPM.
void write_pnm(const std::filesystem::path& path, const Image& image);

/// 1- or 3-channel u8 image as PNG.
void write_png(const std::filesystem::path& path, const Image& image);

bool is_supported_image(const std::filesystem::path& path);

}  // namespace locomp
