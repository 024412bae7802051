#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "locomp/compressors.hpp"
#include "locomp/image.hpp"
#include "locomp/random.hpp"

namespace locomp {

/// Full suite: resize to resize_to x resize_to, random crop to crop_to,
/// left-right flip with probability flip_prob.
struct AugmentParams {
  std::size_t resize_to = 256;
  std::size_t crop_to = 224;
  double flip_prob = 0.5;
};

/// Compressed-domain suite. crop_blocks = nullopt disables cropping.
struct LimitedAugmentParams {
  std::optional<std::size_t> crop_blocks;
  double flip_prob = 0.5;
};

/// What an augmentation pass drew, in draw order.
struct AugmentRecord {
  std::uint64_t stream_key = 0;
  std::size_t top = 0;
  std::size_t left = 0;
  bool flipped = false;
};

void validate(const AugmentParams& params);

Image resize(const Image& image, std::size_t side);

Image hflip(const Image& image);

/// Draws (top, left) uniformly, top first. Throws CropTooLarge.
Image random_crop(const Image& image, std::size_t side, Rng& rng, AugmentRecord* record = nullptr);

/// resize, then crop offsets, then flip coin, all drawn from `rng`.
Image augment_full(const Image& image, const AugmentParams& params, Rng& rng,
                   AugmentRecord* record = nullptr);

/// augment_full for an image already resized to params.resize_to.
Image augment_resized(const Image& resized, const AugmentParams& params, Rng& rng,
                      AugmentRecord* record = nullptr);

/// Block-aligned crop: a crop_blocks*n square window whose offsets are
/// multiples of n.
CompressedImage limited_crop_at(const CompressedImage& cimg, std::size_t block_top,
                                std::size_t block_left, std::size_t crop_blocks);
CompressedImage limited_crop(const CompressedImage& cimg, std::size_t crop_blocks, Rng& rng,
                             AugmentRecord* record = nullptr);

/// Reverses the order of n-wide block columns; block interiors are untouched.
CompressedImage limited_flip(const CompressedImage& cimg);

/// Optional crop (offsets drawn first) then flip coin.
CompressedImage augment_limited(const CompressedImage& cimg, const LimitedAugmentParams& params,
                                Rng& rng, AugmentRecord* record = nullptr);

}  // namespace locomp
