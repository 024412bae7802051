#include "locomp/augment.hpp"

#include <algorithm>
#include <string>

namespace locomp {

void validate(const AugmentParams& params) {
  if (params.resize_to < 1 || params.crop_to < 1) {
    throw Error(ErrorCode::InvalidArgument, "resize and crop sizes must be >= 1");
  }
  if (params.crop_to > params.resize_to) {
    throw Error(ErrorCode::CropTooLarge, "crop size exceeds resize size");
  }
  if (!(params.flip_prob >= 0.0 && params.flip_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "flip probability must lie in [0, 1]");
  }
}

Image resize(const Image& image, std::size_t side) { return resample(image, side, side); }

Image hflip(const Image& image) {
  Image out = image;
  const ImageDims& d = image.dims();
  out.visit([&](auto v) {
    for (std::size_t r = 0; r < d.channels * d.height; ++r) {
      std::reverse(v.begin() + static_cast<std::ptrdiff_t>(r * d.width),
                   v.begin() + static_cast<std::ptrdiff_t>((r + 1) * d.width));
    }
  });
  return out;
}

Image random_crop(const Image& image, std::size_t side, Rng& rng, AugmentRecord* record) {
  if (side < 1 || side > image.height() || side > image.width()) {
    throw Error(ErrorCode::CropTooLarge, "crop side " + std::to_string(side) + " exceeds " +
                                             std::to_string(image.height()) + "x" +
                                             std::to_string(image.width()));
  }
  const std::size_t top = rng.uniform_index(image.height() - side + 1);
  const std::size_t left = rng.uniform_index(image.width() - side + 1);
  if (record) {
    record->top = top;
    record->left = left;
  }
  return crop_at(image, top, left, side, side);
}

Image augment_full(const Image& image, const AugmentParams& params, Rng& rng,
                   AugmentRecord* record) {
  validate(params);
  return augment_resized(resize(image, params.resize_to), params, rng, record);
}

Image augment_resized(const Image& resized, const AugmentParams& params, Rng& rng,
                      AugmentRecord* record) {
  validate(params);
  if (resized.height() != params.resize_to || resized.width() != params.resize_to) {
    throw Error(ErrorCode::DimensionMismatch, "image is not at the resize side");
  }
  AugmentRecord rec{rng.key()};
  Image out = random_crop(resized, params.crop_to, rng, &rec);
  rec.flipped = rng.bernoulli(params.flip_prob);
  if (rec.flipped) out = hflip(out);
  if (record) *record = rec;
  return out;
}

CompressedImage limited_crop_at(const CompressedImage& cimg, std::size_t block_top,
                                std::size_t block_left, std::size_t crop_blocks) {
  if (crop_blocks < 1 || block_top + crop_blocks > cimg.blocks_down() ||
      block_left + crop_blocks > cimg.blocks_across()) {
    throw Error(ErrorCode::CropTooLarge, "block crop window exceeds compressed grid");
  }
  CompressedImage out = cimg;
  const std::size_t n = cimg.n;
  out.grid = crop_at(cimg.grid, block_top * n, block_left * n, crop_blocks * n, crop_blocks * n);
  return out;
}

CompressedImage limited_crop(const CompressedImage& cimg, std::size_t crop_blocks, Rng& rng,
                             AugmentRecord* record) {
  if (crop_blocks < 1 || crop_blocks > cimg.blocks_down() || crop_blocks > cimg.blocks_across()) {
    throw Error(ErrorCode::CropTooLarge, "crop of " + std::to_string(crop_blocks) +
                                             " blocks exceeds compressed grid");
  }
  const std::size_t top = rng.uniform_index(cimg.blocks_down() - crop_blocks + 1);
  const std::size_t left = rng.uniform_index(cimg.blocks_across() - crop_blocks + 1);
  if (record) {
    record->top = top * cimg.n;
    record->left = left * cimg.n;
  }
  return limited_crop_at(cimg, top, left, crop_blocks);
}

CompressedImage limited_flip(const CompressedImage& cimg) {
  const std::size_t n = cimg.n;
  const ImageDims& d = cimg.grid.dims();
  if (n == 0 || d.width % n != 0) {
    throw Error(ErrorCode::NonDivisible, "compressed width is not a multiple of n");
  }
  const std::size_t blocks = d.width / n;
  CompressedImage out = cimg;
  cimg.grid.visit([&](auto src) {
    using T = std::remove_const_t<typename decltype(src)::value_type>;
    auto dst = out.grid.values<T>();
    for (std::size_t r = 0; r < d.channels * d.height; ++r) {
      const T* in_row = src.data() + r * d.width;
      T* out_row = dst.data() + r * d.width;
      for (std::size_t b = 0; b < blocks; ++b) {
        std::copy(in_row + b * n, in_row + (b + 1) * n, out_row + (blocks - 1 - b) * n);
      }
    }
  });
  return out;
}

CompressedImage augment_limited(const CompressedImage& cimg, const LimitedAugmentParams& params,
                                Rng& rng, AugmentRecord* record) {
  if (!(params.flip_prob >= 0.0 && params.flip_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "flip probability must lie in [0, 1]");
  }
  AugmentRecord rec{rng.key()};
  CompressedImage out = params.crop_blocks ? limited_crop(cimg, *params.crop_blocks, rng, &rec) : cimg;
  rec.flipped = rng.bernoulli(params.flip_prob);
  if (rec.flipped) out = limited_flip(out);
  if (record) *record = rec;
  return out;
}

}  // namespace locomp
