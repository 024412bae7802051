#include "locomp/image.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace locomp {

Image::Image(ImageDims dims, DType dtype) : dims_(dims) {
  if (dtype == DType::U8) {
    storage_ = std::vector<std::uint8_t>(dims.size(), 0);
  } else {
    storage_ = std::vector<float>(dims.size(), 0.0f);
  }
}

double Image::at(std::size_t c, std::size_t y, std::size_t x) const {
  const std::size_t idx = c * dims_.plane_size() + y * dims_.width + x;
  return visit([idx](auto v) { return static_cast<double>(v[idx]); });
}

std::vector<std::uint8_t> Image::bytes() const {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  return visit([](auto v) {
    std::vector<std::uint8_t> out(v.size_bytes());
    if (!v.empty()) std::memcpy(out.data(), v.data(), v.size_bytes());
    return out;
  });
}

Image crop_at(const Image& image, std::size_t top, std::size_t left, std::size_t height,
              std::size_t width) {
  const ImageDims& d = image.dims();
  if (top + height > d.height || left + width > d.width) {
    throw Error(ErrorCode::CropTooLarge, "crop window exceeds image bounds");
  }
  Image out({height, width, d.channels}, image.dtype());
  image.visit([&](auto src) {
    using T = typename decltype(src)::value_type;
    auto dst = out.values<std::remove_const_t<T>>();
    for (std::size_t c = 0; c < d.channels; ++c) {
      for (std::size_t y = 0; y < height; ++y) {
        const auto* row = src.data() + c * d.plane_size() + (top + y) * d.width + left;
        std::copy(row, row + width, dst.data() + (c * height + y) * width);
      }
    }
  });
  return out;
}

Image extract_channel(const Image& image, std::size_t k) {
  if (k >= image.channels()) throw Error(ErrorCode::InvalidArgument, "channel index out of range");
  return image.visit([&](auto src) {
    using T = std::remove_const_t<typename decltype(src)::value_type>;
    auto plane = src.subspan(k * image.dims().plane_size(), image.dims().plane_size());
    return Image::from_values<T>({image.height(), image.width(), 1},
                                 std::vector<T>(plane.begin(), plane.end()));
  });
}

}  // namespace locomp
