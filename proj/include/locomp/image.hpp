#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "locomp/error.hpp"

namespace locomp {

struct ImageDims {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t plane_size() const noexcept { return height * width; }
  std::size_t size() const noexcept { return height * width * channels; }
  bool operator==(const ImageDims&) const = default;
};

enum class DType : std::uint8_t { U8 = 0, F32 = 1 };

constexpr std::size_t dtype_size(DType t) noexcept { return t == DType::U8 ? 1 : 4; }

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<std::uint8_t>() { return DType::U8; }
template <>
constexpr DType dtype_of<float>() { return DType::F32; }

/// Dense planar image: channel-major, then row-major within a channel.
class Image {
 public:
  Image() = default;
  Image(ImageDims dims, DType dtype);

  template <class T>
  static Image from_values(ImageDims dims, std::vector<T> values) {
    if (values.size() != dims.size()) {
      throw Error(ErrorCode::DimensionMismatch, "pixel buffer does not match image dimensions");
    }
    Image img;
    img.dims_ = dims;
    img.storage_ = std::move(values);
    return img;
  }

  const ImageDims& dims() const noexcept { return dims_; }
  std::size_t height() const noexcept { return dims_.height; }
  std::size_t width() const noexcept { return dims_.width; }
  std::size_t channels() const noexcept { return dims_.channels; }
  DType dtype() const noexcept {
    return std::holds_alternative<std::vector<std::uint8_t>>(storage_) ? DType::U8 : DType::F32;
  }

  template <class T>
  std::span<const T> values() const {
    return std::get<std::vector<T>>(storage_);
  }
  template <class T>
  std::span<T> values() {
    return std::get<std::vector<T>>(storage_);
  }
  template <class T>
  std::span<const T> plane(std::size_t c) const {
    return values<T>().subspan(c * dims_.plane_size(), dims_.plane_size());
  }
  template <class T>
  std::span<T> plane(std::size_t c) {
    return values<T>().subspan(c * dims_.plane_size(), dims_.plane_size());
  }

  /// Pixel value widened to double, whatever the element type.
  double at(std::size_t c, std::size_t y, std::size_t x) const;

  /// Calls f(span<T>) with the typed pixel buffer.
  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit([&](const auto& v) { return f(std::span(v)); }, storage_);
  }
  template <class F>
  decltype(auto) visit(F&& f) {
    return std::visit([&](auto& v) { return f(std::span(v)); }, storage_);
  }

  /// Raw little-endian bytes in planar order.
  std::vector<std::uint8_t> bytes() const;

  bool operator==(const Image& other) const = default;

 private:
  ImageDims dims_{};
  std::variant<std::vector<std::uint8_t>, std::vector<float>> storage_;
};

/// Copy of a rectangular window (all channels).
Image crop_at(const Image& image, std::size_t top, std::size_t left, std::size_t height,
              std::size_t width);

/// Single channel k as a one-channel image.
Image extract_channel(const Image& image, std::size_t k);

}  // namespace locomp
