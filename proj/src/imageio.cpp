#include "locomp/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <string>

#include "locomp/fileutil.hpp"

namespace fs = std::filesystem;

namespace locomp {

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

/// Interleaved HWC bytes to planar.
Image from_interleaved(const std::uint8_t* data, std::size_t h, std::size_t w, std::size_t ch) {
  std::vector<std::uint8_t> planar(h * w * ch);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        planar[(c * h + y) * w + x] = data[(y * w + x) * ch + c];
      }
    }
  }
  return Image::from_values<std::uint8_t>({h, w, ch}, std::move(planar));
}

std::vector<std::uint8_t> to_interleaved(const Image& image) {
  const ImageDims& d = image.dims();
  const auto src = image.values<std::uint8_t>();
  std::vector<std::uint8_t> out(d.size());
  for (std::size_t y = 0; y < d.height; ++y) {
    for (std::size_t x = 0; x < d.width; ++x) {
      for (std::size_t c = 0; c < d.channels; ++c) {
        out[(y * d.width + x) * d.channels + c] = src[(c * d.height + y) * d.width + x];
      }
    }
  }
  return out;
}

void require_writable(const Image& image) {
  if (image.dtype() != DType::U8 || (image.channels() != 1 && image.channels() != 3)) {
    throw Error(ErrorCode::UnsupportedImage, "only 1- or 3-channel u8 images can be written");
  }
}

struct PngReadState {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

/// State shared with libpng callbacks. libpng reports errors by longjmp, so
/// every frame between setjmp and the callbacks holds only trivially
/// destructible locals; results and buffers live here.
struct PngJob {
  PngReadState input;
  std::vector<std::uint8_t>* output = nullptr;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  char error[256] = {};
};

void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* job = static_cast<PngJob*>(png_get_io_ptr(png));
  auto& in = job->input;
  if (in.pos + len > in.data.size()) png_error(png, "truncated PNG");
  std::copy_n(in.data.data() + in.pos, len, out);
  in.pos += len;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* job = static_cast<PngJob*>(png_get_io_ptr(png));
  job->output->insert(job->output->end(), data, data + len);
}

void png_flush_cb(png_structp) {}

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* job = static_cast<PngJob*>(png_get_error_ptr(png));
  std::snprintf(job->error, sizeof job->error, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

bool run_png_decode(PngJob& job) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &job, png_error_cb, png_warning_cb);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &job, png_read_cb);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  job.width = png_get_image_width(png, info);
  job.height = png_get_image_height(png, info);
  job.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != job.width * job.channels) png_error(png, "unexpected row layout");
  job.pixels.resize(job.height * rowbytes);
  job.rows.resize(job.height);
  for (std::size_t y = 0; y < job.height; ++y) job.rows[y] = job.pixels.data() + y * rowbytes;
  png_read_image(png, job.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool run_png_encode(PngJob& job) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &job, png_error_cb, png_warning_cb);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &job, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(job.width), static_cast<png_uint_32>(job.height),
               8, job.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, job.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::UnsupportedImage, "not a PNG file");
  }
  PngJob job;
  job.input.data = bytes;
  if (!run_png_decode(job)) throw Error(ErrorCode::UnsupportedImage, std::string("png: ") + job.error);
  if (job.channels != 1 && job.channels != 3) {
    throw Error(ErrorCode::UnsupportedImage, "png: unexpected channel count");
  }
  return from_interleaved(job.pixels.data(), job.height, job.width, job.channels);
}

}  // namespace

bool is_supported_image(const fs::path& path) {
  const std::string e = lower_ext(path);
  return e == ".png" || e == ".ppm" || e == ".pgm" || e == ".pnm";
}

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_ws();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorCode::UnsupportedImage, "malformed PNM header");
    }
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1u << 24)) throw Error(ErrorCode::UnsupportedImage, "PNM dimension too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::UnsupportedImage, "only binary PGM (P5) and PPM (P6) are supported");
  }
  const std::size_t ch = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  const std::size_t w = number();
  const std::size_t h = number();
  const std::size_t maxval = number();
  if (w == 0 || h == 0 || maxval == 0 || maxval > 255) {
    throw Error(ErrorCode::UnsupportedImage, "PNM must be 8-bit with non-zero size");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::UnsupportedImage, "malformed PNM header");
  }
  ++pos;
  if (bytes.size() - pos < w * h * ch) throw Error(ErrorCode::UnsupportedImage, "truncated PNM");
  return from_interleaved(bytes.data() + pos, h, w, ch);
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
  require_writable(image);
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto px = to_interleaved(image);
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

Image load_image(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes);
  throw Error(ErrorCode::UnsupportedImage, "unrecognized image format: " + path.string());
}

void write_pnm(const fs::path& path, const Image& image) {
  write_file_atomic(path, encode_pnm(image));
}

void write_png(const fs::path& path, const Image& image) {
  require_writable(image);
  std::vector<std::uint8_t> encoded;
  PngJob job;
  job.output = &encoded;
  job.width = image.width();
  job.height = image.height();
  job.channels = image.channels();
  job.pixels = to_interleaved(image);
  job.rows.resize(job.height);
  for (std::size_t y = 0; y < job.height; ++y) {
    job.rows[y] = job.pixels.data() + y * job.width * job.channels;
  }
  if (!run_png_encode(job)) throw Error(ErrorCode::Io, std::string("png: ") + job.error);
  write_file_atomic(path, encoded);
}

}  // namespace locomp
