#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "locomp/imageio.hpp"
#include "support/oracles.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("locomp-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Smooth random RGB scene: a few gradients plus noise, so resampling and
/// percentiles see realistic structure rather than white noise.
inline locomp::Image synthetic_photo(std::mt19937_64& gen, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 6.0);
  std::vector<std::uint8_t> px(h * w * 3);
  for (std::size_t c = 0; c < 3; ++c) {
    const double a = u(gen) * 255, gx = u(gen) * 2 - 1, gy = u(gen) * 2 - 1, f = u(gen) * 0.2;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double v = a + gx * 120.0 * x / w + gy * 120.0 * y / h + 40.0 * std::sin(f * (x + y)) +
                   noise(gen);
        px[(c * h + y) * w + x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }
  return locomp::Image::from_values(locomp::ImageDims{h, w, 3}, std::move(px));
}

/// Writes `count` images into class sub-directories alternating between
/// "cat" and "dog"; even indices as PNG, odd as PPM. Sizes vary.
inline void write_dataset(const std::filesystem::path& root, std::size_t count, std::uint64_t seed,
                          std::size_t base = 240) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto dir = root / (i % 2 ? "dog" : "cat");
    std::filesystem::create_directories(dir);
    const auto img = synthetic_photo(gen, base + (i * 7) % 40, base + (i * 13) % 50);
    char name[32];
    std::snprintf(name, sizeof name, "img%03zu", i);
    if (i % 2 == 0) {
      locomp::write_png(dir / (std::string(name) + ".png"), img);
    } else {
      locomp::write_pnm(dir / (std::string(name) + ".ppm"), img);
    }
  }
}

}  // namespace fixture
