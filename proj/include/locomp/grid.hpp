#pragma once

#include <cstddef>
#include <vector>

#include "locomp/image.hpp"

namespace locomp {

/// Exact, non-overlapping tiling of an image by m x m blocks.
struct TilingPlan {
  std::size_t block_size = 1;
  std::size_t blocks_down = 0;
  std::size_t blocks_across = 0;

  std::size_t block_count() const noexcept { return blocks_down * blocks_across; }
};

/// First convolutional layer geometry: r x r region advanced by stride s.
struct ConvArch {
  std::size_t region = 1;
  std::size_t stride = 1;
};

void validate(const ConvArch& arch);

struct CompressionRatios {
  double computational = 1.0;  ///< m^2 / n^2
  double storage = 1.0;        ///< m^2 / (n^2 c)
};

struct RegionOffset {
  std::size_t offset = 0;
  bool aligned = false;  ///< offset % n == 0
};

struct CompatReport {
  std::size_t region = 0;
  std::size_t stride = 0;
  std::size_t n = 0;
  bool stride_ok = false;  ///< every enumerated offset i*s is a multiple of n
  bool region_ok = false;  ///< r % n == 0
  std::vector<RegionOffset> offsets;

  /// First offset that is not a multiple of n, if any.
  const RegionOffset* first_misaligned() const noexcept;
};

inline constexpr std::size_t kDefaultCompatOffsets = 64;

TilingPlan plan_tiling(const ImageDims& dims, std::size_t m);

ImageDims compressed_dims(const ImageDims& dims, std::size_t m, std::size_t n);

CompressionRatios compression_ratios(std::size_t m, std::size_t n, std::size_t copies);

CompatReport check_stride_compat(const ConvArch& arch, std::size_t n,
                                 std::size_t offsets = kDefaultCompatOffsets);

}  // namespace locomp
