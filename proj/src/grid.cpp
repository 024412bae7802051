#include "locomp/grid.hpp"

#include <string>

namespace locomp {

namespace {

void require_block_sizes(std::size_t m, std::size_t n) {
  if (n < 1 || n >= m) {
    throw Error(ErrorCode::InvalidBlockSizes,
                "need 1 <= n < m, got m=" + std::to_string(m) + " n=" + std::to_string(n));
  }
}

}  // namespace

void validate(const ConvArch& arch) {
  if (arch.region < 1 || arch.stride < 1 || arch.stride > arch.region) {
    throw Error(ErrorCode::InvalidArgument, "conv arch needs r >= 1, 1 <= s <= r");
  }
}

const RegionOffset* CompatReport::first_misaligned() const noexcept {
  for (const auto& o : offsets) {
    if (!o.aligned) return &o;
  }
  return nullptr;
}

TilingPlan plan_tiling(const ImageDims& dims, std::size_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "block size m must be >= 1");
  if (dims.height < 1 || dims.width < 1 || dims.channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be >= 1");
  }
  if (dims.height % m != 0 || dims.width % m != 0) {
    throw Error(ErrorCode::NonDivisible, std::to_string(dims.height) + "x" +
                                             std::to_string(dims.width) +
                                             " is not tiled by m=" + std::to_string(m));
  }
  return {m, dims.height / m, dims.width / m};
}

ImageDims compressed_dims(const ImageDims& dims, std::size_t m, std::size_t n) {
  require_block_sizes(m, n);
  const TilingPlan plan = plan_tiling(dims, m);
  return {plan.blocks_down * n, plan.blocks_across * n, dims.channels};
}

CompressionRatios compression_ratios(std::size_t m, std::size_t n, std::size_t copies) {
  require_block_sizes(m, n);
  if (copies < 1) throw Error(ErrorCode::InvalidArgument, "copies c must be >= 1");
  const double m2 = static_cast<double>(m * m);
  const double n2 = static_cast<double>(n * n);
  return {m2 / n2, m2 / (n2 * static_cast<double>(copies))};
}

CompatReport check_stride_compat(const ConvArch& arch, std::size_t n, std::size_t offsets) {
  CompatReport rep;
  rep.region = arch.region;
  rep.stride = arch.stride;
  rep.n = n;
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "compressed block size n must be >= 1");
  if (offsets < 2) throw Error(ErrorCode::InvalidArgument, "need at least two region offsets");
  rep.offsets.reserve(offsets);
  bool all_aligned = true;
  for (std::size_t i = 0; i < offsets; ++i) {
    const std::size_t off = i * arch.stride;
    const bool aligned = off % n == 0;
    all_aligned = all_aligned && aligned;
    rep.offsets.push_back({off, aligned});
  }
  rep.stride_ok = all_aligned;
  rep.region_ok = arch.region % n == 0;
  return rep;
}

}  // namespace locomp
