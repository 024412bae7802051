#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "locomp/compressors.hpp"
#include "locomp/grid.hpp"

namespace locomp {

struct RegionVisit {
  std::size_t top = 0;
  std::size_t left = 0;
  bool aligned = false;      ///< both offsets are multiples of n
  bool whole_blocks = false; ///< aligned and the region ends on a block edge
};

/// Every position of the r x r region as it strides left-to-right,
/// top-to-bottom over `dims`.
struct ConsumptionReport {
  std::size_t positions_down = 0;
  std::size_t positions_across = 0;
  std::vector<RegionVisit> regions;
  bool stride_ok = false;  ///< all regions start on a block edge
  bool region_ok = false;  ///< every region spans a whole number of blocks (r % n == 0)

  const RegionVisit* first_misaligned() const noexcept;
};

ConsumptionReport simulate_conv_consumption(const ImageDims& dims, const ConvArch& arch,
                                            std::size_t n);

/// Reshape a fully-connected layer input to reshape_rows x reshape_cols and
/// left-multiply by a sketch_rows x reshape_rows matrix.
struct FcSketchSpec {
  std::size_t input_len = 0;
  std::size_t reshape_rows = 0;
  std::size_t reshape_cols = 0;
  std::size_t sketch_rows = 0;
  std::uint64_t seed = 0;
};

void validate(const FcSketchSpec& spec);

/// sketch_rows x reshape_rows matrix with gamma = 1, seeded by spec.seed.
SketchMatrix make_fc_matrix(const FcSketchSpec& spec, double gamma = 1.0);

std::vector<float> sketch_fc_inputs(std::span<const float> input, const FcSketchSpec& spec,
                                    const SketchMatrix& mat);

/// sketch_rows / reshape_rows, unrounded.
double fc_compression_ratio(const FcSketchSpec& spec);

}  // namespace locomp
