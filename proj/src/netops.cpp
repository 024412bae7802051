#include "locomp/netops.hpp"

#include <string>

namespace locomp {

const RegionVisit* ConsumptionReport::first_misaligned() const noexcept {
  for (const auto& r : regions) {
    if (!r.aligned) return &r;
  }
  return nullptr;
}

ConsumptionReport simulate_conv_consumption(const ImageDims& dims, const ConvArch& arch,
                                            std::size_t n) {
  validate(arch);
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  ConsumptionReport rep;
  if (arch.region <= dims.height) rep.positions_down = (dims.height - arch.region) / arch.stride + 1;
  if (arch.region <= dims.width) rep.positions_across = (dims.width - arch.region) / arch.stride + 1;
  rep.regions.reserve(rep.positions_down * rep.positions_across);
  bool all_aligned = true;
  bool all_whole = true;
  for (std::size_t i = 0; i < rep.positions_down; ++i) {
    for (std::size_t j = 0; j < rep.positions_across; ++j) {
      RegionVisit v{i * arch.stride, j * arch.stride};
      v.aligned = v.top % n == 0 && v.left % n == 0;
      const bool ends_on_edge = (v.top + arch.region) % n == 0 && (v.left + arch.region) % n == 0;
      v.whole_blocks = v.aligned && ends_on_edge;
      // Region extent in blocks is integral iff start and end share a phase.
      all_whole = all_whole && (v.top % n == (v.top + arch.region) % n);
      all_aligned = all_aligned && v.aligned;
      rep.regions.push_back(v);
    }
  }
  rep.stride_ok = all_aligned;
  rep.region_ok = all_whole;
  return rep;
}

void validate(const FcSketchSpec& spec) {
  if (spec.reshape_rows < 1 || spec.reshape_cols < 1 || spec.sketch_rows < 1) {
    throw Error(ErrorCode::InvalidArgument, "fc sketch dims must be >= 1");
  }
  if (spec.reshape_rows * spec.reshape_cols != spec.input_len) {
    throw Error(ErrorCode::DimensionMismatch,
                "reshape " + std::to_string(spec.reshape_rows) + "x" +
                    std::to_string(spec.reshape_cols) + " does not hold " +
                    std::to_string(spec.input_len) + " inputs");
  }
  if (spec.sketch_rows > spec.reshape_rows) {
    throw Error(ErrorCode::InvalidBlockSizes, "sketch_rows exceeds reshape_rows");
  }
}

SketchMatrix make_fc_matrix(const FcSketchSpec& spec, double gamma) {
  validate(spec);
  return gen_sketch_matrix(spec.sketch_rows, spec.reshape_rows, gamma, spec.seed, SketchKind::Ms);
}

std::vector<float> sketch_fc_inputs(std::span<const float> input, const FcSketchSpec& spec,
                                    const SketchMatrix& mat) {
  validate(spec);
  if (input.size() != spec.input_len) {
    throw Error(ErrorCode::DimensionMismatch, "input length " + std::to_string(input.size()) +
                                                  " != " + std::to_string(spec.input_len));
  }
  if (mat.rows != spec.sketch_rows || mat.cols != spec.reshape_rows) {
    throw Error(ErrorCode::DimensionMismatch, "fc matrix must be sketch_rows x reshape_rows");
  }
  const std::size_t cols = spec.reshape_cols;
  std::vector<double> acc(spec.sketch_rows * cols, 0.0);
  for (std::size_t i = 0; i < spec.sketch_rows; ++i) {
    for (std::size_t k = 0; k < spec.reshape_rows; ++k) {
      const double a = mat.at(i, k);
      if (a == 0.0) continue;
      const float* row = input.data() + k * cols;
      double* out = acc.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) out[j] += a * static_cast<double>(row[j]);
    }
  }
  return {acc.begin(), acc.end()};
}

double fc_compression_ratio(const FcSketchSpec& spec) {
  if (spec.reshape_rows < 1) throw Error(ErrorCode::InvalidArgument, "reshape_rows must be >= 1");
  return static_cast<double>(spec.sketch_rows) / static_cast<double>(spec.reshape_rows);
}

}  // namespace locomp
