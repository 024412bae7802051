#include "locomp/compressors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "locomp/grid.hpp"
#include "locomp/random.hpp"

namespace locomp {

bool pca_feasible(std::size_t m, std::size_t n, std::size_t components) {
  if (m < 1 || n < 1 || components < 1) {
    throw Error(ErrorCode::InvalidArgument, "pca_feasible needs m, n, P >= 1");
  }
  return n * n >= 2 * m * components + m;
}

PercentileScheme make_percentile_scheme(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const std::size_t cells = n * n;
  if (cells == 1) return {{0.5}};
  PercentileScheme s;
  s.quantiles.reserve(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    s.quantiles.push_back(static_cast<double>(k) / static_cast<double>(cells - 1));
  }
  s.quantiles.back() = 1.0;
  return s;
}

std::size_t quantile_rank(double q, std::size_t count) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "empty block");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile outside [0, 1]");
  double pos = q * static_cast<double>(count - 1);
  // k/(n^2-1) * (m^2-1) is not exact in binary; snap near-halves before
  // rounding so exact ties really go to even.
  const double half = std::round(pos * 2.0) / 2.0;
  if (std::abs(pos - half) < 1e-9) pos = half;
  const double fl = std::floor(pos);
  const double frac = pos - fl;
  auto idx = static_cast<std::size_t>(fl);
  if (frac > 0.5 || (frac == 0.5 && idx % 2 == 1)) ++idx;
  return std::min(idx, count - 1);
}

template <class T>
Block<T> compress_block_percentile(std::span<const T> block, std::size_t m,
                                   const PercentileScheme& scheme) {
  if (m < 1 || block.size() != m * m) {
    throw Error(ErrorCode::DimensionMismatch, "block is not m x m");
  }
  const std::size_t cells = scheme.quantiles.size();
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cells))));
  if (n * n != cells || n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "percentile scheme size is not a perfect square");
  }
  if (n > m) throw Error(ErrorCode::InvalidBlockSizes, "scheme side exceeds block side");
  std::vector<T> sorted(block.begin(), block.end());
  std::sort(sorted.begin(), sorted.end());
  Block<T> out{n, std::vector<T>(cells)};
  for (std::size_t k = 0; k < cells; ++k) {
    out.values[k] = sorted[quantile_rank(scheme.quantiles[k], sorted.size())];
  }
  return out;
}

template Block<std::uint8_t> compress_block_percentile(std::span<const std::uint8_t>, std::size_t,
                                                       const PercentileScheme&);
template Block<float> compress_block_percentile(std::span<const float>, std::size_t,
                                                const PercentileScheme&);

SketchMatrix gen_sketch_matrix(std::size_t rows, std::size_t cols, double gamma,
                               std::uint64_t seed, SketchKind kind) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "matrix dims must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 1]");
  }
  SketchMatrix mat{rows, cols, std::vector<float>(rows * cols, 0.0f), gamma, seed, kind};
  const double stddev = std::sqrt(1.0 / static_cast<double>(rows * cols));
  // Entry k consumes counters 3k (keep), 3k+1 and 3k+2 (Box-Muller).
  for (std::size_t k = 0; k < mat.entries.size(); ++k) {
    const std::uint64_t base = 3 * static_cast<std::uint64_t>(k);
    const bool keep = to_unit(counter_hash(seed, base)) < gamma;
    if (!keep) continue;
    const double u1 = 1.0 - to_unit(counter_hash(seed, base + 1));  // (0, 1]
    const double u2 = to_unit(counter_hash(seed, base + 2));
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    mat.entries[k] = static_cast<float>(z * stddev);
  }
  return mat;
}

SketchMatrix make_rmm_matrix(std::size_t m, std::size_t n, double gamma, std::uint64_t seed) {
  return gen_sketch_matrix(n * n, m * m, gamma, seed, SketchKind::Rmm);
}

SketchMatrix make_ms_matrix(std::size_t m, std::size_t n, double gamma, std::uint64_t seed) {
  return gen_sketch_matrix(n, m, gamma, seed, SketchKind::Ms);
}

template <class T>
Block<float> compress_block_rmm(std::span<const T> block, std::size_t m, const SketchMatrix& mat) {
  if (block.size() != m * m || mat.cols != m * m) {
    throw Error(ErrorCode::DimensionMismatch, "rmm matrix needs m^2 columns for an m x m block");
  }
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(mat.rows))));
  if (n * n != mat.rows) {
    throw Error(ErrorCode::DimensionMismatch, "rmm matrix row count is not a perfect square");
  }
  Block<float> out{n, std::vector<float>(mat.rows)};
  for (std::size_t i = 0; i < mat.rows; ++i) {
    const float* row = mat.entries.data() + i * mat.cols;
    double acc = 0.0;
    for (std::size_t k = 0; k < mat.cols; ++k) {
      acc += static_cast<double>(row[k]) * static_cast<double>(block[k]);
    }
    out.values[i] = static_cast<float>(acc);
  }
  return out;
}

template Block<float> compress_block_rmm(std::span<const std::uint8_t>, std::size_t,
                                         const SketchMatrix&);
template Block<float> compress_block_rmm(std::span<const float>, std::size_t, const SketchMatrix&);

template <class T>
Block<float> compress_block_ms(std::span<const T> block, std::size_t m, const SketchMatrix& mat) {
  if (block.size() != m * m || mat.cols != m) {
    throw Error(ErrorCode::DimensionMismatch, "ms matrix needs m columns for an m x m block");
  }
  const std::size_t n = mat.rows;
  // left = mat * block, n x m
  std::vector<double> left(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double a = mat.entries[i * m + k];
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        left[i * m + j] += a * static_cast<double>(block[k * m + j]);
      }
    }
  }
  Block<float> out{n, std::vector<float>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        acc += left[i * m + k] * static_cast<double>(mat.entries[j * m + k]);
      }
      out.values[i * n + j] = static_cast<float>(acc);
    }
  }
  return out;
}

template Block<float> compress_block_ms(std::span<const std::uint8_t>, std::size_t,
                                        const SketchMatrix&);
template Block<float> compress_block_ms(std::span<const float>, std::size_t, const SketchMatrix&);

namespace {

/// Source taps for one output index: integer-valued numerators over a
/// shared per-axis denominator, so constant inputs stay exact.
struct Tap {
  std::size_t src;
  double weight;
};

struct AxisTaps {
  std::vector<std::vector<Tap>> taps;
  double denom = 1.0;
};

AxisTaps area_taps(std::size_t src_len, std::size_t dst_len) {
  const std::size_t g = std::gcd(src_len, dst_len);
  const std::size_t p = src_len / g;  // source units per output pixel, scaled by q
  const std::size_t q = dst_len / g;
  AxisTaps axis;
  axis.denom = static_cast<double>(p);
  axis.taps.resize(dst_len);
  for (std::size_t y = 0; y < dst_len; ++y) {
    const std::size_t lo = y * p;
    const std::size_t hi = (y + 1) * p;
    for (std::size_t i = lo / q; i * q < hi; ++i) {
      const std::size_t overlap = std::min(hi, (i + 1) * q) - std::max(lo, i * q);
      if (overlap > 0) axis.taps[y].push_back({i, static_cast<double>(overlap)});
    }
  }
  return axis;
}

AxisTaps linear_taps(std::size_t src_len, std::size_t dst_len) {
  AxisTaps axis;
  axis.taps.resize(dst_len);
  const double scale = static_cast<double>(src_len) / static_cast<double>(dst_len);
  const auto last = static_cast<std::ptrdiff_t>(src_len) - 1;
  for (std::size_t y = 0; y < dst_len; ++y) {
    const double fy = (static_cast<double>(y) + 0.5) * scale - 0.5;
    const double fl = std::floor(fy);
    const double w = fy - fl;
    const auto i0 = static_cast<std::ptrdiff_t>(fl);
    const auto a = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i0, 0, last));
    const auto b = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i0 + 1, 0, last));
    if (w == 0.0 || a == b) {
      axis.taps[y].push_back({a, 1.0});
    } else {
      axis.taps[y].push_back({a, 1.0 - w});
      axis.taps[y].push_back({b, w});
    }
  }
  return axis;
}

AxisTaps axis_taps(std::size_t src_len, std::size_t dst_len) {
  return dst_len <= src_len ? area_taps(src_len, dst_len) : linear_taps(src_len, dst_len);
}

Image apply_taps(const Image& image, const AxisTaps& rows, const AxisTaps& cols) {
  const ImageDims& d = image.dims();
  const ImageDims od{rows.taps.size(), cols.taps.size(), d.channels};
  Image out(od, image.dtype());
  const double denom = rows.denom * cols.denom;
  image.visit([&](auto src) {
    using T = std::remove_const_t<typename decltype(src)::value_type>;
    auto dst = out.values<T>();
    for (std::size_t c = 0; c < d.channels; ++c) {
      const T* plane = src.data() + c * d.plane_size();
      for (std::size_t y = 0; y < od.height; ++y) {
        for (std::size_t x = 0; x < od.width; ++x) {
          double acc = 0.0;
          for (const Tap& r : rows.taps[y]) {
            const T* row = plane + r.src * d.width;
            double racc = 0.0;
            for (const Tap& t : cols.taps[x]) racc += t.weight * static_cast<double>(row[t.src]);
            acc += r.weight * racc;
          }
          const double v = acc / denom;
          T& o = dst[(c * od.height + y) * od.width + x];
          if constexpr (std::is_same_v<T, std::uint8_t>) {
            o = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
          } else {
            o = static_cast<float>(v);
          }
        }
      }
    }
  });
  return out;
}

}  // namespace

Image resample(const Image& image, std::size_t height, std::size_t width) {
  if (height < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "target size must be >= 1");
  if (height == image.height() && width == image.width()) return image;
  return apply_taps(image, axis_taps(image.height(), height), axis_taps(image.width(), width));
}

Image downgrade_area(const Image& image, const ImageDims& target) {
  if (target.height > image.height() || target.width > image.width()) {
    throw Error(ErrorCode::UpscaleNotSupported, "downgrade target exceeds source size");
  }
  if (target.height < 1 || target.width < 1) {
    throw Error(ErrorCode::InvalidArgument, "target size must be >= 1");
  }
  if (target.height == image.height() && target.width == image.width()) return image;
  return apply_taps(image, area_taps(image.height(), target.height),
                    area_taps(image.width(), target.width));
}

std::optional<SketchMatrix> make_matrix_for(const CompressionSpec& spec) {
  switch (spec.method) {
    case Method::Rmm: return make_rmm_matrix(spec.m, spec.n, spec.gamma, spec.seed);
    case Method::Ms: return make_ms_matrix(spec.m, spec.n, spec.gamma, spec.seed);
    default: return std::nullopt;
  }
}

namespace {

template <class T, class Kernel>
Image compress_blocks(std::span<const T> src, const ImageDims& d, std::size_t m, std::size_t n,
                      DType out_type, Kernel&& kernel) {
  const TilingPlan plan = plan_tiling(d, m);
  const ImageDims od{plan.blocks_down * n, plan.blocks_across * n, d.channels};
  Image out(od, out_type);
  std::vector<T> scratch(m * m);
  out.visit([&](auto dst) {
    using U = typename decltype(dst)::value_type;
    for (std::size_t c = 0; c < d.channels; ++c) {
      const T* plane = src.data() + c * d.plane_size();
      for (std::size_t bi = 0; bi < plan.blocks_down; ++bi) {
        for (std::size_t bj = 0; bj < plan.blocks_across; ++bj) {
          for (std::size_t y = 0; y < m; ++y) {
            const T* row = plane + (bi * m + y) * d.width + bj * m;
            std::copy(row, row + m, scratch.data() + y * m);
          }
          const auto blk = kernel(std::span<const T>(scratch));
          if (blk.side != n) throw Error(ErrorCode::DimensionMismatch, "kernel output is not n x n");
          for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
              dst[(c * od.height + bi * n + y) * od.width + bj * n + x] =
                  static_cast<U>(blk.values[y * n + x]);
            }
          }
        }
      }
    }
  });
  return out;
}

}  // namespace

CompressedImage compress_image(const Image& image, const CompressionSpec& spec,
                               const SketchMatrix* mat) {
  const ImageDims target = compressed_dims(image.dims(), spec.m, spec.n);
  const std::size_t m = spec.m;
  const std::size_t n = spec.n;
  CompressedImage out;
  out.method = spec.method;
  out.m = m;
  out.n = n;
  out.spec_digest = spec_digest(spec);

  if ((spec.method == Method::Rmm || spec.method == Method::Ms) && mat == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "rmm/ms compression needs a sketch matrix");
  }
  if (spec.method == Method::Rmm && (mat->rows != n * n || mat->cols != m * m)) {
    throw Error(ErrorCode::DimensionMismatch, "rmm matrix must be n^2 x m^2");
  }
  if (spec.method == Method::Ms && (mat->rows != n || mat->cols != m)) {
    throw Error(ErrorCode::DimensionMismatch, "ms matrix must be n x m");
  }

  switch (spec.method) {
    case Method::Percentile: {
      // Same ranks as compress_block_percentile, computed once per image.
      const PercentileScheme scheme = make_percentile_scheme(n);
      std::vector<std::size_t> ranks(scheme.quantiles.size());
      for (std::size_t k = 0; k < ranks.size(); ++k) {
        ranks[k] = quantile_rank(scheme.quantiles[k], m * m);
      }
      out.grid = image.visit([&](auto src) {
        using T = std::remove_const_t<typename decltype(src)::value_type>;
        std::vector<T> sorted(m * m);
        std::array<std::uint32_t, 256> hist{};
        return compress_blocks<T>(src, image.dims(), m, n, image.dtype(), [&](std::span<const T> b) {
          Block<T> blk{n, std::vector<T>(ranks.size())};
          if constexpr (std::is_same_v<T, std::uint8_t>) {
            // Counting selection; ranks are ascending.
            for (T v : b) ++hist[v];
            std::size_t seen = 0, k = 0;
            for (std::size_t v = 0; v < 256 && k < ranks.size(); ++v) {
              seen += hist[v];
              while (k < ranks.size() && ranks[k] < seen) blk.values[k++] = static_cast<T>(v);
            }
            for (T v : b) hist[v] = 0;
          } else {
            std::copy(b.begin(), b.end(), sorted.begin());
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t k = 0; k < ranks.size(); ++k) blk.values[k] = sorted[ranks[k]];
          }
          return blk;
        });
      });
      break;
    }
    case Method::Rmm:
      out.grid = image.visit([&](auto src) {
        using T = std::remove_const_t<typename decltype(src)::value_type>;
        return compress_blocks<T>(src, image.dims(), m, n, DType::F32,
                                  [&](std::span<const T> b) { return compress_block_rmm<T>(b, m, *mat); });
      });
      break;
    case Method::Ms:
      out.grid = image.visit([&](auto src) {
        using T = std::remove_const_t<typename decltype(src)::value_type>;
        return compress_blocks<T>(src, image.dims(), m, n, DType::F32,
                                  [&](std::span<const T> b) { return compress_block_ms<T>(b, m, *mat); });
      });
      break;
    case Method::Downgrade:
      // m source pixels map onto exactly n output pixels, so whole-image area
      // resampling never mixes pixels across block boundaries.
      out.grid = downgrade_area(image, target);
      break;
  }
  return out;
}

}  // namespace locomp
