#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "locomp/compression_spec.hpp"
#include "locomp/image.hpp"

namespace locomp {

/// Square single-channel tile, row-major.
template <class T>
struct Block {
  std::size_t side = 0;
  std::vector<T> values;

  bool operator==(const Block&) const = default;
};

enum class SketchKind : std::uint8_t { Rmm = 0, Ms = 1 };

/// Sparse Gaussian matrix, stored dense row-major. Immutable once generated;
/// the persisted entries, not the seed, are the reproducibility contract.
struct SketchMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> entries;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  SketchKind kind = SketchKind::Rmm;

  float at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  bool operator==(const SketchMatrix&) const = default;
};

/// Quantiles sampled from each block; output cell k (row-major) receives
/// quantiles[k]. Ascending, so the block minimum lands top-left.
struct PercentileScheme {
  std::vector<double> quantiles;
};

/// n^2 >= 2mP + m: whether P principal components of an m x m block fit in
/// an n x n block.
bool pca_feasible(std::size_t m, std::size_t n, std::size_t components);

PercentileScheme make_percentile_scheme(std::size_t n);

/// Index into the ascending-sorted block of size `count` selected by quantile
/// q: nearest rank on q*(count-1), ties to even.
std::size_t quantile_rank(double q, std::size_t count);

template <class T>
Block<T> compress_block_percentile(std::span<const T> block, std::size_t m,
                                   const PercentileScheme& scheme);
template <class T>
Block<T> compress_block_percentile(const Block<T>& block, const PercentileScheme& scheme) {
  return compress_block_percentile<T>(block.values, block.side, scheme);
}

/// Each entry is 0 with probability 1-gamma, otherwise N(0, 1/(rows*cols)).
/// Deterministic in (rows, cols, gamma, seed).
SketchMatrix gen_sketch_matrix(std::size_t rows, std::size_t cols, double gamma,
                               std::uint64_t seed, SketchKind kind = SketchKind::Rmm);

/// n^2 x m^2 matrix for block-vector projection.
SketchMatrix make_rmm_matrix(std::size_t m, std::size_t n, double gamma, std::uint64_t seed);
/// n x m matrix for two-sided sketching.
SketchMatrix make_ms_matrix(std::size_t m, std::size_t n, double gamma, std::uint64_t seed);

/// reshape_nxn(mat * vec(block)), vec row-major.
template <class T>
Block<float> compress_block_rmm(std::span<const T> block, std::size_t m, const SketchMatrix& mat);
template <class T>
Block<float> compress_block_rmm(const Block<T>& block, const SketchMatrix& mat) {
  return compress_block_rmm<T>(block.values, block.side, mat);
}

/// mat * block * mat^T.
template <class T>
Block<float> compress_block_ms(std::span<const T> block, std::size_t m, const SketchMatrix& mat);
template <class T>
Block<float> compress_block_ms(const Block<T>& block, const SketchMatrix& mat) {
  return compress_block_ms<T>(block.values, block.side, mat);
}

/// Pixel-area-weighted resampling to a smaller (or equal) size. Keeps the
/// element type; u8 results are rounded half up.
Image downgrade_area(const Image& image, const ImageDims& target);

/// Area weights on shrinking axes, bilinear (half-pixel centers) on
/// enlarging ones. Shared by downgrade_area and augmentation resize.
Image resample(const Image& image, std::size_t height, std::size_t width);

/// Spatially ordered grid of n x n compressed blocks, planar like Image.
struct CompressedImage {
  Method method = Method::Percentile;
  std::size_t m = 0;
  std::size_t n = 0;
  SpecDigest spec_digest{};
  Image grid;  ///< dims (blocks_down*n, blocks_across*n, channels)

  std::size_t channels() const noexcept { return grid.channels(); }
  std::size_t blocks_down() const noexcept { return n ? grid.height() / n : 0; }
  std::size_t blocks_across() const noexcept { return n ? grid.width() / n : 0; }
  DType dtype() const noexcept { return grid.dtype(); }

  bool operator==(const CompressedImage&) const = default;
};

/// Matrix required by the spec's method (nullopt for percentile/downgrade).
std::optional<SketchMatrix> make_matrix_for(const CompressionSpec& spec);

/// Compresses every m x m block of every channel independently; block (i, j)
/// of channel k lands at compressed block (i, j) of channel k. `mat` must be
/// provided for rmm/ms and is shared by all blocks.
CompressedImage compress_image(const Image& image, const CompressionSpec& spec,
                               const SketchMatrix* mat = nullptr);

}  // namespace locomp
