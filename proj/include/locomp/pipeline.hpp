#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locomp/augment.hpp"
#include "locomp/compressors.hpp"
#include "locomp/grid.hpp"
#include "locomp/lcio.hpp"

namespace locomp {

struct SourceItem {
  std::filesystem::path path;
  std::string id;  ///< path relative to the dataset root, '/'-separated
  std::string label;
};

struct Dataset {
  std::filesystem::path root;
  std::vector<SourceItem> items;
};

/// Recursively collects PNG/PGM/PPM files under root in lexicographic order.
/// Labels come from `labels_csv` (lines "relative/path,label"; an optional
/// "path,label" header is skipped) or default to the parent directory name.
Dataset scan_dataset(const std::filesystem::path& root,
                     const std::optional<std::filesystem::path>& labels_csv = std::nullopt);

AugmentParams augment_params(const CompressionSpec& spec);

/// Substream keys. Each image (and copy, or epoch) owns an independent
/// stream derived from the run seed, so per-image work can run in any order.
std::uint64_t default_stream_key(std::uint64_t seed, std::size_t source, std::size_t copy);
std::uint64_t inline_stream_key(std::uint64_t seed, std::size_t epoch, std::size_t source);
std::uint64_t sample_stream_key(std::uint64_t seed, std::size_t draw);

struct InlineSample {
  std::size_t epoch = 0;
  std::size_t source_index = 0;
  const SourceItem* source = nullptr;
  const CompressedImage* tensor = nullptr;
  AugmentRecord augment;
};

using InlineSink = std::function<void(const InlineSample&)>;

struct InlineReport {
  CompatReport compat;
  std::vector<lcio::SkippedSource> skipped;
  std::size_t emitted = 0;
};

/// Inline mode: resize every source once and persist it under
/// work_dir/resized, then for each epoch and image apply the full
/// augmentation, compress, and hand the tensor to `sink` in dataset order.
/// Unreadable sources are skipped and reported.
InlineReport run_inline(const Dataset& dataset, const CompressionSpec& spec, const ConvArch& arch,
                        std::size_t epochs, const std::filesystem::path& work_dir,
                        const InlineSink& sink);

/// LOCOMP_THREADS, else hardware concurrency; explicit value wins.
std::size_t resolve_threads(std::optional<std::size_t> requested);

inline constexpr const char* kManifestName = "manifest.json";

/// Default mode: `copies` independently augmented, compressed copies of each
/// source written as .lcim under out_dir/data, the sketch matrix (rmm/ms) as
/// out_dir/matrix.lcmx, and the manifest last, atomically. Throws
/// StrideIncompatible if `arch` is given and s % n != 0.
lcio::DatasetManifest prepare_default(const Dataset& dataset, const CompressionSpec& spec,
                                      const std::optional<ConvArch>& arch,
                                      const std::filesystem::path& out_dir,
                                      std::optional<std::size_t> threads = std::nullopt);

struct RuntimeSample {
  CompressedImage image;
  std::string label;
  std::size_t copy = 0;
  AugmentRecord augment;
};

/// Picks one stored copy of `source_index` uniformly, then applies the
/// limited augmentation. Only manifest-listed files are read; each is digest
/// checked. Throws MissingFile / DigestMismatch.
RuntimeSample sample_runtime(const lcio::DatasetManifest& manifest,
                             const std::filesystem::path& dir, std::size_t source_index,
                             const LimitedAugmentParams& params, Rng& rng);

}  // namespace locomp
