#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locomp/augment.hpp"
#include "locomp/compressors.hpp"
#include "locomp/grid.hpp"

namespace locomp::lcio {

// Layouts are documented byte-for-byte in docs/formats.md.
inline constexpr std::uint16_t kLcimVersion = 1;
inline constexpr std::uint16_t kLcmxVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr std::size_t kLcimHeaderSize = 48;
inline constexpr std::size_t kLcmxHeaderSize = 48;

/// Payload bytes: channel-major, then block-row-major, then row-major
/// within each n x n block.
std::vector<std::uint8_t> payload_bytes(const CompressedImage& cimg);

std::vector<std::uint8_t> write_lcim(const CompressedImage& cimg);

/// Throws BadMagic, VersionUnsupported, SchemaViolation (bad header field),
/// LengthMismatch, DigestMismatch (payload, or spec digest when expected is
/// given).
CompressedImage read_lcim(std::span<const std::uint8_t> bytes,
                          const std::optional<SpecDigest>& expected_spec = std::nullopt);

std::vector<std::uint8_t> write_matrix(const SketchMatrix& mat);
SketchMatrix read_matrix(std::span<const std::uint8_t> bytes);

struct MatrixRef {
  SketchKind kind = SketchKind::Rmm;
  std::string path;    ///< relative to the manifest directory
  std::string sha256;  ///< hex digest of the whole file
};

struct ManifestEntry {
  std::string source;
  std::string label;
  std::size_t source_index = 0;
  std::size_t copy = 0;
  std::string path;  ///< relative to the manifest directory
  std::string sha256;
  AugmentRecord augment;
};

struct SkippedSource {
  std::string source;
  std::string error;
};

struct DatasetManifest {
  int version = kManifestVersion;
  CompressionSpec spec;
  std::optional<ConvArch> arch;
  std::vector<MatrixRef> matrices;
  std::size_t source_count = 0;
  std::vector<ManifestEntry> entries;
  std::vector<SkippedSource> skipped;

  /// Entries of source i, ordered by copy index.
  std::vector<const ManifestEntry*> copies_of(std::size_t source_index) const;
};

std::string write_manifest(const DatasetManifest& manifest);

/// Throws SchemaViolation on any missing or ill-typed field, or when
/// entries != source_count * copies, or when an rmm/ms spec lacks a matrix
/// digest.
DatasetManifest read_manifest(std::string_view text);

/// Recomputes every referenced file digest. Throws MissingFile or
/// DigestMismatch.
void verify_manifest(const DatasetManifest& manifest, const std::filesystem::path& dir);

/// Loads and checks the manifest's sketch matrix, if the method needs one.
std::optional<SketchMatrix> load_matrix(const DatasetManifest& manifest,
                                        const std::filesystem::path& dir);

}  // namespace locomp::lcio
