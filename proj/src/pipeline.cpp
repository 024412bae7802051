#include "locomp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "locomp/digest.hpp"
#include "locomp/fileutil.hpp"
#include "locomp/imageio.hpp"

namespace fs = std::filesystem;

namespace locomp {

namespace {

constexpr std::uint64_t kDefaultTag = 0x44454641554c54ULL;  // "DEFAULT"
constexpr std::uint64_t kInlineTag = 0x494e4c494e45ULL;     // "INLINE"
constexpr std::uint64_t kSampleTag = 0x53414d504c45ULL;     // "SAMPLE"

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

std::map<std::string, std::string> read_labels(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::MissingFile, "labels file " + csv.string());
  std::map<std::string, std::string> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::SchemaViolation,
                  csv.string() + ":" + std::to_string(lineno) + ": expected 'path,label'");
    }
    std::string path = trim(line.substr(0, comma));
    std::string label = trim(line.substr(comma + 1));
    if (lineno == 1 && path == "path" && label == "label") continue;
    labels[path] = label;
  }
  return labels;
}

bool is_io_failure(const Error& e) {
  return classify(e.code()) == ErrorClass::Io || e.code() == ErrorCode::UnsupportedImage;
}

std::string numbered(std::size_t index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%06zu%s", index, suffix);
  return buf;
}

/// Runs body(i) for i in [0, count) on `threads` workers; rethrows the first
/// exception after all workers finish.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Dataset scan_dataset(const fs::path& root, const std::optional<fs::path>& labels_csv) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::MissingFile, "dataset directory " + root.string());
  Dataset ds{root, {}};
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || !is_supported_image(entry.path())) continue;
    SourceItem item;
    item.path = entry.path();
    item.id = fs::relative(entry.path(), root).generic_string();
    const fs::path parent = fs::relative(entry.path(), root).parent_path();
    item.label = parent.empty() ? "" : parent.filename().string();
    ds.items.push_back(std::move(item));
  }
  std::sort(ds.items.begin(), ds.items.end(),
            [](const SourceItem& a, const SourceItem& b) { return a.id < b.id; });
  if (labels_csv) {
    const auto labels = read_labels(*labels_csv);
    for (auto& item : ds.items) {
      if (auto it = labels.find(item.id); it != labels.end()) item.label = it->second;
    }
  }
  return ds;
}

AugmentParams augment_params(const CompressionSpec& spec) {
  return {spec.resize_to, spec.crop_to, spec.flip_prob};
}

std::uint64_t default_stream_key(std::uint64_t seed, std::size_t source, std::size_t copy) {
  return derive_key(seed, kDefaultTag, source, copy);
}

std::uint64_t inline_stream_key(std::uint64_t seed, std::size_t epoch, std::size_t source) {
  return derive_key(seed, kInlineTag, epoch, source);
}

std::uint64_t sample_stream_key(std::uint64_t seed, std::size_t draw) {
  return derive_key(seed, kSampleTag, draw);
}

InlineReport run_inline(const Dataset& dataset, const CompressionSpec& spec, const ConvArch& arch,
                        std::size_t epochs, const fs::path& work_dir, const InlineSink& sink) {
  validate(spec);
  validate(arch);
  if (spec.mode != Mode::Inline) throw Error(ErrorCode::InvalidArgument, "spec mode is not inline");
  InlineReport report;
  report.compat = check_stride_compat(arch, spec.n);
  const auto matrix = make_matrix_for(spec);
  const AugmentParams params = augment_params(spec);

  // Resize once and persist.
  const fs::path resized_dir = work_dir / "resized";
  fs::create_directories(resized_dir);
  std::vector<std::optional<fs::path>> resized(dataset.items.size());
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    try {
      const Image img = resize(load_image(dataset.items[i].path), spec.resize_to);
      const fs::path out = resized_dir / numbered(i, img.channels() == 1 ? ".pgm" : ".ppm");
      write_pnm(out, img);
      resized[i] = out;
    } catch (const Error& e) {
      if (!is_io_failure(e)) throw;
      report.skipped.push_back({dataset.items[i].id, e.what()});
    }
  }

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = 0; i < dataset.items.size(); ++i) {
      if (!resized[i]) continue;
      Rng rng(inline_stream_key(spec.seed, epoch, i));
      AugmentRecord rec;
      const Image augmented = augment_full(load_image(*resized[i]), params, rng, &rec);
      const CompressedImage tensor =
          compress_image(augmented, spec, matrix ? &*matrix : nullptr);
      sink(InlineSample{epoch, i, &dataset.items[i], &tensor, rec});
      ++report.emitted;
    }
  }
  return report;
}

std::size_t resolve_threads(std::optional<std::size_t> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("LOCOMP_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

lcio::DatasetManifest prepare_default(const Dataset& dataset, const CompressionSpec& spec,
                                      const std::optional<ConvArch>& arch, const fs::path& out_dir,
                                      std::optional<std::size_t> threads) {
  validate(spec);
  if (spec.mode != Mode::Default) throw Error(ErrorCode::InvalidArgument, "spec mode is not default");
  if (arch) {
    validate(*arch);
    const CompatReport compat = check_stride_compat(*arch, spec.n);
    if (!compat.stride_ok) {
      throw Error(ErrorCode::StrideIncompatible,
                  "stride s=" + std::to_string(arch->stride) + " is not a multiple of n=" +
                      std::to_string(spec.n) + " (region offset " +
                      std::to_string(compat.first_misaligned()->offset) + ")");
    }
  }

  const fs::path manifest_path = out_dir / kManifestName;
  fs::create_directories(out_dir / "data");
  std::error_code ec;
  fs::remove(manifest_path, ec);

  lcio::DatasetManifest mf;
  mf.spec = spec;
  mf.arch = arch;
  const auto matrix = make_matrix_for(spec);
  if (matrix) {
    const auto bytes = lcio::write_matrix(*matrix);
    const std::string rel = "matrix.lcmx";
    write_file_atomic(out_dir / rel, bytes);
    mf.matrices.push_back({matrix->kind, rel, to_hex(sha256(bytes))});
  }

  struct SourceResult {
    std::vector<lcio::ManifestEntry> copies;
    std::optional<std::string> error;
  };
  std::vector<SourceResult> results(dataset.items.size());
  const AugmentParams params = augment_params(spec);

  parallel_for(dataset.items.size(), resolve_threads(threads), [&](std::size_t i) {
    const SourceItem& item = dataset.items[i];
    SourceResult& res = results[i];
    Image source;
    try {
      source = load_image(item.path);
    } catch (const Error& e) {
      if (!is_io_failure(e)) throw;
      res.error = e.what();
      return;
    }
    const Image resized = resize(source, params.resize_to);
    for (std::size_t copy = 0; copy < spec.copies; ++copy) {
      Rng rng(default_stream_key(spec.seed, i, copy));
      lcio::ManifestEntry entry;
      entry.source = item.id;
      entry.label = item.label;
      entry.copy = copy;
      const Image augmented = augment_resized(resized, params, rng, &entry.augment);
      const CompressedImage cimg = compress_image(augmented, spec, matrix ? &*matrix : nullptr);
      const auto bytes = lcio::write_lcim(cimg);
      entry.path = "data/" + numbered(i, ("_" + std::to_string(copy) + ".lcim").c_str());
      write_file_atomic(out_dir / entry.path, bytes);
      entry.sha256 = to_hex(sha256(bytes));
      res.copies.push_back(std::move(entry));
    }
  });

  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& res = results[i];
    if (res.error) {
      mf.skipped.push_back({dataset.items[i].id, *res.error});
      continue;
    }
    for (auto& e : res.copies) {
      e.source_index = mf.source_count;
      mf.entries.push_back(std::move(e));
    }
    ++mf.source_count;
  }
  write_file_atomic(manifest_path, lcio::write_manifest(mf));
  return mf;
}

RuntimeSample sample_runtime(const lcio::DatasetManifest& manifest, const fs::path& dir,
                             std::size_t source_index, const LimitedAugmentParams& params,
                             Rng& rng) {
  const auto copies = manifest.copies_of(source_index);
  if (copies.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no manifest entries for source " +
                                                std::to_string(source_index));
  }
  const std::size_t pick = rng.uniform_index(copies.size());
  const lcio::ManifestEntry& entry = *copies[pick];
  const auto bytes = read_file(dir / entry.path);
  if (to_hex(sha256(bytes)) != entry.sha256) {
    throw Error(ErrorCode::DigestMismatch, "digest mismatch for " + entry.path);
  }
  const CompressedImage stored = lcio::read_lcim(bytes, spec_digest(manifest.spec));
  RuntimeSample out;
  out.label = entry.label;
  out.copy = entry.copy;
  out.image = augment_limited(stored, params, rng, &out.augment);
  return out;
}

}  // namespace locomp
