// locomp command-line front end.
// Exit codes: 0 success, 1 validation, 2 I/O, 3 format.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "locomp/augment.hpp"
#include "locomp/digest.hpp"
#include "locomp/fileutil.hpp"
#include "locomp/grid.hpp"
#include "locomp/imageio.hpp"
#include "locomp/lcio.hpp"
#include "locomp/netops.hpp"
#include "locomp/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace locomp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;

int exit_code_for(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::Validation:
      return kExitValidation;
    case ErrorClass::Io:
      return kExitIo;
    case ErrorClass::Format:
      return kExitFormat;
  }
  return kExitValidation;
}

std::string hex_digest(const SpecDigest& d) { return to_hex(std::span<const std::uint8_t>(d)); }

std::string text_of(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

lcio::DatasetManifest load_manifest(const fs::path& path) {
  return lcio::read_manifest(text_of(read_file(path)));
}

json ratios_json(const CompressionRatios& r) {
  return {{"computational", r.computational}, {"storage", r.storage}};
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---- compress --------------------------------------------------------------

struct CompressArgs {
  fs::path in, out;
  std::string method = "percentile";
  std::size_t m = 7, n = 2, resize = 256, crop = 224, copies = 1;
  std::uint64_t seed = 0;
  double gamma = 1.0, flip_prob = 0.5;
  std::optional<std::size_t> r, s, threads;
  std::optional<fs::path> labels;
  bool json_out = false;
};

int cmd_compress(const CompressArgs& a) {
  CompressionSpec spec;
  const auto method = parse_method(a.method);
  if (!method) throw Error(ErrorCode::InvalidArgument, "unknown method '" + a.method + "'");
  spec.method = *method;
  spec.m = a.m;
  spec.n = a.n;
  spec.gamma = a.gamma;
  spec.seed = a.seed;
  spec.resize_to = a.resize;
  spec.crop_to = a.crop;
  spec.copies = a.copies;
  spec.mode = Mode::Default;
  spec.flip_prob = a.flip_prob;
  validate(spec);
  if (a.r.has_value() != a.s.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "--r and --s must be given together");
  }
  std::optional<ConvArch> arch;
  if (a.r) arch = ConvArch{*a.r, *a.s};

  const Dataset ds = scan_dataset(a.in, a.labels);
  const auto mf = prepare_default(ds, spec, arch, a.out, a.threads);

  std::uintmax_t payload = 0;
  for (const auto& e : mf.entries) payload += fs::file_size(a.out / e.path) - lcio::kLcimHeaderSize;
  const double source_elems =
      static_cast<double>(mf.source_count) * spec.crop_to * spec.crop_to * 3.0;
  const std::size_t elem = dtype_size(spec.method == Method::Rmm || spec.method == Method::Ms
                                          ? DType::F32
                                          : DType::U8);
  const auto ratios = compression_ratios(spec.m, spec.n, spec.copies);
  const double byte_sr = payload ? source_elems / static_cast<double>(payload) : 0.0;
  const double elem_sr = payload ? source_elems * elem / static_cast<double>(payload) : 0.0;

  if (a.json_out) {
    json j;
    j["manifest"] = (a.out / kManifestName).string();
    j["spec_digest"] = hex_digest(spec_digest(spec));
    j["sources"] = mf.source_count;
    j["entries"] = mf.entries.size();
    j["skipped"] = json::array();
    for (const auto& s : mf.skipped) j["skipped"].push_back({{"source", s.source}, {"error", s.error}});
    j["matrices"] = json::array();
    for (const auto& m : mf.matrices) j["matrices"].push_back(m.path);
    j["ratios"] = ratios_json(ratios);
    j["payload_bytes"] = payload;
    j["measured_storage_ratio"] = elem_sr;
    j["measured_byte_ratio"] = byte_sr;
    print_json(j);
  } else {
    std::printf("manifest      %s\n", (a.out / kManifestName).string().c_str());
    std::printf("spec          %s\n", canonical_text(spec).c_str());
    std::printf("sources       %zu (%zu skipped)\n", mf.source_count, mf.skipped.size());
    std::printf("entries       %zu\n", mf.entries.size());
    for (const auto& m : mf.matrices) std::printf("matrix        %s\n", m.path.c_str());
    std::printf("CR            %g\n", ratios.computational);
    std::printf("SR            %g\n", ratios.storage);
    std::printf("measured SR   %.4f (elements), %.4f (bytes)\n", elem_sr, byte_sr);
    for (const auto& s : mf.skipped) {
      std::fprintf(stderr, "skipped %s: %s\n", s.source.c_str(), s.error.c_str());
    }
  }
  return 0;
}

// ---- inspect ---------------------------------------------------------------

// Channels side by side, each min-max normalised to 0..255.
Image render_grid(const Image& grid) {
  const ImageDims d = grid.dims();
  std::vector<std::uint8_t> px(d.height * d.width * d.channels);
  const std::size_t out_w = d.width * d.channels;
  for (std::size_t c = 0; c < d.channels; ++c) {
    double lo = grid.at(c, 0, 0), hi = lo;
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        lo = std::min(lo, grid.at(c, y, x));
        hi = std::max(hi, grid.at(c, y, x));
      }
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        px[y * out_w + c * d.width + x] =
            static_cast<std::uint8_t>(std::lround((grid.at(c, y, x) - lo) * scale));
      }
    }
  }
  return Image::from_values(ImageDims{d.height, out_w, 1}, std::move(px));
}

int inspect_lcim(const fs::path& path, bool json_out, const std::optional<fs::path>& render) {
  const auto bytes = read_file(path);
  const auto c = lcio::read_lcim(bytes);
  const auto cr = static_cast<double>(c.m * c.m) / static_cast<double>(c.n * c.n);
  if (render) write_png(*render, render_grid(c.grid));
  if (json_out) {
    json j;
    j["file"] = path.string();
    j["kind"] = "lcim";
    j["method"] = std::string(to_string(c.method));
    j["dtype"] = c.dtype() == DType::U8 ? "u8" : "f32";
    j["m"] = c.m;
    j["n"] = c.n;
    j["channels"] = c.channels();
    j["blocks_down"] = c.blocks_down();
    j["blocks_across"] = c.blocks_across();
    j["dims"] = {c.grid.height(), c.grid.width(), c.channels()};
    j["spec_digest"] = hex_digest(c.spec_digest);
    j["payload_bytes"] = bytes.size() - lcio::kLcimHeaderSize;
    j["computational_ratio"] = cr;
    print_json(j);
  } else {
    std::printf("file          %s\n", path.string().c_str());
    std::printf("method        %s\n", std::string(to_string(c.method)).c_str());
    std::printf("dtype         %s\n", c.dtype() == DType::U8 ? "u8" : "f32");
    std::printf("m, n          %zu, %zu\n", c.m, c.n);
    std::printf("dims          %zux%zux%zu (HxWxC)\n", c.grid.height(), c.grid.width(),
                c.channels());
    std::printf("blocks        %zu x %zu\n", c.blocks_down(), c.blocks_across());
    std::printf("spec digest   %s\n", hex_digest(c.spec_digest).c_str());
    std::printf("payload       %zu bytes\n", bytes.size() - lcio::kLcimHeaderSize);
    std::printf("CR            %g\n", cr);
  }
  return 0;
}

int inspect_lcmx(const fs::path& path, bool json_out) {
  const auto mat = lcio::read_matrix(read_file(path));
  if (json_out) {
    print_json({{"file", path.string()},
                {"kind", "lcmx"},
                {"matrix_kind", mat.kind == SketchKind::Rmm ? "rmm" : "ms"},
                {"rows", mat.rows},
                {"cols", mat.cols},
                {"gamma", mat.gamma},
                {"seed", mat.seed}});
  } else {
    std::printf("file          %s\n", path.string().c_str());
    std::printf("kind          %s\n", mat.kind == SketchKind::Rmm ? "rmm" : "ms");
    std::printf("shape         %zu x %zu\n", mat.rows, mat.cols);
    std::printf("gamma         %.17g\n", mat.gamma);
    std::printf("seed          %llu\n", static_cast<unsigned long long>(mat.seed));
  }
  return 0;
}

int inspect_manifest(const fs::path& path, bool json_out, bool verify) {
  const auto mf = load_manifest(path);
  if (verify) lcio::verify_manifest(mf, path.parent_path());
  const auto ratios = compression_ratios(mf.spec.m, mf.spec.n, mf.spec.copies);
  if (json_out) {
    json j;
    j["file"] = path.string();
    j["kind"] = "manifest";
    j["spec"] = canonical_text(mf.spec);
    j["spec_digest"] = hex_digest(spec_digest(mf.spec));
    j["arch"] = mf.arch ? json{{"region", mf.arch->region}, {"stride", mf.arch->stride}} : json();
    j["sources"] = mf.source_count;
    j["copies"] = mf.spec.copies;
    j["entries"] = mf.entries.size();
    j["skipped"] = mf.skipped.size();
    j["matrices"] = json::array();
    for (const auto& m : mf.matrices) j["matrices"].push_back(m.path);
    j["ratios"] = ratios_json(ratios);
    j["verified"] = verify;
    print_json(j);
  } else {
    std::printf("file          %s\n", path.string().c_str());
    std::printf("spec          %s\n", canonical_text(mf.spec).c_str());
    std::printf("spec digest   %s\n", hex_digest(spec_digest(mf.spec)).c_str());
    if (mf.arch) std::printf("arch          r=%zu s=%zu\n", mf.arch->region, mf.arch->stride);
    std::printf("sources       %zu (%zu skipped)\n", mf.source_count, mf.skipped.size());
    std::printf("entries       %zu\n", mf.entries.size());
    for (const auto& m : mf.matrices) std::printf("matrix        %s\n", m.path.c_str());
    std::printf("CR            %g\n", ratios.computational);
    std::printf("SR            %g\n", ratios.storage);
    if (verify) std::printf("digests       ok\n");
  }
  return 0;
}

int cmd_inspect(const fs::path& path, bool json_out, const std::optional<fs::path>& render,
                bool verify) {
  const auto ext = path.extension().string();
  if (ext == ".lcim") return inspect_lcim(path, json_out, render);
  if (render) throw Error(ErrorCode::InvalidArgument, "--render needs an .lcim file");
  if (ext == ".lcmx") return inspect_lcmx(path, json_out);
  return inspect_manifest(path, json_out, verify);
}

// ---- check -----------------------------------------------------------------

int cmd_check(std::size_t r, std::size_t s, std::size_t n, std::size_t height, std::size_t width,
              bool json_out) {
  const ConvArch arch{r, s};
  validate(arch);
  const auto compat = check_stride_compat(arch, n);
  const auto sim = simulate_conv_consumption({height, width, 1}, arch, n);
  const RegionOffset* bad = compat.first_misaligned();
  if (json_out) {
    json j;
    j["region"] = r;
    j["stride"] = s;
    j["n"] = n;
    j["stride_ok"] = compat.stride_ok;
    j["region_ok"] = compat.region_ok;
    j["first_misaligned_offset"] = bad ? json(bad->offset) : json();
    j["dims"] = {height, width};
    j["positions"] = {sim.positions_down, sim.positions_across};
    j["regions_aligned"] = static_cast<std::size_t>(
        std::count_if(sim.regions.begin(), sim.regions.end(), [](auto& v) { return v.aligned; }));
    j["regions_total"] = sim.regions.size();
    j["result"] = compat.stride_ok ? "OK" : "FAIL";
    print_json(j);
  } else {
    std::printf("%s  r=%zu s=%zu n=%zu\n", compat.stride_ok ? "OK" : "FAIL", r, s, n);
    std::printf("stride        %s\n", compat.stride_ok ? "every region starts on a block boundary"
                                                       : "regions start inside blocks");
    if (bad) std::printf("first misaligned offset %zu\n", bad->offset);
    std::printf("region        %s\n", compat.region_ok ? "covers whole blocks"
                                                       : "r is not a multiple of n");
    std::printf("positions     %zu x %zu over %zux%zu\n", sim.positions_down, sim.positions_across,
                height, width);
  }
  return compat.stride_ok ? 0 : kExitValidation;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  fs::path manifest, out;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  double flip_prob = 0.5;
  std::optional<std::size_t> crop_blocks;
  bool raw = false;
  bool json_out = false;
};

int cmd_sample(const SampleArgs& a) {
  const auto mf = load_manifest(a.manifest);
  if (mf.source_count == 0) throw Error(ErrorCode::InvalidArgument, "manifest has no sources");
  const LimitedAugmentParams params{a.crop_blocks, a.flip_prob};
  if (!(params.flip_prob >= 0.0 && params.flip_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "--flip-prob must lie in [0, 1]");
  }
  const fs::path dir = a.manifest.parent_path();
  fs::create_directories(a.out);
  json index = json::array();
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::size_t src = i % mf.source_count;
    Rng rng(sample_stream_key(a.seed, i));
    const auto s = sample_runtime(mf, dir, src, params, rng);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%06zu%s", i, a.raw ? ".raw" : ".lcim");
    if (a.raw) {
      write_file_atomic(a.out / name, s.image.grid.bytes());
    } else {
      write_file_atomic(a.out / name, lcio::write_lcim(s.image));
    }
    index.push_back({{"file", name},
                     {"source_index", src},
                     {"label", s.label},
                     {"copy", s.copy},
                     {"dtype", s.image.dtype() == DType::U8 ? "u8" : "f32"},
                     {"shape", {s.image.channels(), s.image.grid.height(), s.image.grid.width()}},
                     {"crop_top", s.augment.top},
                     {"crop_left", s.augment.left},
                     {"flipped", s.augment.flipped}});
  }
  write_file_atomic(a.out / "index.json", index.dump(2) + "\n");
  if (a.json_out) {
    print_json({{"out", a.out.string()}, {"samples", a.count}});
  } else {
    std::printf("wrote %zu samples to %s\n", a.count, a.out.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locomp: localized compression of image datasets"};
  app.require_subcommand(1);

  CompressArgs ca;
  auto* compress = app.add_subcommand("compress", "Prepare a compressed dataset (default mode)");
  compress->add_option("--in", ca.in, "Source image directory")->required();
  compress->add_option("--out", ca.out, "Output directory")->required();
  compress->add_option("--method", ca.method, "percentile | rmm | ms | downgrade");
  compress->add_option("--m", ca.m, "Source block side");
  compress->add_option("--n", ca.n, "Compressed block side");
  compress->add_option("--resize", ca.resize, "Resize side");
  compress->add_option("--crop", ca.crop, "Crop side");
  compress->add_option("--copies", ca.copies, "Augmented copies per source");
  compress->add_option("--seed", ca.seed, "Run seed");
  compress->add_option("--gamma", ca.gamma, "Sketch density");
  compress->add_option("--flip-prob", ca.flip_prob, "Horizontal flip probability");
  compress->add_option("--r", ca.r, "First conv layer region side");
  compress->add_option("--s", ca.s, "First conv layer stride");
  compress->add_option("--labels", ca.labels, "CSV of path,label");
  compress->add_option("--threads", ca.threads, "Worker threads (default LOCOMP_THREADS or cores)");
  compress->add_flag("--json", ca.json_out, "Machine-readable output");

  fs::path inspect_path;
  std::optional<fs::path> render;
  bool inspect_json = false, verify = false;
  auto* inspect = app.add_subcommand("inspect", "Describe an .lcim, .lcmx or manifest");
  inspect->add_option("path", inspect_path, "File to inspect")->required();
  inspect->add_option("--render", render, "Write the compressed grid as a grayscale PNG");
  inspect->add_flag("--verify", verify, "Recheck every file digest listed in a manifest");
  inspect->add_flag("--json", inspect_json, "Machine-readable output");

  std::size_t r = 0, s = 0, n = 0, height = 64, width = 64;
  bool check_json = false;
  auto* check = app.add_subcommand("check", "Check stride compatibility of a first conv layer");
  check->add_option("--r", r, "Region side")->required();
  check->add_option("--s", s, "Stride")->required();
  check->add_option("--n", n, "Compressed block side")->required();
  check->add_option("--height", height, "Input height for the consumption walk");
  check->add_option("--width", width, "Input width for the consumption walk");
  check->add_flag("--json", check_json, "Machine-readable output");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw runtime samples from a prepared dataset");
  sample->add_option("--manifest", sa.manifest, "manifest.json")->required();
  sample->add_option("--out", sa.out, "Output directory")->required();
  sample->add_option("--count", sa.count, "Number of samples");
  sample->add_option("--seed", sa.seed, "Sampling seed");
  sample->add_option("--flip-prob", sa.flip_prob, "Block-column flip probability");
  sample->add_option("--crop-blocks", sa.crop_blocks, "Square block-aligned crop, in blocks");
  sample->add_flag("--raw", sa.raw, "Write raw CHW tensors instead of .lcim");
  sample->add_flag("--json", sa.json_out, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*compress) return cmd_compress(ca);
    if (*inspect) return cmd_inspect(inspect_path, inspect_json, render, verify);
    if (*check) return cmd_check(r, s, n, height, width, check_json);
    if (*sample) return cmd_sample(sa);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: Io: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return 0;
}
