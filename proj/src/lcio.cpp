#include "locomp/lcio.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <nlohmann/json.hpp>

#include "locomp/digest.hpp"
#include "locomp/fileutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace locomp::lcio {

namespace {

constexpr std::uint8_t kLcimMagic[4] = {'L', 'C', 'I', 'M'};
constexpr std::uint8_t kLcmxMagic[4] = {'L', 'C', 'M', 'X'};

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  template <class T>
  void le(T v) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void zeros(std::size_t k) { buf_.insert(buf_.end(), k, 0); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }
  std::span<const std::uint8_t> view() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

template <class T>
T get_le(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return static_cast<T>(v);
}

// First 8 bytes of SHA-256 over the header fields that precede the digest,
// followed by the payload.
std::array<std::uint8_t, 8> content_digest(std::span<const std::uint8_t> head,
                                           std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> all(head.begin(), head.end());
  all.insert(all.end(), payload.begin(), payload.end());
  const auto full = sha256(all);
  std::array<std::uint8_t, 8> d{};
  std::copy_n(full.begin(), 8, d.begin());
  return d;
}

bool all_zero(std::span<const std::uint8_t> b) {
  return std::all_of(b.begin(), b.end(), [](std::uint8_t x) { return x == 0; });
}

void check_magic(std::span<const std::uint8_t> bytes, const std::uint8_t (&magic)[4],
                 std::size_t header_size, const char* what) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, std::string("not a ") + what + " file");
  }
  if (bytes.size() < header_size) {
    throw Error(ErrorCode::LengthMismatch, std::string(what) + " header truncated");
  }
}

}  // namespace

std::vector<std::uint8_t> payload_bytes(const CompressedImage& cimg) {
  const ImageDims& d = cimg.grid.dims();
  const std::size_t n = cimg.n;
  if (n == 0 || d.height % n != 0 || d.width % n != 0) {
    throw Error(ErrorCode::DimensionMismatch, "compressed grid is not tiled by n");
  }
  Writer w(d.size() * dtype_size(cimg.dtype()));
  cimg.grid.visit([&](auto v) {
    for (std::size_t c = 0; c < d.channels; ++c) {
      for (std::size_t bi = 0; bi < d.height / n; ++bi) {
        for (std::size_t bj = 0; bj < d.width / n; ++bj) {
          for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
              const auto val = v[(c * d.height + bi * n + y) * d.width + bj * n + x];
              if constexpr (std::is_same_v<std::remove_const_t<decltype(val)>, float>) {
                w.f32(val);
              } else {
                w.le(val);
              }
            }
          }
        }
      }
    }
  });
  return w.take();
}

std::vector<std::uint8_t> write_lcim(const CompressedImage& cimg) {
  const auto payload = payload_bytes(cimg);
  Writer w(kLcimHeaderSize + payload.size());
  w.bytes(kLcimMagic);
  w.le(kLcimVersion);
  w.le(static_cast<std::uint8_t>(cimg.method));
  w.le(static_cast<std::uint8_t>(cimg.dtype()));
  w.le(static_cast<std::uint32_t>(cimg.m));
  w.le(static_cast<std::uint32_t>(cimg.n));
  w.le(static_cast<std::uint32_t>(cimg.channels()));
  w.le(static_cast<std::uint32_t>(cimg.blocks_down()));
  w.le(static_cast<std::uint32_t>(cimg.blocks_across()));
  w.bytes(cimg.spec_digest);
  w.bytes(content_digest(w.view(), payload));
  w.zeros(4);
  w.bytes(payload);
  return w.take();
}

CompressedImage read_lcim(std::span<const std::uint8_t> bytes,
                          const std::optional<SpecDigest>& expected_spec) {
  check_magic(bytes, kLcimMagic, kLcimHeaderSize, "lcim");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kLcimVersion) {
    throw Error(ErrorCode::VersionUnsupported, "lcim version " + std::to_string(version));
  }
  const auto method = bytes[6];
  const auto dtype = bytes[7];
  const std::size_t m = get_le<std::uint32_t>(bytes, 8);
  const std::size_t n = get_le<std::uint32_t>(bytes, 12);
  const std::size_t channels = get_le<std::uint32_t>(bytes, 16);
  const std::size_t down = get_le<std::uint32_t>(bytes, 20);
  const std::size_t across = get_le<std::uint32_t>(bytes, 24);
  if (method > static_cast<std::uint8_t>(Method::Downgrade)) {
    throw Error(ErrorCode::SchemaViolation, "unknown method tag " + std::to_string(method));
  }
  if (dtype > static_cast<std::uint8_t>(DType::F32)) {
    throw Error(ErrorCode::SchemaViolation, "unknown dtype tag " + std::to_string(dtype));
  }
  if (n < 1 || n >= m || channels < 1 || down < 1 || across < 1) {
    throw Error(ErrorCode::SchemaViolation, "inconsistent lcim dimensions");
  }
  if (!all_zero(bytes.subspan(44, 4))) {
    throw Error(ErrorCode::SchemaViolation, "reserved header bytes are not zero");
  }
  const auto type = static_cast<DType>(dtype);
  const std::size_t expected = channels * down * across * n * n * dtype_size(type);
  const auto payload = bytes.subspan(kLcimHeaderSize);
  if (payload.size() != expected) {
    throw Error(ErrorCode::LengthMismatch, "lcim payload is " + std::to_string(payload.size()) +
                                               " bytes, header implies " + std::to_string(expected));
  }
  std::array<std::uint8_t, 8> stored{};
  std::copy_n(bytes.begin() + 36, 8, stored.begin());
  if (stored != content_digest(bytes.first(36), payload)) {
    throw Error(ErrorCode::DigestMismatch, "lcim content digest does not match");
  }
  CompressedImage out;
  out.method = static_cast<Method>(method);
  out.m = m;
  out.n = n;
  std::copy_n(bytes.begin() + 28, 8, out.spec_digest.begin());
  if (expected_spec && *expected_spec != out.spec_digest) {
    throw Error(ErrorCode::DigestMismatch, "lcim was produced under a different spec");
  }
  const ImageDims gd{down * n, across * n, channels};
  out.grid = Image(gd, type);
  out.grid.visit([&](auto v) {
    using T = typename decltype(v)::value_type;
    std::size_t off = 0;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t bi = 0; bi < down; ++bi) {
        for (std::size_t bj = 0; bj < across; ++bj) {
          for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
              T& dst = v[(c * gd.height + bi * n + y) * gd.width + bj * n + x];
              if constexpr (std::is_same_v<T, float>) {
                dst = std::bit_cast<float>(get_le<std::uint32_t>(payload, off));
                off += 4;
              } else {
                dst = payload[off++];
              }
            }
          }
        }
      }
    }
  });
  return out;
}

std::vector<std::uint8_t> write_matrix(const SketchMatrix& mat) {
  if (mat.entries.size() != mat.rows * mat.cols) {
    throw Error(ErrorCode::DimensionMismatch, "matrix entry count does not match rows*cols");
  }
  Writer payload(mat.entries.size() * 4);
  for (float v : mat.entries) payload.f32(v);
  const auto body = payload.take();
  Writer w(kLcmxHeaderSize + body.size());
  w.bytes(kLcmxMagic);
  w.le(kLcmxVersion);
  w.le(static_cast<std::uint8_t>(mat.kind));
  w.zeros(1);
  w.le(static_cast<std::uint32_t>(mat.rows));
  w.le(static_cast<std::uint32_t>(mat.cols));
  w.f64(mat.gamma);
  w.le(mat.seed);
  w.bytes(content_digest(w.view(), body));
  w.zeros(8);
  w.bytes(body);
  return w.take();
}

SketchMatrix read_matrix(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kLcmxMagic, kLcmxHeaderSize, "lcmx");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kLcmxVersion) {
    throw Error(ErrorCode::VersionUnsupported, "lcmx version " + std::to_string(version));
  }
  const auto kind = bytes[6];
  if (kind > static_cast<std::uint8_t>(SketchKind::Ms)) {
    throw Error(ErrorCode::SchemaViolation, "unknown matrix kind " + std::to_string(kind));
  }
  if (bytes[7] != 0 || !all_zero(bytes.subspan(40, 8))) {
    throw Error(ErrorCode::SchemaViolation, "reserved header bytes are not zero");
  }
  SketchMatrix mat;
  mat.kind = static_cast<SketchKind>(kind);
  mat.rows = get_le<std::uint32_t>(bytes, 8);
  mat.cols = get_le<std::uint32_t>(bytes, 12);
  mat.gamma = std::bit_cast<double>(get_le<std::uint64_t>(bytes, 16));
  mat.seed = get_le<std::uint64_t>(bytes, 24);
  if (mat.rows < 1 || mat.cols < 1 || !(mat.gamma >= 0.0 && mat.gamma <= 1.0)) {
    throw Error(ErrorCode::SchemaViolation, "invalid lcmx header fields");
  }
  const auto payload = bytes.subspan(kLcmxHeaderSize);
  if (payload.size() != mat.rows * mat.cols * 4) {
    throw Error(ErrorCode::LengthMismatch, "lcmx payload is " + std::to_string(payload.size()) +
                                               " bytes, header implies " +
                                               std::to_string(mat.rows * mat.cols * 4));
  }
  std::array<std::uint8_t, 8> stored{};
  std::copy_n(bytes.begin() + 32, 8, stored.begin());
  if (stored != content_digest(bytes.first(32), payload)) {
    throw Error(ErrorCode::DigestMismatch, "lcmx content digest does not match");
  }
  mat.entries.resize(mat.rows * mat.cols);
  for (std::size_t i = 0; i < mat.entries.size(); ++i) {
    mat.entries[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload, 4 * i));
  }
  return mat;
}

// ---- manifest -------------------------------------------------------------

std::vector<const ManifestEntry*> DatasetManifest::copies_of(std::size_t source_index) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.source_index == source_index) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) { return a->copy < b->copy; });
  return out;
}

namespace {

std::string_view kind_name(SketchKind k) { return k == SketchKind::Rmm ? "rmm" : "ms"; }

json spec_to_json(const CompressionSpec& s) {
  return {{"method", to_string(s.method)}, {"m", s.m},
          {"n", s.n},                     {"gamma", s.gamma},
          {"seed", s.seed},               {"resize_to", s.resize_to},
          {"crop_to", s.crop_to},         {"copies", s.copies},
          {"mode", to_string(s.mode)},    {"flip_prob", s.flip_prob}};
}

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema(std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string str_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) schema(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double num_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number()) schema(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

bool bool_field(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_boolean()) schema(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

CompressionSpec spec_from_json(const json& j) {
  CompressionSpec s;
  const auto method = parse_method(str_field(j, "method"));
  if (!method) schema("unknown method");
  s.method = *method;
  s.m = uint_field(j, "m");
  s.n = uint_field(j, "n");
  s.gamma = num_field(j, "gamma");
  s.seed = uint_field(j, "seed");
  s.resize_to = uint_field(j, "resize_to");
  s.crop_to = uint_field(j, "crop_to");
  s.copies = uint_field(j, "copies");
  const auto mode = parse_mode(str_field(j, "mode"));
  if (!mode) schema("unknown mode");
  s.mode = *mode;
  s.flip_prob = num_field(j, "flip_prob");
  try {
    validate(s);
  } catch (const Error& e) {
    schema(std::string("invalid spec: ") + e.what());
  }
  return s;
}

}  // namespace

std::string write_manifest(const DatasetManifest& mf) {
  json j;
  j["format"] = "locomp-manifest";
  j["version"] = mf.version;
  j["spec"] = spec_to_json(mf.spec);
  j["spec_digest"] = to_hex(spec_digest(mf.spec));
  if (mf.arch) {
    j["arch"] = {{"region", mf.arch->region}, {"stride", mf.arch->stride}};
  } else {
    j["arch"] = nullptr;
  }
  j["matrices"] = json::array();
  for (const auto& m : mf.matrices) {
    j["matrices"].push_back({{"kind", kind_name(m.kind)}, {"path", m.path}, {"sha256", m.sha256}});
  }
  j["source_count"] = mf.source_count;
  j["entries"] = json::array();
  for (const auto& e : mf.entries) {
    char key[17];
    std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(e.augment.stream_key));
    j["entries"].push_back({{"source", e.source},
                            {"label", e.label},
                            {"source_index", e.source_index},
                            {"copy", e.copy},
                            {"path", e.path},
                            {"sha256", e.sha256},
                            {"rng",
                             {{"stream_key", key},
                              {"crop_top", e.augment.top},
                              {"crop_left", e.augment.left},
                              {"flipped", e.augment.flipped}}}});
  }
  j["skipped"] = json::array();
  for (const auto& s : mf.skipped) j["skipped"].push_back({{"source", s.source}, {"error", s.error}});
  return j.dump(2) + "\n";
}

DatasetManifest read_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    schema(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (str_field(j, "format") != "locomp-manifest") schema("format tag is not locomp-manifest");
  DatasetManifest mf;
  mf.version = static_cast<int>(uint_field(j, "version"));
  if (mf.version != kManifestVersion) {
    throw Error(ErrorCode::VersionUnsupported, "manifest version " + std::to_string(mf.version));
  }
  mf.spec = spec_from_json(field(j, "spec"));
  if (str_field(j, "spec_digest") != to_hex(spec_digest(mf.spec))) {
    throw Error(ErrorCode::DigestMismatch, "manifest spec digest does not match its spec");
  }
  const json& arch = field(j, "arch");
  if (!arch.is_null()) {
    mf.arch = ConvArch{uint_field(arch, "region"), uint_field(arch, "stride")};
    try {
      validate(*mf.arch);
    } catch (const Error& e) {
      schema(e.what());
    }
  }
  const json& mats = field(j, "matrices");
  if (!mats.is_array()) schema("'matrices' must be an array");
  for (const auto& m : mats) {
    MatrixRef ref;
    const std::string kind = str_field(m, "kind");
    if (kind == "rmm") {
      ref.kind = SketchKind::Rmm;
    } else if (kind == "ms") {
      ref.kind = SketchKind::Ms;
    } else {
      schema("unknown matrix kind '" + kind + "'");
    }
    ref.path = str_field(m, "path");
    ref.sha256 = str_field(m, "sha256");
    if (!is_hex_digest(ref.sha256)) schema("matrix sha256 is not a 64-digit hex digest");
    mf.matrices.push_back(std::move(ref));
  }
  const bool needs_matrix = mf.spec.method == Method::Rmm || mf.spec.method == Method::Ms;
  if (needs_matrix) {
    const SketchKind want = mf.spec.method == Method::Rmm ? SketchKind::Rmm : SketchKind::Ms;
    const bool found = std::any_of(mf.matrices.begin(), mf.matrices.end(),
                                   [&](const MatrixRef& r) { return r.kind == want; });
    if (!found) schema("spec method needs a matrix reference with a digest");
  }
  mf.source_count = uint_field(j, "source_count");
  const json& entries = field(j, "entries");
  if (!entries.is_array()) schema("'entries' must be an array");
  for (const auto& e : entries) {
    ManifestEntry me;
    me.source = str_field(e, "source");
    me.label = str_field(e, "label");
    me.source_index = uint_field(e, "source_index");
    me.copy = uint_field(e, "copy");
    me.path = str_field(e, "path");
    me.sha256 = str_field(e, "sha256");
    if (!is_hex_digest(me.sha256)) schema("entry sha256 is not a 64-digit hex digest");
    if (me.source_index >= mf.source_count || me.copy >= mf.spec.copies) {
      schema("entry index out of range");
    }
    const json& rng = field(e, "rng");
    const std::string key = str_field(rng, "stream_key");
    if (key.size() != 16 || key.find_first_not_of("0123456789abcdef") != std::string::npos) {
      schema("rng stream_key must be 16 hex digits");
    }
    me.augment.stream_key = std::stoull(key, nullptr, 16);
    me.augment.top = uint_field(rng, "crop_top");
    me.augment.left = uint_field(rng, "crop_left");
    me.augment.flipped = bool_field(rng, "flipped");
    mf.entries.push_back(std::move(me));
  }
  if (mf.entries.size() != mf.source_count * mf.spec.copies) {
    schema("entry count " + std::to_string(mf.entries.size()) + " != source_count * copies");
  }
  const json& skipped = field(j, "skipped");
  if (!skipped.is_array()) schema("'skipped' must be an array");
  for (const auto& s : skipped) mf.skipped.push_back({str_field(s, "source"), str_field(s, "error")});
  return mf;
}

void verify_manifest(const DatasetManifest& manifest, const fs::path& dir) {
  auto check = [&](const std::string& rel, const std::string& digest) {
    if (sha256_file_hex(dir / rel) != digest) {
      throw Error(ErrorCode::DigestMismatch, "digest mismatch for " + rel);
    }
  };
  for (const auto& m : manifest.matrices) check(m.path, m.sha256);
  for (const auto& e : manifest.entries) check(e.path, e.sha256);
}

std::optional<SketchMatrix> load_matrix(const DatasetManifest& manifest, const fs::path& dir) {
  if (manifest.spec.method != Method::Rmm && manifest.spec.method != Method::Ms) return std::nullopt;
  const SketchKind want = manifest.spec.method == Method::Rmm ? SketchKind::Rmm : SketchKind::Ms;
  for (const auto& ref : manifest.matrices) {
    if (ref.kind != want) continue;
    const auto bytes = read_file(dir / ref.path);
    if (to_hex(sha256(bytes)) != ref.sha256) {
      throw Error(ErrorCode::DigestMismatch, "digest mismatch for " + ref.path);
    }
    return read_matrix(bytes);
  }
  throw Error(ErrorCode::SchemaViolation, "manifest lacks the matrix its method needs");
}

}  // namespace locomp::lcio
