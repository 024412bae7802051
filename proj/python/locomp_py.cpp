// pybind11 bindings. Images cross the boundary as C-contiguous CHW numpy
// arrays of uint8 or float32.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "locomp/augment.hpp"
#include "locomp/compressors.hpp"
#include "locomp/fileutil.hpp"
#include "locomp/grid.hpp"
#include "locomp/imageio.hpp"
#include "locomp/lcio.hpp"
#include "locomp/netops.hpp"
#include "locomp/pipeline.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace locomp;

namespace {

py::object g_validation, g_io, g_format;

Image to_image(const py::array& a) {
  if (a.ndim() != 3) throw Error(ErrorCode::DimensionMismatch, "expected a CHW array");
  const ImageDims d{static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(2)),
                    static_cast<std::size_t>(a.shape(0))};
  if (py::isinstance<py::array_t<std::uint8_t>>(a)) {
    auto c = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>::ensure(a);
    return Image::from_values(d, std::vector<std::uint8_t>(c.data(), c.data() + c.size()));
  }
  auto c = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(a);
  if (!c) throw Error(ErrorCode::InvalidArgument, "array must be uint8 or float32-convertible");
  return Image::from_values(d, std::vector<float>(c.data(), c.data() + c.size()));
}

py::array to_array(const Image& img) {
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(img.channels()),
                                       static_cast<py::ssize_t>(img.height()),
                                       static_cast<py::ssize_t>(img.width())};
  return img.visit([&](auto v) -> py::array {
    using T = std::remove_const_t<typename decltype(v)::value_type>;
    py::array_t<T> out(shape);
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(T));
    return out;
  });
}

py::array matrix_array(const SketchMatrix& m) {
  py::array_t<float> out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
  std::memcpy(out.mutable_data(), m.entries.data(), m.entries.size() * sizeof(float));
  return out;
}

SketchMatrix matrix_from(const py::array& a, SketchKind kind) {
  auto c = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(a);
  if (!c || c.ndim() != 2) throw Error(ErrorCode::DimensionMismatch, "matrix must be 2-D");
  SketchMatrix m;
  m.rows = static_cast<std::size_t>(c.shape(0));
  m.cols = static_cast<std::size_t>(c.shape(1));
  m.entries.assign(c.data(), c.data() + c.size());
  m.kind = kind;
  return m;
}

CompressionSpec make_spec(const std::string& method, std::size_t m, std::size_t n, double gamma,
                          std::uint64_t seed, std::size_t resize, std::size_t crop,
                          std::size_t copies, double flip_prob, const std::string& mode) {
  CompressionSpec s;
  const auto me = parse_method(method);
  if (!me) throw Error(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
  const auto mo = parse_mode(mode);
  if (!mo) throw Error(ErrorCode::InvalidArgument, "unknown mode '" + mode + "'");
  s.method = *me;
  s.m = m;
  s.n = n;
  s.gamma = gamma;
  s.seed = seed;
  s.resize_to = resize;
  s.crop_to = crop;
  s.copies = copies;
  s.flip_prob = flip_prob;
  s.mode = *mo;
  return s;
}

py::dict compressed_dict(const CompressedImage& c) {
  py::dict d;
  d["method"] = std::string(to_string(c.method));
  d["m"] = c.m;
  d["n"] = c.n;
  d["spec_digest"] = py::bytes(reinterpret_cast<const char*>(c.spec_digest.data()), 8);
  d["grid"] = to_array(c.grid);
  return d;
}

}  // namespace

PYBIND11_MODULE(_locomp, mod) {
  mod.doc() = "Localized compression of image datasets";

  py::object base = py::reinterpret_borrow<py::object>(PyExc_RuntimeError);
  py::object err = py::reinterpret_steal<py::object>(
      PyErr_NewException("locomp._locomp.LocompError", base.ptr(), nullptr));
  g_validation = py::reinterpret_steal<py::object>(
      PyErr_NewException("locomp._locomp.ValidationError", err.ptr(), nullptr));
  g_io = py::reinterpret_steal<py::object>(
      PyErr_NewException("locomp._locomp.IoError", err.ptr(), nullptr));
  g_format = py::reinterpret_steal<py::object>(
      PyErr_NewException("locomp._locomp.FormatError", err.ptr(), nullptr));
  mod.attr("LocompError") = err;
  mod.attr("ValidationError") = g_validation;
  mod.attr("IoError") = g_io;
  mod.attr("FormatError") = g_format;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = classify(e.code()) == ErrorClass::Validation ? g_validation
                       : classify(e.code()) == ErrorClass::Io       ? g_io
                                                                    : g_format;
      py::object inst = cls(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  mod.def("pca_feasible", &pca_feasible, py::arg("m"), py::arg("n"), py::arg("components"));
  mod.def(
      "compression_ratios",
      [](std::size_t m, std::size_t n, std::size_t copies) {
        const auto r = compression_ratios(m, n, copies);
        return py::make_tuple(r.computational, r.storage);
      },
      py::arg("m"), py::arg("n"), py::arg("copies") = 1,
      "(computational, storage) ratios m^2/n^2 and m^2/(n^2 c)");
  mod.def(
      "check_stride_compat",
      [](std::size_t r, std::size_t s, std::size_t n) {
        const auto rep = check_stride_compat({r, s}, n);
        py::dict d;
        d["stride_ok"] = rep.stride_ok;
        d["region_ok"] = rep.region_ok;
        const auto* bad = rep.first_misaligned();
        d["first_misaligned"] = bad ? py::object(py::int_(bad->offset)) : py::none();
        return d;
      },
      py::arg("r"), py::arg("s"), py::arg("n"));

  mod.def(
      "sketch_matrix",
      [](std::size_t rows, std::size_t cols, double gamma, std::uint64_t seed) {
        return matrix_array(gen_sketch_matrix(rows, cols, gamma, seed));
      },
      py::arg("rows"), py::arg("cols"), py::arg("gamma") = 1.0, py::arg("seed") = 0);
  mod.def(
      "rmm_matrix",
      [](std::size_t m, std::size_t n, double gamma, std::uint64_t seed) {
        return matrix_array(make_rmm_matrix(m, n, gamma, seed));
      },
      py::arg("m"), py::arg("n"), py::arg("gamma") = 1.0, py::arg("seed") = 0);
  mod.def(
      "ms_matrix",
      [](std::size_t m, std::size_t n, double gamma, std::uint64_t seed) {
        return matrix_array(make_ms_matrix(m, n, gamma, seed));
      },
      py::arg("m"), py::arg("n"), py::arg("gamma") = 1.0, py::arg("seed") = 0);

  mod.def(
      "compress",
      [](const py::array& image, const std::string& method, std::size_t m, std::size_t n,
         double gamma, std::uint64_t seed, std::optional<py::array> matrix) {
        auto spec = make_spec(method, m, n, gamma, seed, 256, 224, 1, 0.5, "default");
        std::optional<SketchMatrix> mat;
        if (matrix) {
          mat = matrix_from(*matrix, spec.method == Method::Ms ? SketchKind::Ms : SketchKind::Rmm);
        } else {
          mat = make_matrix_for(spec);
        }
        const Image img = to_image(image);
        CompressedImage out;
        {
          py::gil_scoped_release release;
          out = compress_image(img, spec, mat ? &*mat : nullptr);
        }
        return to_array(out.grid);
      },
      py::arg("image"), py::arg("method") = "percentile", py::arg("m") = 7, py::arg("n") = 2,
      py::arg("gamma") = 1.0, py::arg("seed") = 0, py::arg("matrix") = py::none(),
      "Compress a CHW image; without `matrix`, rmm/ms derive theirs from (gamma, seed).");

  mod.def(
      "resize", [](const py::array& image, std::size_t side) { return to_array(resize(to_image(image), side)); },
      py::arg("image"), py::arg("side"));
  mod.def("hflip", [](const py::array& image) { return to_array(hflip(to_image(image))); });
  mod.def(
      "limited_flip",
      [](const py::array& grid, std::size_t n) {
        CompressedImage c;
        c.n = n;
        c.m = n + 1;
        c.grid = to_image(grid);
        return to_array(limited_flip(c).grid);
      },
      py::arg("grid"), py::arg("n"), "Reverse the order of n-wide block columns.");
  mod.def("load_image", [](const fs::path& p) { return to_array(load_image(p)); });
  mod.def(
      "write_png", [](const fs::path& p, const py::array& image) { write_png(p, to_image(image)); },
      py::arg("path"), py::arg("image"));

  mod.def(
      "read_lcim",
      [](const fs::path& p) { return compressed_dict(lcio::read_lcim(read_file(p))); },
      py::arg("path"));
  mod.def(
      "write_lcim",
      [](const fs::path& p, const py::array& grid, const std::string& method, std::size_t m,
         std::size_t n) {
        CompressedImage c;
        const auto me = parse_method(method);
        if (!me) throw Error(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
        c.method = *me;
        c.m = m;
        c.n = n;
        c.grid = to_image(grid);
        write_file_atomic(p, lcio::write_lcim(c));
      },
      py::arg("path"), py::arg("grid"), py::arg("method"), py::arg("m"), py::arg("n"));
  mod.def(
      "read_matrix",
      [](const fs::path& p) {
        const auto mat = lcio::read_matrix(read_file(p));
        py::dict d;
        d["kind"] = mat.kind == SketchKind::Rmm ? "rmm" : "ms";
        d["gamma"] = mat.gamma;
        d["seed"] = mat.seed;
        d["entries"] = matrix_array(mat);
        return d;
      },
      py::arg("path"));

  mod.def(
      "prepare_default",
      [](const fs::path& in, const fs::path& out, const std::string& method, std::size_t m,
         std::size_t n, double gamma, std::uint64_t seed, std::size_t resize, std::size_t crop,
         std::size_t copies, double flip_prob, std::optional<std::pair<std::size_t, std::size_t>> arch,
         std::optional<std::size_t> threads) {
        const auto spec =
            make_spec(method, m, n, gamma, seed, resize, crop, copies, flip_prob, "default");
        std::optional<ConvArch> a;
        if (arch) a = ConvArch{arch->first, arch->second};
        lcio::DatasetManifest mf;
        {
          py::gil_scoped_release release;
          mf = prepare_default(scan_dataset(in), spec, a, out, threads);
        }
        py::dict d;
        d["manifest"] = (out / kManifestName).string();
        d["sources"] = mf.source_count;
        d["entries"] = mf.entries.size();
        py::list skipped;
        for (const auto& s : mf.skipped) skipped.append(py::make_tuple(s.source, s.error));
        d["skipped"] = skipped;
        return d;
      },
      py::arg("in_dir"), py::arg("out_dir"), py::arg("method") = "percentile", py::arg("m") = 7,
      py::arg("n") = 2, py::arg("gamma") = 1.0, py::arg("seed") = 0, py::arg("resize") = 256,
      py::arg("crop") = 224, py::arg("copies") = 1, py::arg("flip_prob") = 0.5,
      py::arg("arch") = py::none(), py::arg("threads") = py::none());

  mod.def(
      "run_inline",
      [](const fs::path& in, const fs::path& work, const py::function& sink,
         const std::string& method, std::size_t m, std::size_t n, double gamma,
         std::uint64_t seed, std::size_t resize, std::size_t crop, double flip_prob,
         std::pair<std::size_t, std::size_t> arch, std::size_t epochs) {
        const auto spec = make_spec(method, m, n, gamma, seed, resize, crop, 1, flip_prob, "inline");
        const auto rep = run_inline(scan_dataset(in), spec, {arch.first, arch.second}, epochs, work,
                                    [&](const InlineSample& s) {
                                      sink(s.epoch, s.source->id, s.source->label,
                                           to_array(s.tensor->grid));
                                    });
        py::dict d;
        d["emitted"] = rep.emitted;
        d["stride_ok"] = rep.compat.stride_ok;
        d["skipped"] = rep.skipped.size();
        return d;
      },
      py::arg("in_dir"), py::arg("work_dir"), py::arg("sink"), py::arg("method") = "percentile",
      py::arg("m") = 7, py::arg("n") = 2, py::arg("gamma") = 1.0, py::arg("seed") = 0,
      py::arg("resize") = 256, py::arg("crop") = 224, py::arg("flip_prob") = 0.5,
      py::arg("arch") = std::pair<std::size_t, std::size_t>{11, 4}, py::arg("epochs") = 1,
      "Inline mode: sink(epoch, source_id, label, grid) for every image and epoch.");

  mod.def(
      "sample",
      [](const fs::path& manifest_path, std::size_t source_index, std::uint64_t seed,
         std::optional<std::size_t> crop_blocks, double flip_prob) {
        const auto bytes = read_file(manifest_path);
        const auto mf = lcio::read_manifest(std::string(bytes.begin(), bytes.end()));
        Rng rng(seed);
        const auto s = sample_runtime(mf, manifest_path.parent_path(), source_index,
                                      {crop_blocks, flip_prob}, rng);
        return py::make_tuple(to_array(s.image.grid), s.label, s.copy);
      },
      py::arg("manifest"), py::arg("source_index"), py::arg("seed") = 0,
      py::arg("crop_blocks") = py::none(), py::arg("flip_prob") = 0.5,
      "One runtime draw: (grid, label, copy).");

  mod.def(
      "sketch_fc_inputs",
      [](const py::array& v, std::size_t reshape_rows, std::size_t reshape_cols,
         std::size_t sketch_rows, std::uint64_t seed) {
        auto c = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(v);
        if (!c) throw Error(ErrorCode::InvalidArgument, "input must be float32-convertible");
        const FcSketchSpec spec{static_cast<std::size_t>(c.size()), reshape_rows, reshape_cols,
                                sketch_rows, seed};
        const auto out = sketch_fc_inputs(std::span<const float>(c.data(), c.size()), spec,
                                          make_fc_matrix(spec));
        py::array_t<float> arr(static_cast<py::ssize_t>(out.size()));
        std::memcpy(arr.mutable_data(), out.data(), out.size() * sizeof(float));
        return arr;
      },
      py::arg("v"), py::arg("reshape_rows"), py::arg("reshape_cols"), py::arg("sketch_rows"),
      py::arg("seed") = 0);
}
