#include <doctest.h>

#include <fstream>
#include <random>

#include "locomp/fileutil.hpp"
#include "locomp/imageio.hpp"
#include "support/fixtures.hpp"

using namespace locomp;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected locomp::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("png and pnm round-trip") {
  fixture::TempDir dir("imageio");
  std::mt19937_64 gen(1);
  for (std::size_t c : {1u, 3u}) {
    const auto img = oracle::random_u8_image(gen, {17, 23, c});
    const std::string ext = c == 1 ? ".pgm" : ".ppm";
    write_png(dir.path() / ("a.png"), img);
    write_pnm(dir.path() / ("a" + ext), img);
    CHECK(load_image(dir.path() / "a.png") == img);
    CHECK(load_image(dir.path() / ("a" + ext)) == img);
    CHECK(decode_pnm(encode_pnm(img)) == img);
  }
}

TEST_CASE("pnm header parsing") {
  const std::string text = "P5\n# comment\n2 1\n255\n";
  std::vector<std::uint8_t> b(text.begin(), text.end());
  b.push_back(7);
  b.push_back(9);
  CHECK(decode_pnm(b) == Image::from_values<std::uint8_t>({1, 2, 1}, {7, 9}));
  b.pop_back();
  CHECK(code_of([&] { decode_pnm(b); }) == ErrorCode::UnsupportedImage);
}

TEST_CASE("unreadable inputs") {
  fixture::TempDir dir("imageio-bad");
  CHECK(code_of([&] { load_image(dir.path() / "absent.png"); }) == ErrorCode::MissingFile);
  std::ofstream(dir.path() / "junk.png") << "definitely not a png";
  CHECK(code_of([&] { load_image(dir.path() / "junk.png"); }) == ErrorCode::UnsupportedImage);
  std::ofstream(dir.path() / "junk.ppm") << "P3\n1 1\n255\n0 0 0\n";
  CHECK(code_of([&] { load_image(dir.path() / "junk.ppm"); }) == ErrorCode::UnsupportedImage);

  const auto f = Image::from_values<float>({2, 2, 1}, {0, 1, 2, 3});
  CHECK(code_of([&] { write_png(dir.path() / "f.png", f); }) == ErrorCode::UnsupportedImage);

  CHECK(is_supported_image("x/y.PNG"));
  CHECK(is_supported_image("a.pgm"));
  CHECK_FALSE(is_supported_image("a.jpg"));
}
