#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "locomp/compressors.hpp"
#include "support/oracles.hpp"

using namespace locomp;

TEST_CASE("pca_feasible") {
  CHECK_FALSE(pca_feasible(7, 4, 1));
  CHECK(pca_feasible(7, 5, 1));
  CHECK(pca_feasible(4, 4, 1));
  for (std::size_t m = 1; m <= 32; ++m)
    for (std::size_t n = 1; n <= 32; ++n)
      for (std::size_t p = 1; p <= 32; ++p) REQUIRE(pca_feasible(m, n, p) == (n * n >= 2 * m * p + m));
  CHECK_THROWS_AS(pca_feasible(0, 1, 1), Error);
}

TEST_CASE("make_percentile_scheme") {
  auto s = make_percentile_scheme(2);
  REQUIRE(s.quantiles.size() == 4);
  CHECK(s.quantiles[0] == 0.0);
  CHECK(s.quantiles[1] == doctest::Approx(1.0 / 3.0));
  CHECK(s.quantiles[2] == doctest::Approx(2.0 / 3.0));
  CHECK(s.quantiles[3] == 1.0);

  s = make_percentile_scheme(1);
  REQUIRE(s.quantiles.size() == 1);
  CHECK(s.quantiles[0] == 0.5);

  s = make_percentile_scheme(3);
  REQUIRE(s.quantiles.size() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK(s.quantiles[k] == doctest::Approx(k / 8.0));
  CHECK(std::is_sorted(s.quantiles.begin(), s.quantiles.end()));
}

TEST_CASE("quantile_rank ties go to even") {
  CHECK(quantile_rank(0.5, 4) == 2);  // 1.5 -> 2
  CHECK(quantile_rank(0.5, 2) == 0);  // 0.5 -> 0
  CHECK(quantile_rank(0.5, 6) == 2);  // 2.5 -> 2
  CHECK(quantile_rank(1.0 / 3.0, 49) == 16);
  CHECK(quantile_rank(1.0, 49) == 48);
}

TEST_CASE("compress_block_percentile examples") {
  const auto scheme2 = make_percentile_scheme(2);

  Block<std::uint8_t> constant{7, std::vector<std::uint8_t>(49, 5)};
  auto out = compress_block_percentile(constant, scheme2);
  CHECK(out.side == 2);
  CHECK(out.values == std::vector<std::uint8_t>{5, 5, 5, 5});

  Block<std::uint8_t> ramp{7, std::vector<std::uint8_t>(49)};
  std::iota(ramp.values.begin(), ramp.values.end(), 0);
  std::shuffle(ramp.values.begin(), ramp.values.end(), std::mt19937(3));
  out = compress_block_percentile(ramp, scheme2);
  CHECK(out.values == std::vector<std::uint8_t>{0, 16, 32, 48});

  Block<float> small{2, {9, 1, 3, 7}};
  auto med = compress_block_percentile(small, make_percentile_scheme(1));
  CHECK(med.values == std::vector<float>{7});
}

TEST_CASE("percentile matches the sorting oracle and samples only input values") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> px(0, 255);
  for (std::size_t m = 2; m <= 9; ++m) {
    for (std::size_t n = 1; n < m; ++n) {
      const auto scheme = make_percentile_scheme(n);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> v(m * m);
        for (auto& x : v) x = static_cast<std::uint8_t>(px(gen) % (trial + 2));
        const auto got = compress_block_percentile<std::uint8_t>(v, m, scheme);
        REQUIRE(got.values == oracle::percentile_block(v, n));
        for (auto x : got.values) CHECK(std::find(v.begin(), v.end(), x) != v.end());
        if (n >= 2) {
          CHECK(got.values.front() == *std::min_element(v.begin(), v.end()));
          CHECK(got.values.back() == *std::max_element(v.begin(), v.end()));
        }
        auto shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(compress_block_percentile<std::uint8_t>(shuffled, m, scheme) == got);
      }
    }
  }
}

TEST_CASE("gen_sketch_matrix") {
  const auto zero = gen_sketch_matrix(4, 49, 0.0, 99);
  CHECK(std::all_of(zero.entries.begin(), zero.entries.end(), [](float v) { return v == 0.0f; }));

  const auto a = gen_sketch_matrix(4, 49, 1.0, 42);
  const auto b = gen_sketch_matrix(4, 49, 1.0, 42);
  CHECK(a == b);
  CHECK(std::none_of(a.entries.begin(), a.entries.end(), [](float v) { return v == 0.0f; }));
  CHECK(a != gen_sketch_matrix(4, 49, 1.0, 43));

  // Lowering gamma only zeroes entries; survivors keep their values.
  const auto half = gen_sketch_matrix(4, 49, 0.5, 42);
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    if (half.entries[k] != 0.0f) CHECK(half.entries[k] == a.entries[k]);
  }

  const auto rmm = make_rmm_matrix(7, 2, 1.0, 1);
  CHECK(rmm.rows == 4);
  CHECK(rmm.cols == 49);
  CHECK(rmm.kind == SketchKind::Rmm);
  const auto ms = make_ms_matrix(7, 2, 1.0, 1);
  CHECK(ms.rows == 2);
  CHECK(ms.cols == 7);
  CHECK(ms.kind == SketchKind::Ms);

  CHECK_THROWS_AS(gen_sketch_matrix(0, 3, 1.0, 0), Error);
  CHECK_THROWS_AS(gen_sketch_matrix(2, 3, 1.5, 0), Error);
}

TEST_CASE("gamma=0.5 nonzero fraction concentrates") {
  std::size_t nonzero = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto m = gen_sketch_matrix(2, 7, 0.5, seed);
    for (float v : m.entries) nonzero += v != 0.0f;
    total += m.entries.size();
  }
  const double frac = static_cast<double>(nonzero) / static_cast<double>(total);
  const double sigma = std::sqrt(0.25 / static_cast<double>(total));
  CHECK(std::abs(frac - 0.5) <= 3 * sigma);
}

TEST_CASE("compress_block_rmm") {
  const auto mat = make_rmm_matrix(7, 2, 1.0, 5);
  Block<std::uint8_t> zero{7, std::vector<std::uint8_t>(49, 0)};
  CHECK(compress_block_rmm(zero, mat).values == std::vector<float>(4, 0.0f));

  std::mt19937_64 gen(1);
  const auto img = oracle::random_u8_image(gen, {7, 7, 1});
  const auto block = std::vector<std::uint8_t>(img.values<std::uint8_t>().begin(),
                                               img.values<std::uint8_t>().end());
  CHECK(compress_block_rmm<std::uint8_t>(block, 7, make_rmm_matrix(7, 2, 0.0, 5)).values ==
        std::vector<float>(4, 0.0f));

  SketchMatrix hand{1, 4, {0.5f, -2.0f, 3.0f, 7.0f}, 1.0, 0, SketchKind::Rmm};
  Block<float> unit{2, {1, 0, 0, 0}};
  const auto out = compress_block_rmm(unit, hand);
  CHECK(out.side == 1);
  CHECK(out.values == std::vector<float>{0.5f});

  const auto res = compress_block_rmm<std::uint8_t>(block, 7, mat);
  const auto ref = oracle::matmul(oracle::widen(mat.entries), oracle::widen(block), 4, 49, 1);
  CHECK(oracle::rel_close(res.values, ref, 1e-5));

  CHECK_THROWS_AS(compress_block_rmm(unit, mat), Error);
}

TEST_CASE("compress_block_ms") {
  std::mt19937_64 gen(2);
  const auto img = oracle::random_f32_image(gen, {7, 7, 1});
  std::vector<float> block(img.values<float>().begin(), img.values<float>().end());

  SketchMatrix selector{1, 7, {1, 0, 0, 0, 0, 0, 0}, 1.0, 0, SketchKind::Ms};
  CHECK(compress_block_ms<float>(block, 7, selector).values == std::vector<float>{block[0]});

  const auto mat = make_ms_matrix(7, 2, 1.0, 9);
  CHECK(compress_block_ms<float>(std::vector<float>(49, 0.0f), 7, mat).values ==
        std::vector<float>(4, 0.0f));

  const auto res = compress_block_ms<float>(block, 7, mat);
  const auto a = oracle::widen(mat.entries);
  const auto left = oracle::matmul(a, oracle::widen(block), 2, 7, 7);
  const auto ref = oracle::matmul(left, oracle::transpose(a, 2, 7), 2, 7, 2);
  CHECK(oracle::rel_close(res.values, ref, 1e-5));

  // Two-sided sketching is block-vector projection with mat (x) mat.
  const auto kron = oracle::kron_self(a, 2, 7);
  std::vector<float> kf(kron.begin(), kron.end());
  SketchMatrix as_rmm{4, 49, kf, 1.0, 0, SketchKind::Rmm};
  CHECK(oracle::rel_close(compress_block_rmm<float>(block, 7, as_rmm).values, res.values, 1e-5));

  CHECK_THROWS_AS(compress_block_ms<float>(block, 7, make_ms_matrix(6, 2, 1.0, 0)), Error);
}

TEST_CASE("rmm and ms are linear") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<float> u(-3.0f, 3.0f);
  const auto rmm = make_rmm_matrix(7, 2, 1.0, 3);
  const auto ms = make_ms_matrix(7, 2, 1.0, 3);
  for (int t = 0; t < 50; ++t) {
    std::vector<float> b1(49), b2(49), mix(49);
    const float alpha = u(gen);
    for (std::size_t k = 0; k < 49; ++k) {
      b1[k] = u(gen);
      b2[k] = u(gen);
      mix[k] = alpha * b1[k] + b2[k];
    }
    for (const auto* mat : {&rmm, &ms}) {
      auto run = [&](const std::vector<float>& b) {
        return mat->kind == SketchKind::Rmm ? compress_block_rmm<float>(b, 7, *mat).values
                                            : compress_block_ms<float>(b, 7, *mat).values;
      };
      const auto c1 = run(b1);
      const auto c2 = run(b2);
      std::vector<double> expect(c1.size());
      for (std::size_t i = 0; i < c1.size(); ++i) expect[i] = alpha * c1[i] + c2[i];
      CHECK(oracle::rel_close(run(mix), expect, 1e-5));
    }
  }
}

namespace {

/// Area oracle: replicate each source pixel dst times per axis, then take
/// plain means over src x src windows.
std::vector<double> area_oracle(const std::vector<double>& img, std::size_t sh, std::size_t sw,
                                std::size_t dh, std::size_t dw) {
  std::vector<double> out(dh * dw, 0.0);
  for (std::size_t y = 0; y < sh * dh; ++y)
    for (std::size_t x = 0; x < sw * dw; ++x)
      out[(y / sh) * dw + x / sw] += img[(y / dh) * sw + x / dw];
  for (auto& v : out) v /= static_cast<double>(sh * sw);
  return out;
}

}  // namespace

TEST_CASE("downgrade_area") {
  auto ones = Image::from_values<std::uint8_t>({4, 4, 1}, std::vector<std::uint8_t>(16, 1));
  CHECK(downgrade_area(ones, {2, 2, 1}).values<std::uint8_t>()[0] == 1);
  CHECK(downgrade_area(ones, {2, 2, 1}) ==
        Image::from_values<std::uint8_t>({2, 2, 1}, std::vector<std::uint8_t>(4, 1)));

  std::vector<float> quad(16, 0.0f);
  for (std::size_t y = 2; y < 4; ++y)
    for (std::size_t x = 0; x < 2; ++x) quad[y * 4 + x] = 4.0f;
  const auto q = downgrade_area(Image::from_values({4, 4, 1}, quad), {2, 2, 1});
  CHECK(q == Image::from_values<float>({2, 2, 1}, {0, 0, 4, 0}));

  std::mt19937_64 gen(4);
  const auto six = oracle::random_f32_image(gen, {6, 6, 1});
  const std::vector<double> six_d(six.values<float>().begin(), six.values<float>().end());
  const auto means = oracle::block_means(six_d, 6, 6, 3);
  const auto got = downgrade_area(six, {2, 2, 1});
  CHECK(oracle::rel_close(std::vector<float>(got.values<float>().begin(), got.values<float>().end()),
                          means, 1e-6));

  for (auto [sh, sw, dh, dw] : {std::array<std::size_t, 4>{7, 7, 2, 2}, {14, 21, 4, 6},
                                {10, 9, 3, 4}, {5, 5, 5, 2}}) {
    const auto src = oracle::random_f32_image(gen, {sh, sw, 1});
    const std::vector<double> sd(src.values<float>().begin(), src.values<float>().end());
    const auto res = downgrade_area(src, {dh, dw, 1});
    CHECK(oracle::rel_close(std::vector<float>(res.values<float>().begin(), res.values<float>().end()),
                            area_oracle(sd, sh, sw, dh, dw), 1e-6));
  }

  try {
    downgrade_area(ones, {5, 4, 1});
    FAIL("expected UpscaleNotSupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UpscaleNotSupported);
  }
}

TEST_CASE("compress_image") {
  std::mt19937_64 gen(5);
  CompressionSpec spec;
  spec.m = 7;
  spec.n = 2;

  const auto big = oracle::random_u8_image(gen, {224, 224, 3});
  const auto c = compress_image(big, spec);
  CHECK(c.grid.dims() == ImageDims{64, 64, 3});
  CHECK(c.dtype() == DType::U8);
  CHECK(c.blocks_down() == 32);
  CHECK(c.spec_digest == spec_digest(spec));

  const auto flat = Image::from_values<std::uint8_t>({14, 14, 1}, std::vector<std::uint8_t>(196, 9));
  CHECK(compress_image(flat, spec).grid ==
        Image::from_values<std::uint8_t>({4, 4, 1}, std::vector<std::uint8_t>(16, 9)));

  // rmm over the image equals a per-block loop.
  spec.method = Method::Rmm;
  const auto mat = *make_matrix_for(spec);
  const auto small = oracle::random_u8_image(gen, {14, 14, 1});
  const auto ci = compress_image(small, spec, &mat);
  CHECK(ci.dtype() == DType::F32);
  for (std::size_t bi = 0; bi < 2; ++bi) {
    for (std::size_t bj = 0; bj < 2; ++bj) {
      std::vector<std::uint8_t> blk;
      for (std::size_t y = 0; y < 7; ++y)
        for (std::size_t x = 0; x < 7; ++x)
          blk.push_back(small.values<std::uint8_t>()[(bi * 7 + y) * 14 + bj * 7 + x]);
      const auto expect = compress_block_rmm<std::uint8_t>(blk, 7, mat);
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x)
          CHECK(ci.grid.values<float>()[(bi * 2 + y) * 4 + bj * 2 + x] == expect.values[y * 2 + x]);
    }
  }

  CHECK_THROWS_AS(compress_image(small, spec), Error);
  const auto wrong = make_rmm_matrix(6, 2, 1.0, 0);
  try {
    compress_image(small, spec, &wrong);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  spec.method = Method::Percentile;
  try {
    compress_image(oracle::random_u8_image(gen, {15, 14, 1}), spec);
    FAIL("expected NonDivisible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonDivisible);
  }
}

TEST_CASE("percentile compress_image equals the block oracle for every n") {
  std::mt19937_64 gen(9);
  for (std::size_t m : {3u, 7u, 8u}) {
    for (std::size_t n = 1; n < m; ++n) {
      CompressionSpec spec;
      spec.m = m;
      spec.n = n;
      // Narrow range on one channel forces ties.
      auto img = oracle::random_u8_image(gen, {2 * m, 3 * m, 2});
      auto px = img.values<std::uint8_t>();
      std::vector<std::uint8_t> v(px.begin(), px.end());
      for (std::size_t i = 0; i < img.dims().plane_size(); ++i) v[i] %= 3;
      img = Image::from_values(img.dims(), std::move(v));
      const auto out = compress_image(img, spec).grid;
      const auto as_float = compress_image(
          Image::from_values(img.dims(), std::vector<float>(img.values<std::uint8_t>().begin(),
                                                            img.values<std::uint8_t>().end())),
          spec).grid;
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t bi = 0; bi < 2; ++bi) {
          for (std::size_t bj = 0; bj < 3; ++bj) {
            std::vector<std::uint8_t> blk;
            for (std::size_t y = 0; y < m; ++y)
              for (std::size_t x = 0; x < m; ++x)
                blk.push_back(static_cast<std::uint8_t>(img.at(c, bi * m + y, bj * m + x)));
            const auto ref = oracle::percentile_block(blk, n);
            for (std::size_t k = 0; k < n * n; ++k) {
              REQUIRE(out.at(c, bi * n + k / n, bj * n + k % n) == ref[k]);
              REQUIRE(as_float.at(c, bi * n + k / n, bj * n + k % n) == ref[k]);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("compress_image commutes with channel selection") {
  std::mt19937_64 gen(6);
  const auto img = oracle::random_u8_image(gen, {21, 28, 3});
  for (auto method : {Method::Percentile, Method::Rmm, Method::Ms, Method::Downgrade}) {
    CompressionSpec spec;
    spec.method = method;
    spec.m = 7;
    spec.n = 3;
    spec.seed = 8;
    const auto mat = make_matrix_for(spec);
    const auto* mp = mat ? &*mat : nullptr;
    const auto whole = compress_image(img, spec, mp);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(extract_channel(whole.grid, k) == compress_image(extract_channel(img, k), spec, mp).grid);
    }
  }
}

TEST_CASE("resample") {
  std::mt19937_64 gen(7);
  const auto img = oracle::random_u8_image(gen, {16, 16, 2});
  CHECK(resample(img, 16, 16) == img);
  const auto con = Image::from_values<std::uint8_t>({8, 8, 1}, std::vector<std::uint8_t>(64, 77));
  const auto up = resample(con, 13, 5);
  CHECK(up.dims() == ImageDims{13, 5, 1});
  for (auto v : up.values<std::uint8_t>()) CHECK(v == 77);
  // Doubling with half-pixel centres: interior outputs sit a quarter pixel
  // from their nearest source.
  const auto ramp = Image::from_values<float>({1, 4, 1}, {0, 4, 8, 12});
  const auto wide = resample(ramp, 1, 8);
  const std::vector<float> expect{0, 1, 3, 5, 7, 9, 11, 12};
  CHECK(std::vector<float>(wide.values<float>().begin(), wide.values<float>().end()) == expect);
}
