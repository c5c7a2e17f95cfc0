// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>
#include <png.h>

#include <cmath>
#include <random>

#include "plc/depthmap.hpp"
#include "plc/error.hpp"

using namespace plc;

namespace {

CameraModel test_cam(int w = 8, int h = 6) {
  CameraModel cam;
  cam.f_u = 700.0;
  cam.f_v = 700.0;
  cam.c_u = w / 2.0;
  cam.c_v = h / 2.0;
  cam.baseline_b = 0.5;
  cam.width = w;
  cam.height = h;
  return cam;
}

DisparityMap random_valid_disparity(int w, int h, std::mt19937_64& rng) {
  // keep f*b/d below the default 120 m ceiling: d >= 700*0.5/120 ~ 2.92
  std::uniform_real_distribution<double> disp(3.0, 150.0);
  std::uniform_real_distribution<double> hole(0.0, 1.0);
  DisparityMap y = DisparityMap::make(w, h);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (hole(rng) < 0.2) continue;  // leave ~20% invalid
    y.values[i] = disp(rng);
    y.valid[i] = 1;
  }
  return y;
}

// Encodes a tiny PNG with the given bit depth / color type, for error-path tests.
std::vector<std::uint8_t> encode_png(int bit_depth, int color_type) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + n);
      },
      [](png_structp) {});
  png_set_IHDR(png, info, 2, 2, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(2 * channels * (bit_depth / 8)), 0);
  for (int y = 0; y < 2; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

TEST_CASE("disparity 7 px at f=700, b=0.5 gives 50 m") {
  DisparityMap y = DisparityMap::make(2, 1);
  y.set(0, 0, 7.0);
  // pixel (1,0) stays invalid
  const DepthMap d = disparity_to_depth(y, test_cam(2, 1));
  CHECK(d.is_valid(0, 0));
  CHECK(d.at(0, 0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_FALSE(d.is_valid(1, 0));
}

TEST_CASE("zero and near-zero disparities are invalid in the output") {
  DisparityMap y = DisparityMap::make(3, 1);
  y.set(0, 0, 0.0);
  y.set(1, 0, 1e-9);
  y.set(2, 0, 5.0);
  const DepthMap d = disparity_to_depth(y, test_cam(3, 1));
  CHECK_FALSE(d.is_valid(0, 0));
  CHECK_FALSE(d.is_valid(1, 0));
  CHECK(d.is_valid(2, 0));
}

TEST_CASE("depths beyond the ceiling are dropped, not clamped") {
  DisparityMap y = DisparityMap::make(2, 1);
  y.set(0, 0, 1.0);  // 350 m, above the 120 m default
  y.set(1, 0, 7.0);
  const DepthMap d = disparity_to_depth(y, test_cam(2, 1));
  CHECK_FALSE(d.is_valid(0, 0));
  CHECK(d.is_valid(1, 0));

  DepthConvertOptions opts;
  opts.depth_ceiling = 1000.0;
  const DepthMap deep = disparity_to_depth(y, test_cam(2, 1), opts);
  CHECK(deep.is_valid(0, 0));
  CHECK(deep.at(0, 0) == doctest::Approx(350.0));
}

TEST_CASE("depth 50 m converts back to 7 px and invalid pixels stay invalid") {
  DepthMap d = DepthMap::make(2, 1);
  d.set(0, 0, 50.0);
  const DisparityMap y = depth_to_disparity(d, test_cam(2, 1));
  CHECK(y.at(0, 0) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK_FALSE(y.is_valid(1, 0));
}

TEST_CASE("disparity<->depth round trip within 1e-6 relative") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const DisparityMap y = random_valid_disparity(64, 32, rng);
    const CameraModel cam = test_cam(64, 32);
    const DisparityMap back = depth_to_disparity(disparity_to_depth(y, cam), cam);
    REQUIRE(back.valid == y.valid);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y.valid[i]) CHECK(std::fabs(back.values[i] - y.values[i]) / y.values[i] < 1e-6);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const DisparityMap y = DisparityMap::make(4, 4);
  try {
    disparity_to_depth(y, test_cam(8, 6));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionMismatch);
  }
}

TEST_CASE("box_smooth kernel=1 is the identity") {
  std::mt19937_64 rng(5);
  const DisparityMap seed = random_valid_disparity(16, 16, rng);
  DepthMap d = DepthMap::make(16, 16);
  d.values = seed.values;
  d.valid = seed.valid;
  const DepthMap out = box_smooth(d, 1);
  CHECK(out.values == d.values);
  CHECK(out.valid == d.valid);
}

TEST_CASE("box_smooth leaves constant maps unchanged") {
  DepthMap d = DepthMap::make(9, 9);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 9; ++u) d.set(u, v, 42.0);
  const DepthMap out = box_smooth(d, 5);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(out.values[i] == doctest::Approx(42.0));
}

TEST_CASE("box_smooth 3x3 window averages all nine values") {
  DepthMap d = DepthMap::make(3, 3);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 3; ++u) d.set(u, v, 10.0);
  d.set(2, 1, 50.0);
  const DepthMap out = box_smooth(d, 3);
  CHECK(out.at(1, 1) == doctest::Approx((8 * 10.0 + 50.0) / 9.0).epsilon(1e-15));
  // corner windows truncate to 4 pixels
  CHECK(out.at(0, 0) == doctest::Approx(10.0));
  CHECK(out.at(2, 0) == doctest::Approx((3 * 10.0 + 50.0) / 4.0));
}

TEST_CASE("box_smooth never manufactures validity") {
  DepthMap d = DepthMap::make(5, 5);
  d.set(2, 2, 30.0);  // single valid pixel
  const DepthMap out = box_smooth(d, 3);
  CHECK(out.valid == d.valid);
  CHECK(out.at(2, 2) == doctest::Approx(30.0));

  // invalid neighbors are excluded from the mean
  DepthMap m = DepthMap::make(3, 1);
  m.set(0, 0, 10.0);
  m.set(2, 0, 20.0);
  const DepthMap mo = box_smooth(m, 3);
  CHECK_FALSE(mo.is_valid(1, 0));
  CHECK(mo.at(0, 0) == doctest::Approx(10.0));
  CHECK(mo.at(2, 0) == doctest::Approx(20.0));
}

TEST_CASE("box_smooth commutes with horizontal mirroring") {
  auto mirror = [](const DepthMap& d) {
    DepthMap out = DepthMap::make(d.width, d.height);
    for (int v = 0; v < d.height; ++v)
      for (int u = 0; u < d.width; ++u) {
        out.values[out.index(u, v)] = d.at(d.width - 1 - u, v);
        out.valid[out.index(u, v)] = d.valid[d.index(d.width - 1 - u, v)];
      }
    return out;
  };
  std::mt19937_64 rng(9);
  const DisparityMap seed = random_valid_disparity(20, 12, rng);
  DepthMap d = DepthMap::make(20, 12);
  d.values = seed.values;
  d.valid = seed.valid;

  const DepthMap a = mirror(box_smooth(d, 5));
  const DepthMap b = box_smooth(mirror(d), 5);
  REQUIRE(a.valid == b.valid);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.valid[i]) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
}

TEST_CASE("even kernels are rejected") {
  const DepthMap d = DepthMap::make(4, 4);
  try {
    box_smooth(d, 4);
    FAIL("expected EvenKernel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EvenKernel);
  }
}

TEST_CASE("disparity PNG codec follows the value/256 convention") {
  DisparityMap y = DisparityMap::make(3, 2);
  y.set(0, 0, 7.0);     // stored 1792
  y.set(1, 0, 0.25);    // stored 64
  y.set(2, 1, 255.75);  // stored 65472
  const auto bytes = write_disparity_png(y);
  const DisparityMap back = read_disparity_png(bytes);
  CHECK(back.at(0, 0) == doctest::Approx(7.0));
  CHECK(back.at(1, 0) == doctest::Approx(0.25));
  CHECK(back.at(2, 1) == doctest::Approx(255.75));
  CHECK_FALSE(back.is_valid(1, 1));  // stored 0 means invalid

  const Png16 raw = read_png16(bytes);
  CHECK(raw.pixels[0] == 1792);
}

TEST_CASE("write∘read on a disparity PNG is byte-identical") {
  std::mt19937_64 rng(13);
  DisparityMap y = random_valid_disparity(31, 17, rng);
  // snap to representable 1/256 steps so the fixture is lossless
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y.valid[i]) y.values[i] = std::round(y.values[i] * 256.0) / 256.0;
  const auto fixture = write_disparity_png(y);
  const auto rewritten = write_disparity_png(read_disparity_png(fixture));
  CHECK(fixture == rewritten);
}

TEST_CASE("PNG error paths: bit depth and channel count") {
  try {
    read_disparity_png(encode_png(8, PNG_COLOR_TYPE_GRAY));
    FAIL("expected UnsupportedBitDepth");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedBitDepth);
  }
  try {
    read_disparity_png(encode_png(8, PNG_COLOR_TYPE_RGB));
    FAIL("expected NotSingleChannel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotSingleChannel);
  }
  CHECK_THROWS_AS(read_disparity_png({1, 2, 3, 4}), Error);
}

TEST_CASE("PLDM depth dump round-trips and rejects truncation") {
  DepthMap d = DepthMap::make(5, 4);
  d.set(0, 0, 12.5);
  d.set(4, 3, 80.0);
  auto bytes = write_depth_pldm(d);
  CHECK(bytes.size() == 8 + 5 * 4 * 4);
  CHECK(bytes[0] == 'P');
  const DepthMap back = read_depth_pldm(bytes);
  CHECK(back.valid == d.valid);
  CHECK(back.at(0, 0) == doctest::Approx(12.5));

  bytes.pop_back();
  try {
    read_depth_pldm(bytes);
    FAIL("expected TruncatedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TruncatedRecord);
  }
}
