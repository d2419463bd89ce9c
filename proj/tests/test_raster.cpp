#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "glyphforge/color_space.hpp"
#include "glyphforge/io.hpp"
#include "glyphforge/raster_ops.hpp"
#include "oracles.hpp"

using namespace glyphforge;

TEST_CASE("binarize follows the >= convention") {
  ScalarField constant(6, 4, 0.7);
  BinaryMask m = binarize(constant, 0.5);
  CHECK(m.count_ones() == m.size());

  ScalarField at_threshold(6, 4, 0.5);
  CHECK(binarize(at_threshold, 0.5).count_ones() == at_threshold.size());

  ScalarField f = oracles::random_field(8, 8, 11);
  BinaryMask got = binarize(f, 0.5);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(got(x, y) == (f(x, y) >= 0.5 ? 1 : 0));
}

TEST_CASE("binarize is idempotent on {0,1} fields") {
  BinaryMask m = oracles::random_mask(17, 13, 3);
  ScalarField f(17, 13);
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 17; ++x) f(x, y) = m(x, y);
  BinaryMask again = binarize(f, 0.5);
  for (size_t i = 0; i < m.size(); ++i) CHECK(again.data()[i] == m.data()[i]);
}

TEST_CASE("distance transform of a point source") {
  BinaryMask m(3, 3);
  m(1, 1) = 1;
  ScalarField d = distance_transform(m);
  CHECK(d(0, 0) == Catch::Approx(std::sqrt(2.0)));
  CHECK(d(1, 0) == Catch::Approx(1.0));
  CHECK(d(1, 1) == Catch::Approx(1.0));  // foreground pixel next to background
}

TEST_CASE("distance transform matches brute force exactly") {
  for (uint32_t seed = 0; seed < 12; ++seed) {
    BinaryMask m = oracles::random_mask(16, 16, seed + 100, 0.3 + 0.04 * seed);
    if (m.uniform()) continue;
    ScalarField fast = distance_transform(m);
    ScalarField slow = oracles::brute_force_distance(m);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) REQUIRE(fast(x, y) == slow(x, y));
  }
}

TEST_CASE("distance transform rejects uniform masks") {
  CHECK_THROWS_AS(distance_transform(BinaryMask(5, 5, 1)), UniformMaskError);
  CHECK_THROWS_AS(distance_transform(BinaryMask(5, 5, 0)), UniformMaskError);
}

TEST_CASE("box_sum constant and impulse responses") {
  ScalarField c(10, 9, 0.25);
  ScalarField s = box_sum(c, 3, 4);
  CHECK(s.width() == 8);
  CHECK(s.height() == 6);
  for (int y = 0; y < s.height(); ++y)
    for (int x = 0; x < s.width(); ++x) CHECK(s(x, y) == Catch::Approx(12 * 0.25));

  ScalarField impulse(10, 9, 0.0);
  impulse(4, 5) = 1.0;
  ScalarField r = box_sum(impulse, 3, 3);
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) {
      bool covers = x <= 4 && 4 <= x + 2 && y <= 5 && 5 <= y + 2;
      CHECK(r(x, y) == Catch::Approx(covers ? 1.0 : 0.0).margin(1e-12));
    }
}

TEST_CASE("box_sum matches the naive windowed sum") {
  ScalarField f = oracles::random_field(8, 8, 77, -1.0, 1.0);
  ScalarField fast = box_sum(f, 3, 3);
  ScalarField slow = oracles::naive_box_sum(f, 3, 3);
  for (int y = 0; y < fast.height(); ++y)
    for (int x = 0; x < fast.width(); ++x)
      CHECK(fast(x, y) == Catch::Approx(slow(x, y)).margin(1e-9));
}

TEST_CASE("box_sum rejects oversized windows") {
  CHECK_THROWS_AS(box_sum(ScalarField(4, 4), 5, 2), RectTooLargeError);
}

TEST_CASE("box_sum_masked invalidates anchors touching undefined pixels") {
  ScalarField f(6, 6, 1.0);
  BinaryMask defined(6, 6, 1);
  defined(3, 3) = 0;
  MaskedBoxSum r = box_sum_masked(f, defined, 2, 2);
  for (int y = 0; y < r.valid.height(); ++y)
    for (int x = 0; x < r.valid.width(); ++x) {
      bool touches = x <= 3 && 3 <= x + 1 && y <= 3 && 3 <= y + 1;
      CHECK(r.valid(x, y) == (touches ? 0 : 1));
      if (r.valid(x, y)) CHECK(r.sum(x, y) == Catch::Approx(4.0));
    }
}

TEST_CASE("pyramid level dimensions follow the ceil/2 recurrence") {
  BinaryMask m(64, 64, 1);
  auto pyr = build_pyramid(m, 0);
  CHECK(pyr.level_count() == 1);
  CHECK(pyr[0].width() == 64);

  ScalarField f = oracles::random_field(37, 53, 5);
  auto p2 = build_pyramid(f, 2);
  CHECK(p2[1].width() == 19);
  CHECK(p2[1].height() == 27);
  CHECK(p2[2].width() == 10);
  CHECK(p2[2].height() == 14);
}

TEST_CASE("pyramid of constant mask stays constant") {
  BinaryMask m(64, 64, 1);
  auto pyr = build_pyramid(m, 2);
  CHECK(pyr[2].width() == 16);
  CHECK(pyr[2].height() == 16);
  CHECK(pyr[2].count_ones() == pyr[2].size());
}

TEST_CASE("pyramid of a half-plane matches the coordinate-halved oracle") {
  BinaryMask m(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) m(x, y) = x >= 32 ? 1 : 0;
  auto pyr = build_pyramid(m, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(pyr[1](x, y) == (x >= 16 ? 1 : 0));
}

TEST_CASE("pyramid depth limit") {
  CHECK_THROWS_AS(build_pyramid(BinaryMask(64, 64, 1), 4), TooManyLevelsError);
}

TEST_CASE("resample identity and constants") {
  RasterImage img = oracles::random_image(12, 9, 4);
  RasterImage same = resample(img, 1.0, Resample::Bicubic);
  REQUIRE(same.width() == 12);
  REQUIRE(same.height() == 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) CHECK(same(x, y, c) == Catch::Approx(img(x, y, c)).margin(1e-12));

  RasterImage flat(10, 10, ColorSpace::SRGB, 0.4);
  RasterImage up = resample(flat, 1.7, Resample::Bicubic);
  for (int y = 0; y < up.height(); ++y)
    for (int x = 0; x < up.width(); ++x) CHECK(up(x, y, 0) == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("resample round trip on a smooth ramp") {
  ScalarField ramp(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      ramp(x, y) = 0.5 + 0.4 * std::sin(0.2 * x) * std::cos(0.15 * y);
  ScalarField up = resample(ramp, 2.0, Resample::Bicubic);
  ScalarField back = resample_to(up, 32, 32, Resample::Bicubic);
  double max_err = 0.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) max_err = std::max(max_err, std::abs(back(x, y) - ramp(x, y)));
  CHECK(max_err < 0.02);
}

TEST_CASE("resample degenerate output") {
  CHECK_THROWS_AS(resample(ScalarField(8, 8), 0.01, Resample::Nearest), DegenerateOutputError);
}

TEST_CASE("png round trip for images and masks") {
  auto dir = std::filesystem::temp_directory_path();
  RasterImage img = oracles::random_image(23, 17, 9);
  auto img_path = (dir / "gf_test_img.png").string();
  write_image_png(img_path, img);
  RasterImage back = read_image_png(img_path);
  REQUIRE(back.width() == 23);
  REQUIRE(back.height() == 17);
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 23; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(back(x, y, c) == Catch::Approx(img(x, y, c)).margin(0.5 / 255.0 + 1e-9));

  BinaryMask m = oracles::random_mask(23, 17, 10);
  auto mask_path = (dir / "gf_test_mask.png").string();
  write_mask_png(mask_path, m);
  BinaryMask mback = read_mask_png(mask_path);
  for (size_t i = 0; i < m.size(); ++i) REQUIRE(mback.data()[i] == m.data()[i]);
}

TEST_CASE("pfm round trip") {
  auto dir = std::filesystem::temp_directory_path();
  ScalarField f = oracles::random_field(9, 7, 21, -3.0, 3.0);
  auto path = (dir / "gf_test_field.pfm").string();
  write_field_pfm(path, f);
  ScalarField back = read_field_pfm(path);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) CHECK(back(x, y) == Catch::Approx(f(x, y)).margin(1e-6));
}

TEST_CASE("lab round trip stays close") {
  RasterImage img = oracles::random_image(16, 16, 33);
  RasterImage back = to_srgb(to_lab(img));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) CHECK(back(x, y, c) == Catch::Approx(img(x, y, c)).margin(2e-3));
}
