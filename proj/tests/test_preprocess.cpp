#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lesionforge/preprocess.hpp"

using namespace lesionforge;

namespace {

Image ct_row(std::initializer_list<int> hu) {
  Image img = Image::ct(static_cast<int>(hu.size()), 1);
  std::size_t i = 0;
  for (int v : hu) img.samples[i++] = static_cast<std::uint16_t>(v + kHuOffset);
  return img;
}

}  // namespace

TEST(WindowCt, LungWindowAnchors) {
  const Image out = window_ct(ct_row({-1000, -300, 400}), WindowSpec::lung());
  EXPECT_EQ(out.depth, 8);
  EXPECT_EQ(out.domain, PixelDomain::Natural8);
  EXPECT_EQ(out.samples, (std::vector<std::uint16_t>{0, 128, 255}));
}

TEST(WindowCt, SaturatesOutsideWindowAndIsMonotone) {
  Image img = Image::ct(65536, 1);
  for (int i = 0; i < 65536; ++i) img.samples[i] = static_cast<std::uint16_t>(i);
  const Image out = window_ct(img, WindowSpec::lung());
  for (int i = 1; i < 65536; ++i) ASSERT_GE(out.samples[i], out.samples[i - 1]);
  EXPECT_EQ(out.samples[-1000 - 1 + kHuOffset], 0);
  EXPECT_EQ(out.samples[400 + 1 + kHuOffset], 255);
  EXPECT_EQ(out.samples.front(), 0);
  EXPECT_EQ(out.samples.back(), 255);
}

TEST(WindowCt, RejectsNaturalImages) {
  EXPECT_THROW(window_ct(Image(2, 2, 1, 8), WindowSpec::lung()), std::invalid_argument);
  EXPECT_THROW(window_ct(ct_row({0}), WindowSpec{0, 0}), std::invalid_argument);
}

TEST(DetectFov, DiskWithinTwoPixels) {
  Image img(256, 256, 3, 8);
  BinaryMask disk(256, 256);
  fixture::fill_disk(disk, 128, 128, 100);
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x)
      if (disk.at(x, y))
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = 200;
  const BinaryMask fov = detect_fov(img);
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) {
      if (fov.at(x, y) == disk.at(x, y)) continue;
      const double r = std::hypot(x + 0.5 - 128, y + 0.5 - 128);
      EXPECT_NEAR(r, 100.0, 2.0) << "mismatch far from boundary at " << x << "," << y;
    }
}

TEST(DetectFov, AllWhiteAndAllBlack) {
  Image white(32, 32, 1, 8);
  for (auto& s : white.samples) s = 255;
  EXPECT_EQ(detect_fov(white).area(), 32u * 32u);
  const Image black(32, 32, 3, 8);
  EXPECT_EQ(detect_fov(black).area(), 32u * 32u);
}

TEST(DetectFov, SmallRegionFallsBackToFullFrame) {
  Image img(100, 100, 1, 8);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y) = 255;
  EXPECT_EQ(detect_fov(img).area(), 100u * 100u);
}

TEST(DetectFov, KeepsLargestComponentOnly) {
  Image img(100, 100, 1, 8);
  for (int y = 10; y < 60; ++y)
    for (int x = 10; x < 60; ++x) img.at(x, y) = 200;
  for (int y = 80; y < 85; ++y)
    for (int x = 80; x < 85; ++x) img.at(x, y) = 200;
  EXPECT_EQ(detect_fov(img).area(), 2500u);
}

TEST(ResizeCanonical, ConstantImageStaysConstant) {
  Image img(512, 512, 1, 8);
  for (auto& s : img.samples) s = 77;
  const Image out = resize_canonical(img, 256);
  EXPECT_EQ(out.width, 256);
  for (auto s : out.samples) ASSERT_EQ(s, 77);
}

TEST(ResizeCanonical, IdentityAtTargetSize) {
  const Image img = fixture::fundus(256);
  EXPECT_EQ(resize_canonical(img, 256), img);
}

TEST(ResizeCanonical, CheckerboardAveragesToMidGray) {
  Image img(2, 2, 1, 8);
  img.samples = {0, 255, 255, 0};
  const Image out = resize_canonical(img, 1);
  EXPECT_NEAR(out.samples[0], 128, 1);
}

TEST(ResizeCanonical, MasksStayBinary) {
  std::mt19937_64 gen(2);
  BinaryMask m(97, 61);
  std::bernoulli_distribution on(0.3);
  for (auto& b : m.bits) b = on(gen);
  for (int side : {13, 64, 256}) EXPECT_TRUE(resize_canonical(m, side).is_binary());
}

TEST(Preprocess, FovCropThenResize) {
  Image img(300, 200, 3, 8);
  BinaryMask disk(300, 200);
  fixture::fill_disk(disk, 150, 100, 80);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 300; ++x)
      if (disk.at(x, y)) img.at(x, y, 1) = 180;
  PreprocessOptions opt;
  opt.fov_crop = true;
  opt.size = 64;
  const PreprocessPlan plan = plan_preprocess(img, opt);
  ASSERT_TRUE(plan.crop.has_value());
  EXPECT_EQ(plan.crop->width, 160);
  EXPECT_EQ(plan.crop->height, 160);
  const Image out = preprocess(img, opt);
  EXPECT_EQ(out.width, 64);
  EXPECT_EQ(out.height, 64);
}

TEST(Preprocess, WindowsCtBeforeResizing) {
  Image img = Image::ct(4, 4);
  for (auto& s : img.samples) s = static_cast<std::uint16_t>(-300 + kHuOffset);
  PreprocessOptions opt;
  opt.window = WindowSpec::lung();
  opt.size = 2;
  const Image out = preprocess(img, opt);
  EXPECT_EQ(out.depth, 8);
  for (auto s : out.samples) EXPECT_EQ(s, 128);
}
