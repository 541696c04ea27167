#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "camsel/image.hpp"
#include "camsel/orb.hpp"
#include "support.hpp"

using namespace camsel;

namespace {

// Brute-force area resize: integrate the source over each destination cell.
double naive_area(const GrayImage& src, int x, int y, double rx, double ry) {
  double acc = 0.0;
  for (int sy = 0; sy < src.height(); ++sy) {
    const double oy = std::max(0.0, std::min<double>(sy + 1, (y + 1) * ry) - std::max<double>(sy, y * ry));
    if (oy <= 0) continue;
    for (int sx = 0; sx < src.width(); ++sx) {
      const double ox = std::max(0.0, std::min<double>(sx + 1, (x + 1) * rx) - std::max<double>(sx, x * rx));
      acc += ox * oy * src(sx, sy);
    }
  }
  return acc / (rx * ry);
}

}  // namespace

TEST(ResizeArea, MatchesBruteForceIntegration) {
  const auto src = fixtures::random_image(37, 29, 11);
  for (auto [w, h] : {std::pair{37, 29}, {18, 14}, {10, 7}, {30, 20}}) {
    const auto out = resize_area(src, w, h);
    const double rx = 37.0 / w, ry = 29.0 / h;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) EXPECT_NEAR(out(y, x), naive_area(src, x, y, rx, ry), 1e-3) << w << "x" << h;
  }
}

TEST(ResizeArea, RejectsUpscaling) {
  const auto src = fixtures::random_image(20, 20, 1);
  EXPECT_THROW(resize_area(src, 40, 40), InvalidArgument);
  EXPECT_THROW(resize_area(src, 0, 10), DimensionError);
}

TEST(Png, RoundTripIsExact) {
  const auto dir = fixtures::scratch_dir("png");
  const auto img = fixtures::random_image(33, 17, 5);
  write_png(img, dir / "a.png");
  EXPECT_EQ(read_png(dir / "a.png"), img);
}

TEST(Png, UnreadableFileNamesThePath) {
  const auto dir = fixtures::scratch_dir("png_bad");
  std::ofstream(dir / "junk.png") << "not a png";
  try {
    read_png(dir / "junk.png");
    FAIL();
  } catch (const ImageReadError& e) {
    EXPECT_NE(std::string(e.what()).find("junk.png"), std::string::npos);
  }
}

TEST(Pyramid, SingleLevelIsTheSource) {
  const auto img = fixtures::random_image(640, 480, 2);
  const auto p = build_pyramid(img, 1, 1.2);
  ASSERT_EQ(p.levels.size(), 1u);
  EXPECT_EQ(p.levels[0], img);
}

TEST(Pyramid, LevelSizesFollowFloorOfScaledDimensions) {
  const auto p = build_pyramid(fixtures::uniform_image(640, 480, 9), 8, 1.2);
  ASSERT_EQ(p.levels.size(), 8u);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(p.levels[i].width(), static_cast<int>(std::floor(640 / std::pow(1.2, i))));
    EXPECT_EQ(p.levels[i].height(), static_cast<int>(std::floor(480 / std::pow(1.2, i))));
  }
  // floor(480 / 1.2^7) = floor(133.96) = 133.
  EXPECT_EQ(p.levels[7].width(), 178);
  EXPECT_EQ(p.levels[7].height(), 133);
}

TEST(Pyramid, UnderflowNamesTheLevel) {
  try {
    build_pyramid(fixtures::uniform_image(64, 48, 0), 8, 1.2);
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("level 3"), std::string::npos) << e.what();
  }
}

TEST(Pyramid, UniformImageStaysUniform) {
  const auto p = build_pyramid(fixtures::uniform_image(200, 150, 77), 5, 1.3);
  for (const auto& l : p.levels) {
    EXPECT_EQ(l.pixels().minCoeff(), 77);
    EXPECT_EQ(l.pixels().maxCoeff(), 77);
  }
}
