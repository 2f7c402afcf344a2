#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fundusq/filter.hpp"
#include "fundusq/image.hpp"
#include "support/oracles.hpp"
#include "support/random_image.hpp"

namespace fs = std::filesystem;
using namespace fundusq;
using fundusq::testing::random_matrix;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "fundusq_image_core";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(LoadImage, EightBitEndpointsNormalise) {
  cv::Mat m(2, 3, CV_8UC3, cv::Scalar(0, 0, 0));
  m.at<cv::Vec3b>(0, 0) = {255, 255, 255};
  m.at<cv::Vec3b>(1, 2) = {0, 0, 255};  // BGR: pure red
  const fs::path p = temp_dir() / "endpoints.png";
  ASSERT_TRUE(cv::imwrite(p.string(), m));

  const RgbImage img = load_image(p);
  EXPECT_EQ(img.width(), 3u);
  EXPECT_EQ(img.height(), 2u);
  EXPECT_EQ(img.red()(0, 0), 1.0);
  EXPECT_EQ(img.green()(0, 0), 1.0);
  EXPECT_EQ(img.blue()(0, 1), 0.0);
  EXPECT_EQ(img.red()(1, 2), 1.0);
  EXPECT_EQ(img.green()(1, 2), 0.0);
}

TEST(LoadImage, SixteenBitAndGreyReplication) {
  cv::Mat m(4, 5, CV_16UC1, cv::Scalar(65535));
  m.at<std::uint16_t>(2, 3) = 0;
  const fs::path p = temp_dir() / "grey16.png";
  ASSERT_TRUE(cv::imwrite(p.string(), m));
  const RgbImage img = load_image(p);
  EXPECT_EQ(img.width(), 5u);
  EXPECT_EQ(img.height(), 4u);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    EXPECT_EQ(img.channel(ch)(0, 0), 1.0);
    EXPECT_EQ(img.channel(ch)(2, 3), 0.0);
  }
}

TEST(LoadImage, LandscapeJpegDimensions) {
  // Reference-dataset geometry: 3456 rows by 5184 columns.
  cv::Mat m(3456, 5184, CV_8UC3, cv::Scalar(10, 80, 160));
  const fs::path p = temp_dir() / "landscape.jpg";
  ASSERT_TRUE(cv::imwrite(p.string(), m));
  const RgbImage img = load_image(p);
  EXPECT_EQ(img.width(), 5184u);
  EXPECT_EQ(img.height(), 3456u);
}

TEST(LoadImage, ErrorsAreDistinct) {
  EXPECT_THROW(load_image(temp_dir() / "does_not_exist.png"), IoError);
  const fs::path junk = temp_dir() / "junk.png";
  std::ofstream(junk) << "not an image";
  EXPECT_THROW(load_image(junk), UnsupportedFormatError);
}

TEST(Grayscale, Bt709Coefficients) {
  const RealMatrix one(1, 1, 1.0), zero(1, 1, 0.0);
  EXPECT_DOUBLE_EQ(to_grayscale(RgbImage(one, one, one)).pixels()(0, 0), 1.0);
  EXPECT_EQ(to_grayscale(RgbImage(zero, zero, zero)).pixels()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(to_grayscale(RgbImage(one, zero, zero)).pixels()(0, 0), 0.2125);
  EXPECT_DOUBLE_EQ(to_grayscale(RgbImage(zero, one, zero)).pixels()(0, 0), 0.7154);
  EXPECT_DOUBLE_EQ(to_grayscale(RgbImage(zero, zero, one)).pixels()(0, 0), 0.0721);
}

TEST(Grayscale, ConvexCombinationOfChannels) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RgbImage rgb = fundusq::testing::random_rgb(16, 16, seed * 3);
    const GrayImage g = to_grayscale(rgb);
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        const double a = rgb.red()(r, c), b = rgb.green()(r, c), d = rgb.blue()(r, c);
        EXPECT_GE(g.pixels()(r, c), std::min({a, b, d}) - 1e-15);
        EXPECT_LE(g.pixels()(r, c), std::max({a, b, d}) + 1e-15);
      }
  }
}

TEST(GrayImage, RejectsOutOfRange) {
  EXPECT_THROW(GrayImage(RealMatrix(2, 2, 1.5)), InvalidArgument);
  EXPECT_THROW(GrayImage(RealMatrix(2, 2, -0.1)), InvalidArgument);
  EXPECT_THROW(GrayImage(RealMatrix(0, 0)), InvalidArgument);
}

TEST(FundusMask, BlackIsDegenerate) {
  EXPECT_THROW(fundus_mask(RealMatrix(20, 20, 0.0), 0.05), DegenerateMaskError);
}

TEST(FundusMask, WhiteIsFull) {
  const FundusMask m = fundus_mask(RealMatrix(20, 30, 1.0), 0.05);
  EXPECT_EQ(m.count(), 600u);
}

TEST(FundusMask, RejectsThresholdOutsideOpenUnitInterval) {
  EXPECT_THROW(fundus_mask(RealMatrix(4, 4, 1.0), 0.0), InvalidArgument);
  EXPECT_THROW(fundus_mask(RealMatrix(4, 4, 1.0), 1.0), InvalidArgument);
}

TEST(FundusMask, DiscAreaWithinTwoPercent) {
  // The 5x5 pre-blur grows the mask by about two pixels at the rim, so the
  // disc is sized like a downsampled fundus photograph.
  const std::size_t n = 600;
  const double cy = 299.5, cx = 299.5, radius = 250.0;
  RealMatrix img(n, n, 0.0);
  std::size_t disc = 0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (std::hypot(r - cy, c - cx) <= radius) {
        img(r, c) = 0.6;
        ++disc;
      }
  const FundusMask m = fundus_mask(img, 0.05);
  const double area = static_cast<double>(m.count());
  EXPECT_NEAR(area / static_cast<double>(disc), 1.0, 0.02);
  EXPECT_TRUE(m(300, 300));
  EXPECT_FALSE(m(0, 0));
}

TEST(FundusMask, MonotoneInThreshold) {
  const RealMatrix img = random_matrix(32, 32, 7);
  std::size_t previous = img.size() + 1;
  for (double t : {0.1, 0.3, 0.45, 0.5, 0.55, 0.7}) {
    std::size_t count = 0;
    try {
      const FundusMask m = fundus_mask(img, t);
      count = m.count();
    } catch (const DegenerateMaskError&) {
      count = 0;
    }
    EXPECT_LE(count, previous);
    previous = count;
  }
}

TEST(Convolve2d, EvenKernelRejected) {
  EXPECT_THROW(convolve2d(RealMatrix(4, 4, 1.0), RealMatrix(2, 3, 1.0)), InvalidArgument);
  EXPECT_THROW(convolve2d(RealMatrix(4, 4, 1.0), RealMatrix(3, 4, 1.0)), InvalidArgument);
}

TEST(Convolve2d, ZeroSumKernelAnnihilatesConstants) {
  const RealMatrix k(3, 3, {1, -2, 3, 0, -4, 1, 2, 0, -1});
  const RealMatrix out = convolve2d(RealMatrix(9, 7, 0.37), k);
  for (double v : out) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Convolve2d, IdentityKernel) {
  const RealMatrix img = random_matrix(6, 9, 3);
  const RealMatrix k(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  EXPECT_EQ(convolve2d(img, k), img);
}

TEST(Convolve2d, MatchesNestedLoopOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RealMatrix img = random_matrix(5, 5, seed);
    const RealMatrix k = random_matrix(3, 5, seed + 100, -1.0, 1.0);
    const RealMatrix got = convolve2d(img, k);
    const RealMatrix want = oracle::convolve(img, k);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
  }
}

TEST(Convolve2d, IsLinear) {
  const RealMatrix x = random_matrix(16, 16, 1);
  const RealMatrix y = random_matrix(16, 16, 2);
  const RealMatrix k = random_matrix(5, 3, 3, -1.0, 1.0);
  const double a = 0.7, b = -1.9;
  RealMatrix combo(16, 16);
  for (std::size_t i = 0; i < combo.size(); ++i)
    combo.data()[i] = a * x.data()[i] + b * y.data()[i];
  const RealMatrix lhs = convolve2d(combo, k);
  const RealMatrix cx = convolve2d(x, k);
  const RealMatrix cy = convolve2d(y, k);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    EXPECT_NEAR(lhs.data()[i], a * cx.data()[i] + b * cy.data()[i], 1e-10);
}

TEST(GaussianBlur, PreservesConstantsAndMass) {
  const RealMatrix out = gaussian_blur(RealMatrix(12, 12, 0.4), 2.0);
  for (double v : out) EXPECT_NEAR(v, 0.4, 1e-12);
  const auto taps = gaussian_taps(3.0);
  EXPECT_EQ(taps.size(), 25u);
  double sum = 0.0;
  for (double t : taps) sum += t;
  EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(Resampling, DownscaleAveragesBlocks) {
  RealMatrix img(4, 4, 0.0);
  img(0, 0) = 1.0;
  const RealMatrix small = downscale(img, 2);
  ASSERT_EQ(small.rows(), 2u);
  EXPECT_DOUBLE_EQ(small(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(small(1, 1), 0.0);
  const RealMatrix big = resize_bilinear(RealMatrix(3, 3, 0.5), 9, 9);
  for (double v : big) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(DebugDump, Writes16BitPng) {
  const fs::path p = temp_dir() / "dump.png";
  save_png16(random_matrix(8, 8, 4, -3.0, 5.0), p);
  const cv::Mat back = cv::imread(p.string(), cv::IMREAD_UNCHANGED);
  ASSERT_FALSE(back.empty());
  EXPECT_EQ(back.depth(), CV_16U);
  double lo = 0, hi = 0;
  cv::minMaxLoc(back, &lo, &hi);
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 65535.0);
}
