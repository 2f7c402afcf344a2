#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fundusq/stat_metrics.hpp"
#include "support/oracles.hpp"
#include "support/random_image.hpp"

using namespace fundusq;
using fundusq::testing::random_matrix;

TEST(Energy, FixedPoints) {
  EXPECT_EQ(energy(RealMatrix(3, 3, 0.0)), 0.0);
  EXPECT_EQ(energy(RealMatrix(2, 2, 0.5)), 1.0);
}

TEST(Energy, MatchesOracle) {
  const RealMatrix m = random_matrix(8, 8, 11);
  EXPECT_NEAR(energy(m), oracle::energy(m), 1e-12);
}

TEST(MeanPixelEnergy, FixedPoints) {
  EXPECT_DOUBLE_EQ(mean_pixel_energy(RealMatrix(5, 4, 0.3)), 0.09);
  EXPECT_EQ(mean_pixel_energy(RealMatrix(5, 4, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(mean_pixel_energy(RealMatrix(2, 3, {1, 0, 1, 0, 1, 0})), 0.5);
}

TEST(MeanPixelEnergy, MaskedUsesInsideCount) {
  RealMatrix img(2, 2, {1.0, 0.5, 0.0, 0.0});
  Matrix<std::uint8_t> bits(2, 2, {1, 1, 0, 0});
  const FundusMask mask(bits);
  EXPECT_DOUBLE_EQ(mean_pixel_energy(img, &mask), (1.0 + 0.25) / 2.0);
}

TEST(RmsChannelEnergy, FixedPointsAndOracle) {
  const RealMatrix zero(3, 3, 0.0);
  EXPECT_EQ(rms_channel_energy(RgbImage(zero, zero, zero)), 0.0);
  const RealMatrix same = random_matrix(4, 4, 5);
  EXPECT_NEAR(rms_channel_energy(RgbImage(same, same, same)), energy(same), 1e-12);
  const RgbImage rgb = fundusq::testing::random_rgb(4, 4, 9);
  EXPECT_NEAR(rms_channel_energy(rgb),
              oracle::rms_channel_energy(rgb.red(), rgb.green(), rgb.blue()), 1e-12);
}

TEST(ShannonEntropy, FixedPoints) {
  EXPECT_EQ(shannon_entropy(RealMatrix(3, 3, 0.0)), 0.0);
  EXPECT_EQ(shannon_entropy(RealMatrix(3, 3, 1.0)), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy(RealMatrix(2, 2, 0.5)), 2.0);
}

TEST(ShannonEntropy, NegativePixelIsDomainError) {
  EXPECT_THROW(shannon_entropy(RealMatrix(2, 2, {0.1, -0.2, 0.3, 0.4})), DomainError);
}

TEST(ShannonEntropy, ConstantMaximisedAtInverseE) {
  const double at_e = shannon_entropy(RealMatrix(8, 8, 1.0 / std::numbers::e));
  EXPECT_GT(at_e, shannon_entropy(RealMatrix(8, 8, 0.2)));
  EXPECT_GT(at_e, shannon_entropy(RealMatrix(8, 8, 0.6)));
}

TEST(Efc, SinglePixelCarriesAllEnergy) {
  RealMatrix img(6, 7, 0.0);
  img(2, 3) = 0.8;
  EXPECT_EQ(efc(img), 0.0);
  EXPECT_EQ(nefc(img), 0.0);
}

TEST(Efc, ConstantTwoByTwo) {
  EXPECT_NEAR(efc(RealMatrix(2, 2, 0.3)), std::log(4.0), 1e-14);
  EXPECT_NEAR(nefc(RealMatrix(2, 2, 0.3)), 2.0 * std::sqrt(std::log(4.0)), 1e-14);
  EXPECT_NEAR(nefc(RealMatrix(2, 2, 0.3)), 2.3548200450309493, 1e-12);
}

TEST(Efc, AllZeroIsDomainError) {
  EXPECT_THROW(efc(RealMatrix(3, 3, 0.0)), DomainError);
  EXPECT_THROW(nefc(RealMatrix(3, 3, 0.0)), DomainError);
}

TEST(Nefc, SinglePixelImageRejected) { EXPECT_THROW(nefc(RealMatrix(1, 1, 0.5)), DomainError); }

TEST(Nefc, ConstantImagesAtTwoSizes) {
  // Closed form for a constant image of n pixels: (n / 2) * sqrt(ln n). The
  // adjustment does not make NEFC size-invariant; both values are recorded.
  EXPECT_NEAR(nefc(RealMatrix(64, 64, 0.5)), 5906.542127517217, 1e-7);
  EXPECT_NEAR(nefc(RealMatrix(128, 128, 0.5)), 25519.178635107583, 1e-6);
  EXPECT_NEAR(nefc(RealMatrix(64, 64, 0.5)), oracle::nefc(RealMatrix(64, 64, 0.5)), 1e-7);
}

TEST(Efc, ScaleInvariant) {
  const RealMatrix m = random_matrix(12, 9, 3);
  for (double k : {0.01, 0.5, 3.0, 250.0}) {
    const RealMatrix scaled = map(m, [k](double v) { return k * v; });
    EXPECT_NEAR(efc(scaled), efc(m), 1e-10);
  }
}

TEST(Energy, PermutationInvariant) {
  const RealMatrix m = random_matrix(10, 10, 8);
  std::vector<double> shuffled(m.begin(), m.end());
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  const RealMatrix p(10, 10, shuffled);
  EXPECT_NEAR(energy(p), energy(m), 1e-12);
  EXPECT_NEAR(mean_pixel_energy(p), mean_pixel_energy(m), 1e-12);
}

TEST(StatMetrics, AgreeWithOracleOnRandomImages) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RgbImage rgb = fundusq::testing::random_rgb(16, 16, 40 + seed * 3);
    const RealMatrix& m = rgb.green();
    EXPECT_NEAR(mean_pixel_energy(m), oracle::mean_pixel_energy(m), 1e-10);
    EXPECT_NEAR(rms_channel_energy(rgb),
                oracle::rms_channel_energy(rgb.red(), rgb.green(), rgb.blue()), 1e-10);
    EXPECT_NEAR(shannon_entropy(m), oracle::shannon_entropy(m), 1e-10);
    EXPECT_NEAR(efc(m), oracle::efc(m), 1e-10);
    EXPECT_NEAR(nefc(m), oracle::nefc(m), 1e-10);
  }
}
