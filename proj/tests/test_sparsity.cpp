#include <gtest/gtest.h>

#include "mfplab/sparsity.hpp"
#include "support.hpp"

using namespace mfplab;
using mfplab::testing::random_matrix;
using mfplab::testing::TempDir;

TEST(SampleRetained, ExtremeFractions) {
  const SeedStream s(1);
  EXPECT_EQ(sample_retained(7, 5, 1.0, s), FeatureMask::all(7, 5));
  EXPECT_TRUE(sample_retained(7, 5, 0.0, s).empty());
}

TEST(SampleRetained, CoraSizedCountIsExact) {
  // 0.01 * 2708 * 1433 = 38805.64
  const auto k = sample_retained(2708, 1433, 0.01, SeedStream(3));
  EXPECT_EQ(k.size(), 38806u);
  EXPECT_EQ(k.rows(), 2708);
  EXPECT_EQ(k.cols(), 1433);
}

TEST(SampleRetained, DeterministicAndSeedSensitive) {
  const auto a = sample_retained(100, 20, 0.1, SeedStream(9));
  EXPECT_EQ(a, sample_retained(100, 20, 0.1, SeedStream(9)));
  EXPECT_NE(a, sample_retained(100, 20, 0.1, SeedStream(10)));
  EXPECT_THROW(sample_retained(10, 10, 1.5, SeedStream(1)), InvalidArgument);
}

TEST(SampleRetained, RoughlyUniformOverColumns) {
  // 400 columns x 500 rows at 10%: each column expects 50 entries.
  const auto counts = sample_retained(500, 400, 0.1, SeedStream(4)).column_counts();
  for (Index c : counts) {
    EXPECT_GE(c, 20);
    EXPECT_LE(c, 85);
  }
}

TEST(StochasticSparseSample, FullMaskCopiesInput) {
  const FeatureMatrix x = random_matrix(6, 4, 2);
  EXPECT_EQ(stochastic_sparse_sample(x, FeatureMask::all(6, 4), NoiseSpec{}, SeedStream(5)), x);
}

TEST(StochasticSparseSample, EmptyMaskZeroNoiseIsZero) {
  const FeatureMatrix x = random_matrix(6, 4, 2);
  const auto out = stochastic_sparse_sample(x, FeatureMask(6, 4, {}), NoiseSpec{0.0, 0.0}, SeedStream(5));
  EXPECT_TRUE(out.isZero(0.0));
}

TEST(StochasticSparseSample, NoiseMomentsMatch) {
  const FeatureMatrix x = FeatureMatrix::Zero(100, 100);
  const auto out = stochastic_sparse_sample(x, FeatureMask(100, 100, {}), NoiseSpec{0.0, 1.0}, SeedStream(6));
  const double mean = out.mean();
  const double var = (out.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(StochasticSparseSample, NoiseMeanAndVarianceAreHonoured) {
  const FeatureMatrix x = FeatureMatrix::Zero(200, 100);
  const auto out = stochastic_sparse_sample(x, FeatureMask(200, 100, {}), NoiseSpec{3.0, 4.0}, SeedStream(7));
  const double mean = out.mean();
  EXPECT_NEAR(mean, 3.0, 0.05);
  EXPECT_NEAR((out.array() - mean).square().mean(), 4.0, 0.15);
}

TEST(StochasticSparseSample, RetainedEntriesCopiedOthersReplaced) {
  const FeatureMatrix x = random_matrix(30, 10, 3);
  const auto k = sample_retained(30, 10, 0.2, SeedStream(8));
  const auto out = stochastic_sparse_sample(x, k, NoiseSpec{}, SeedStream(9));
  for (Index i = 0; i < 30; ++i)
    for (Index c = 0; c < 10; ++c) {
      if (k.contains(i, c))
        EXPECT_EQ(out(i, c), x(i, c));
      else
        EXPECT_NE(out(i, c), x(i, c));
    }
}

TEST(StochasticSparseSample, ShapeMismatchThrows) {
  EXPECT_THROW(stochastic_sparse_sample(random_matrix(3, 3, 1), FeatureMask::all(3, 4), NoiseSpec{}, SeedStream(1)),
               ShapeError);
}

TEST(ViewSubset, ExtremeRatios) {
  const auto k = sample_retained(50, 20, 0.3, SeedStream(1));
  EXPECT_EQ(sample_view_subset(k, 1.0, SeedStream(2), 0), k);
  EXPECT_TRUE(sample_view_subset(k, 0.0, SeedStream(2), 0).empty());
}

TEST(ViewSubset, ConcentrationAroundP) {
  const auto k = sample_retained(1000, 10, 1.0, SeedStream(1));
  ASSERT_EQ(k.size(), 10000u);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto kt = sample_view_subset(k, 0.8, SeedStream(77), t);
    EXPECT_TRUE(kt.is_subset_of(k));
    EXPECT_GE(kt.size(), 7800u);
    EXPECT_LE(kt.size(), 8200u);
  }
}

TEST(ViewSubset, ViewsDifferAndAreReproducible) {
  const auto k = sample_retained(200, 10, 0.5, SeedStream(1));
  const SeedStream s(5);
  EXPECT_EQ(sample_view_subset(k, 0.5, s, 3), sample_view_subset(k, 0.5, s, 3));
  EXPECT_NE(sample_view_subset(k, 0.5, s, 3), sample_view_subset(k, 0.5, s, 4));
}

TEST(FeatureMask, RejectsDuplicatesAndRange) {
  EXPECT_THROW(FeatureMask(2, 2, {1, 1}), InvalidArgument);
  EXPECT_THROW(FeatureMask(2, 2, {4}), InvalidArgument);
  EXPECT_THROW(FeatureMask::from_coordinates(2, 2, {{2, 0}}), InvalidArgument);
}

TEST(FeatureMask, CsvRoundTrip) {
  TempDir tmp("mask");
  const auto k = sample_retained(40, 9, 0.25, SeedStream(12));
  write_mask_csv(k, tmp.path() / "mask.csv");
  EXPECT_EQ(read_mask_csv(tmp.path() / "mask.csv", 40, 9), k);
  EXPECT_THROW(read_mask_csv(tmp.path() / "mask.csv", 40, 5), LoadError);
}

TEST(SeedStream, DerivationIsStableAndDistinct) {
  const SeedStream m(42);
  EXPECT_EQ(m.derive("mask", 3), m.derive("mask", 3));
  EXPECT_NE(m.derive("mask", 3), m.derive("mask", 4));
  EXPECT_NE(m.derive("mask", 3), m.derive("split", 3));
  EXPECT_NE(m.derive("mask"), SeedStream(43).derive("mask"));
}
