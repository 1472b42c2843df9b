// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/datagen.h"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "popalign/io.h"

namespace popalign {
namespace {

constexpr std::array<Condition, 2> kAttrs = {Condition::kAttrA, Condition::kAttrB};

TEST(OracleClassifierTest, MixtureAcceptsModeCenters) {
  const OracleClassifier c = OracleClassifier::Mixture1d();
  const double left[] = {-7.0}, right[] = {7.0}, middle[] = {0.0};
  EXPECT_EQ(c.Filter(left), std::optional<int>(0));
  EXPECT_EQ(c.Filter(right), std::optional<int>(1));
  EXPECT_GT(c.AttributeMass(left)[0], 1.0 - 1e-9);
  // G2's center is undetected: almost no attribute mass.
  EXPECT_EQ(c.Filter(middle), std::nullopt);
}

TEST(OracleClassifierTest, ClassifyIsAProbabilityVector) {
  const OracleClassifier c = OracleClassifier::Mixture1d();
  RngStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const double x[] = {10.0 * rng.Normal()};
    const auto p = c.Classify(x);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    EXPECT_GE(p[0], 0.0);
    EXPECT_GE(p[1], 0.0);
  }
}

TEST(OracleClassifierTest, EqualPosteriorMidpointRejected) {
  const OracleClassifier c(GaussianMixture({0.0, 0.0}, {-3.0, 3.0}, {0.0, 0.0}), {{0}, {1}},
                           0.8);
  const double mid[] = {0.0};
  EXPECT_EQ(c.Filter(mid), std::nullopt);
  const Sample s{{0.0}, Condition::kNeutral, std::nullopt};
  EXPECT_EQ(ClassifyFilter(c, s), std::nullopt);
}

TEST(OracleClassifierTest, LowThresholdAcceptsNearlyEverything) {
  const OracleClassifier c(GaussianMixture({0.0, 0.0}, {-3.0, 3.0}, {0.0, 0.0}), {{0}, {1}},
                           0.5 + 1e-9);
  RngStream rng(2);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x[] = {4.0 * rng.Normal()};
    if (c.Filter(x)) ++accepted;
  }
  EXPECT_GE(accepted, 999);
}

TEST(OracleClassifierTest, RejectsBadConstruction) {
  EXPECT_THROW(OracleClassifier(GaussianMixture::Reference1d(), {{0}, {2}}, 0.5),
               InvalidArgument);
  EXPECT_THROW(OracleClassifier(GaussianMixture::Reference1d(), {{0}, {7}}, 0.8),
               InvalidArgument);
  EXPECT_THROW(OracleClassifier(GaussianMixture::Reference1d(), {}, 0.8), InvalidArgument);
}

TEST(OracleClassifierTest, Toy2dSeparatesModesAndRing) {
  const OracleClassifier c = OracleClassifier::Toy2d();
  const double a[] = {-3.0, 0.0}, b[] = {3.0, 0.0}, ring[] = {0.0, 6.0};
  EXPECT_EQ(c.Filter(a), std::optional<int>(0));
  EXPECT_EQ(c.Filter(b), std::optional<int>(1));
  EXPECT_EQ(c.Filter(ring), std::nullopt);
}

TEST(GeneratePairsTest, WinnersAreExactlyBalanced) {
  RngStream rng(3);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d();
  const auto pairs = GeneratePairs(gen, Condition::kNeutral, kAttrs, 50, 4, c, rng);
  ASSERT_EQ(pairs.size(), 50u);
  for (const auto& p : pairs) {
    EXPECT_NO_THROW(p.Validate());
    EXPECT_EQ(p.condition, Condition::kNeutral);
    int g1 = 0, g3 = 0;
    for (const Sample& s : p.winner.samples) {
      const auto label = c.Filter(s.x);
      ASSERT_TRUE(label.has_value());
      EXPECT_EQ(s.attribute, label);
      (*label == 0 ? g1 : g3)++;
    }
    EXPECT_EQ(g1, 2);
    EXPECT_EQ(g3, 2);
    for (const Sample& s : p.loser.samples) EXPECT_TRUE(c.Filter(s.x).has_value());
  }
}

TEST(GeneratePairsTest, SingleSampleWinnersRotateAttributes) {
  RngStream rng(4);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d();
  const auto pairs = GeneratePairs(gen, Condition::kNeutral, kAttrs, 10, 1, c, rng);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].winner.samples[0].attribute, std::optional<int>(i % 2));
  }
}

TEST(GeneratePairsTest, IndivisibleNRejected) {
  RngStream rng(5);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d();
  EXPECT_THROW(GeneratePairs(gen, Condition::kNeutral, kAttrs, 1, 3, c, rng), InvalidArgument);
}

TEST(GeneratePairsTest, ImpossibleThresholdStarves) {
  RngStream rng(6);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d(1.0);
  EXPECT_THROW(GeneratePairs(gen, Condition::kNeutral, kAttrs, 5, 2, c, rng),
               PipelineStarvation);
}

TEST(GeneratePairsTest, LoserRatioFollowsReferenceWeights) {
  // 1000 neutral draws from the reference model: G1 and G3 appear at
  // softmax(1,0,-1) = 0.665 and 0.090 before filtering.
  RngStream rng(7);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const Population pop = gen.Generate(Condition::kNeutral, 1000, rng);
  int g1 = 0, g3 = 0;
  for (const Sample& s : pop.samples) {
    if (s.x[0] < -3.5) ++g1;
    if (s.x[0] > 3.5) ++g3;
  }
  EXPECT_NEAR(g1 / 1000.0, 0.665, 0.02 + 3 * std::sqrt(0.665 * 0.335 / 1000));
  EXPECT_NEAR(g3 / 1000.0, 0.090, 0.02);
}

TEST(GeneratePairsTest, FilteredLoserRatio) {
  RngStream rng(8);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d();
  PairGenStats stats;
  const auto pairs = GeneratePairs(gen, Condition::kNeutral, kAttrs, 1000, 1, c, rng, &stats);
  int g1 = 0;
  for (const auto& p : pairs) g1 += p.loser.samples[0].attribute == 0;
  // 0.665 / (0.665 + 0.090) = 0.881.
  EXPECT_NEAR(g1 / 1000.0, 0.881, 0.03);
  EXPECT_GT(stats.rejected, 0);
  EXPECT_GT(stats.attempts, 2000);
}

TEST(GeneratePairsProperty, BitIdenticalForFixedSeed) {
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  const OracleClassifier c = OracleClassifier::Mixture1d();
  RngStream a(9), b(9);
  const auto pa = GeneratePairs(gen, Condition::kNeutral, kAttrs, 100, 2, c, a);
  const auto pb = GeneratePairs(gen, Condition::kNeutral, kAttrs, 100, 2, c, b);
  EXPECT_EQ(pa, pb);
  std::ostringstream sa, sb;
  WritePairs(sa, pa);
  WritePairs(sb, pb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(MixtureGeneratorTest, AttributeConditionsDrawSingleComponents) {
  RngStream rng(10);
  const MixtureGenerator gen(GaussianMixture::Reference1d());
  for (const Sample& s : gen.Generate(Condition::kAttrA, 500, rng).samples) {
    EXPECT_LT(s.x[0], -3.0);
    EXPECT_EQ(s.condition, Condition::kAttrA);
  }
  for (const Sample& s : gen.Generate(Condition::kAttrB, 500, rng).samples) {
    EXPECT_GT(s.x[0], 3.0);
  }
}

TEST(ToyWorldTest, NeutralSkewAndRing) {
  RngStream rng(11);
  const ToyWorld world;
  const OracleClassifier c = OracleClassifier::Toy2d();
  const Population neutral = world.Generate(Condition::kNeutral, 4000, rng);
  int a = 0;
  for (const Sample& s : neutral.samples) a += c.Filter(s.x) == std::optional<int>(0);
  EXPECT_NEAR(a / 4000.0, 0.85, 0.02);
  const Population ring = world.Generate(Condition::kUnrelated, 1000, rng);
  for (const Sample& s : ring.samples) {
    EXPECT_NEAR(std::hypot(s.x[0], s.x[1]), 6.0, 1.5);
  }
  const Population attr_b = world.Generate(Condition::kAttrB, 500, rng);
  for (const Sample& s : attr_b.samples) EXPECT_EQ(c.Filter(s.x), std::optional<int>(1));
}

}  // namespace
}  // namespace popalign
