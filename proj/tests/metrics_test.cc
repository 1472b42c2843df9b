// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "popalign/engine.h"

namespace popalign {
namespace {

Population Pop1d(std::vector<double> xs, Condition c = Condition::kNeutral) {
  Population p{c, {}};
  for (double x : xs) p.samples.push_back({{x}, c, std::nullopt});
  return p;
}

// Two attributes with well separated components and equal weights.
OracleClassifier Symmetric() {
  return OracleClassifier(GaussianMixture({0.0, 0.0}, {-7.0, 7.0}, {0.0, 0.0}), {{0}, {1}});
}

TEST(FairnessDiscrepancyTest, IdealOutputGivesZero) {
  const DiscrepancyReport r = FairnessDiscrepancy(Pop1d({-7.0, 7.0}), Symmetric());
  EXPECT_EQ(r.f, 0.0);
  EXPECT_EQ(r.n_samples, 2);
  EXPECT_EQ(r.n_detected, 2);
}

TEST(FairnessDiscrepancyTest, AllMassOnOneAttribute) {
  const DiscrepancyReport r = FairnessDiscrepancy(Pop1d({-7.0, -7.0, -7.0}), Symmetric());
  EXPECT_NEAR(r.f, std::sqrt(0.5 * 0.5 + 0.5 * 0.5), 1e-12);
  EXPECT_NEAR(r.f, 0.7071, 1e-4);
}

TEST(FairnessDiscrepancyTest, ReferenceModelMonteCarlo) {
  // Normalizing softmax(1,0,-1) over {G1, G3}: (0.881, 0.119), f = 0.539.
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const auto w = ref.Weights();
  const double p1 = w[0] / (w[0] + w[2]);
  const double oracle = std::sqrt(2.0) * (p1 - 0.5);
  EXPECT_NEAR(oracle, 0.539, 1e-3);
  RngStream rng(1);
  const DiscrepancyReport r =
      FairnessDiscrepancy(ref.Sample(10000, rng), OracleClassifier::Mixture1d());
  EXPECT_NEAR(r.f, oracle, 0.02);
  EXPECT_LT(r.n_detected, r.n_samples);  // G2 draws are excluded
}

TEST(FairnessDiscrepancyTest, ZeroAcceptedThrows) {
  EXPECT_THROW(FairnessDiscrepancy(Pop1d({0.0, 0.0}), OracleClassifier::Mixture1d()),
               InvalidArgument);
}

TEST(FairnessDiscrepancyTest, IdealMustBeADistribution) {
  const std::vector<double> bad = {0.7, 0.7};
  EXPECT_THROW(FairnessDiscrepancy(Pop1d({-7.0}), Symmetric(), bad), InvalidArgument);
}

TEST(FairnessDiscrepancyProperty, BoundedAndPermutationInvariant) {
  RngStream rng(2);
  const OracleClassifier c = Symmetric();
  const OracleClassifier swapped(GaussianMixture({0.0, 0.0}, {-7.0, 7.0}, {0.0, 0.0}),
                                 {{1}, {0}});
  for (int i = 0; i < 100; ++i) {
    std::vector<double> xs;
    for (int k = 0; k < 10; ++k) xs.push_back(rng.Uniform() < 0.3 ? -7.0 : 7.0 + rng.Normal());
    const double ideal[] = {0.3, 0.7}, ideal_swapped[] = {0.7, 0.3};
    const auto r = FairnessDiscrepancy(Pop1d(xs), c, ideal);
    const auto rs = FairnessDiscrepancy(Pop1d(xs), swapped, ideal_swapped);
    EXPECT_GE(r.f, 0.0);
    EXPECT_LE(r.f, std::sqrt(2.0));
    EXPECT_NEAR(r.f, rs.f, 1e-15);
  }
}

TEST(MixtureDiscrepancyTest, AgreesWithSampling) {
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const OracleClassifier c = OracleClassifier::Mixture1d();
  const double exact = MixtureDiscrepancy(ref, c).f;
  RngStream rng(3);
  EXPECT_NEAR(FairnessDiscrepancy(ref.Sample(20000, rng), c).f, exact, 0.01);
  EXPECT_NEAR(MixtureDetectionRate(ref, c), 0.755, 0.01);
}

TEST(RecallTest, SeparatedComponentsGivePerfectRecall) {
  RngStream rng(4);
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const std::vector<Population> pops = {
      Pop1d({-7.0, -6.5, -7.3}, Condition::kAttrA), Pop1d({7.0, 6.1}, Condition::kAttrB)};
  const RecallReport r = Recall(pops, OracleClassifier::Mixture1d());
  EXPECT_EQ(r.per_attribute, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(r.overall, 1.0);
}

TEST(RecallTest, SwappedModesGiveZero) {
  const std::vector<Population> pops = {Pop1d({7.0, 7.0}, Condition::kAttrA),
                                        Pop1d({-7.0}, Condition::kAttrB)};
  const RecallReport r = Recall(pops, OracleClassifier::Mixture1d());
  EXPECT_EQ(r.overall, 0.0);
}

TEST(RecallProperty, OverallIsMeanUnderEqualCounts) {
  RngStream rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a, b;
    for (int k = 0; k < 8; ++k) {
      a.push_back(rng.Uniform() < 0.8 ? -7.0 : 7.0);
      b.push_back(rng.Uniform() < 0.6 ? 7.0 : 0.0);
    }
    const std::vector<Population> pops = {Pop1d(a, Condition::kAttrA),
                                          Pop1d(b, Condition::kAttrB)};
    const RecallReport r = Recall(pops, OracleClassifier::Mixture1d());
    for (double v : r.per_attribute) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_NEAR(r.overall, 0.5 * (r.per_attribute[0] + r.per_attribute[1]), 1e-15);
  }
}

TEST(KlToReferenceTest, IdentityIsZero) {
  const GaussianMixture ref = GaussianMixture::Reference1d();
  EXPECT_NEAR(KlToReference(ref, ref), 0.0, 1e-9);
}

TEST(KlToReferenceTest, UnitGaussiansClosedForm) {
  // (mu1 - mu2)^2 / 2 for unit variances.
  const GaussianMixture a({0.0}, {0.0}, {0.0}), b({0.0}, {1.0}, {0.0});
  EXPECT_NEAR(KlToReference(a, b), 0.5, 1e-9);
}

TEST(KlToReferenceProperty, NonNegativeAndZeroOnSelf) {
  RngStream rng(6);
  for (int i = 0; i < 100; ++i) {
    const GaussianMixture a = RandomMixture1d(3, rng);
    const GaussianMixture b = RandomMixture1d(3, rng);
    EXPECT_GE(KlToReference(a, b), 0.0);
    EXPECT_NEAR(KlToReference(a, a), 0.0, 1e-9);
  }
}

TEST(TrapezoidTest, IntegratesPolynomialsExactly) {
  EXPECT_NEAR(Trapezoid([](double x) { return 2.0 * x + 1.0; }, 0.0, 3.0, 7), 12.0, 1e-14);
  EXPECT_THROW(Trapezoid([](double) { return 0.0; }, 0.0, 1.0, 1), InvalidArgument);
}

TEST(UniformIdealTest, SumsToOne) {
  const auto u = UniformIdeal(4);
  EXPECT_EQ(u, (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(L2Distance(std::vector<double>{0.0, 3.0}, std::vector<double>{4.0, 0.0}), 5.0);
}

}  // namespace
}  // namespace popalign
