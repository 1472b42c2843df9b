// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/diffusion.h"

#include <gtest/gtest.h>

#include <cmath>

#include "popalign/engine.h"

namespace popalign {
namespace {

TEST(NoiseScheduleTest, LinearScheduleInvariants) {
  const NoiseSchedule s = NoiseSchedule::Linear();
  ASSERT_EQ(s.T, 50);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(50), 0.05);
  for (int t = 2; t <= s.T; ++t) {
    EXPECT_LE(s.beta(t - 1), s.beta(t));
    EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
    EXPECT_GT(s.lambda(t), 0.0);
  }
  double prod = 1.0;
  for (int t = 1; t <= s.T; ++t) prod *= 1.0 - s.beta(t);
  EXPECT_NEAR(s.alpha_bar(s.T), prod, 1e-15);
}

TEST(NoiseScheduleTest, RejectsInvalidBetas) {
  EXPECT_THROW(NoiseSchedule::FromBetas({}), InvalidArgument);
  EXPECT_THROW(NoiseSchedule::FromBetas({0.1, 0.05}), InvalidArgument);
  EXPECT_THROW(NoiseSchedule::FromBetas({0.0, 0.1}), InvalidArgument);
  EXPECT_THROW(NoiseSchedule::FromBetas({0.5, 1.0}), InvalidArgument);
}

TEST(ForwardDiffuseTest, NoiselessClosedForm) {
  const NoiseSchedule s = NoiseSchedule::FromBetas({0.75});  // alpha_bar_1 = 0.25
  const std::vector<double> x0 = {2.0, 0.0}, eps = {0.0, 0.0};
  const auto xt = DiffuseWithNoise(s, x0, 1, eps);
  EXPECT_DOUBLE_EQ(xt[0], 1.0);
  EXPECT_DOUBLE_EQ(xt[1], 0.0);
}

TEST(ForwardDiffuseTest, IdentityLimit) {
  const NoiseSchedule s = NoiseSchedule::FromBetas({1e-14});
  RngStream rng(1);
  const std::vector<double> x0 = {1.5, -2.0};
  const auto [xt, eps] = ForwardDiffuse(s, x0, 1, rng);
  EXPECT_NEAR(xt[0], x0[0], 1e-6);
  EXPECT_NEAR(xt[1], x0[1], 1e-6);
}

TEST(ForwardDiffuseTest, StepOutOfRangeThrows) {
  const NoiseSchedule s = NoiseSchedule::Linear();
  RngStream rng(2);
  const std::vector<double> x0 = {0.0, 0.0};
  EXPECT_THROW(ForwardDiffuse(s, x0, 0, rng), InvalidArgument);
  EXPECT_THROW(ForwardDiffuse(s, x0, 51, rng), InvalidArgument);
}

TEST(ForwardDiffuseTest, MonteCarloMean) {
  const NoiseSchedule s = NoiseSchedule::Linear();
  RngStream rng(3);
  const std::vector<double> x0 = {2.0, -1.0};
  const int t = 25, n = 10000;
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [xt, eps] = ForwardDiffuse(s, x0, t, rng);
    m0 += xt[0] / n;
    m1 += xt[1] / n;
  }
  const double sa = std::sqrt(s.alpha_bar(t));
  const double sigma = std::sqrt(1.0 - s.alpha_bar(t));
  EXPECT_NEAR(m0, sa * x0[0], 3.0 * sigma / 100.0);
  EXPECT_NEAR(m1, sa * x0[1], 3.0 * sigma / 100.0);
}

TEST(ForwardDiffuseProperty, VarianceApproachesIdentity) {
  const NoiseSchedule s = NoiseSchedule::FromBetas(std::vector<double>(50, 0.5));
  ASSERT_LT(s.alpha_bar(50), 1e-12);
  RngStream rng(4);
  const std::vector<double> x0 = {3.0, -3.0};
  const int n = 10000;
  double v0 = 0.0, v1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [xt, eps] = ForwardDiffuse(s, x0, 50, rng);
    v0 += xt[0] * xt[0] / n;
    v1 += xt[1] * xt[1] / n;
  }
  EXPECT_NEAR(v0, 1.0, 0.05);
  EXPECT_NEAR(v1, 1.0, 0.05);
}

TEST(DenoiserTest, ZeroWeightsGiveZeroOutput) {
  const Denoiser d(DenoiserShape{}, 50);
  const std::vector<double> x = {0.3, -1.2};
  for (auto c : {std::optional<Condition>(Condition::kAttrA), std::optional<Condition>()}) {
    const auto out = d.Forward(x, 7, c);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
  }
}

TEST(DenoiserTest, ForwardIsDeterministic) {
  RngStream rng(5);
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  const std::vector<double> x = {0.3, -1.2};
  EXPECT_EQ(d.Forward(x, 13, Condition::kNeutral), d.Forward(x, 13, Condition::kNeutral));
}

TEST(DenoiserTest, UnknownConditionAndBadStepThrow) {
  const Denoiser d(DenoiserShape{}, 50);
  const std::vector<double> x = {0.0, 0.0};
  EXPECT_THROW(d.Forward(x, 1, static_cast<Condition>(9)), InvalidArgument);
  EXPECT_THROW(d.Forward(x, 0, Condition::kNeutral), InvalidArgument);
  const std::vector<double> x3 = {0.0, 0.0, 0.0};
  EXPECT_THROW(d.Forward(x3, 1, Condition::kNeutral), InvalidArgument);
}

TEST(DenoiserTest, ParameterCountMatchesLayout) {
  const DenoiserShape s{};
  // embed (vocab + 1) x E, then three dense layers.
  const int expected = (s.vocab + 1) * s.cond_embed + s.input_size() * s.hidden + s.hidden +
                       s.hidden * s.hidden + s.hidden + s.hidden * s.dim + s.dim;
  EXPECT_EQ(s.num_parameters(), expected);
  EXPECT_EQ(Denoiser(s, 50).num_parameters(), expected);
}

// Jacobian column of one output coordinate against central differences.
TEST(DenoiserTest, BackwardMatchesOutputFiniteDifferences) {
  RngStream rng(6);
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  const std::vector<double> x = {0.4, -0.9};
  for (int out = 0; out < 2; ++out) {
    Denoiser::Activations act;
    d.Forward(x, 17, Condition::kAttrB, act);
    std::vector<double> upstream(2, 0.0), grad(d.num_parameters(), 0.0);
    upstream[out] = 1.0;
    d.Backward(act, upstream, grad);
    std::vector<int> coords;
    for (int i = 0; i < 40; ++i) coords.push_back(static_cast<int>(rng.UniformInt(grad.size())));
    Denoiser probe = d;
    const FdReport r = FiniteDiffCheck(
        [&](std::span<const double> q) {
          probe.mutable_params().assign(q.begin(), q.end());
          return probe.Forward(x, 17, Condition::kAttrB)[out];
        },
        d.params(), grad, 1e-5, 1e-5, coords);
    EXPECT_TRUE(r.passed) << "output " << out << " max rel err " << r.max_rel_error;
  }
}

std::vector<DiffusionPair> RandomBatch(const NoiseSchedule& s, int n, RngStream& rng) {
  std::vector<DiffusionPair> batch;
  for (int i = 0; i < n; ++i) {
    Sample x{{rng.Normal(), rng.Normal()}, static_cast<Condition>(rng.UniformInt(4)),
             std::nullopt};
    batch.push_back(MakeDiffusionPair(s, x, +1, rng));
  }
  batch.front().condition = std::nullopt;
  return batch;
}

TEST(DdpmLossTest, GradientMatchesFiniteDifferences) {
  RngStream rng(7);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  const auto batch = RandomBatch(s, 6, rng);
  std::vector<double> grad(d.num_parameters(), 0.0);
  DdpmLoss(d, s, batch, grad);
  std::vector<int> coords;
  for (int i = 0; i < 50; ++i) coords.push_back(static_cast<int>(rng.UniformInt(grad.size())));
  Denoiser probe = d;
  const FdReport r = FiniteDiffCheck(
      [&](std::span<const double> q) {
        probe.mutable_params().assign(q.begin(), q.end());
        return DdpmLoss(probe, s, batch);
      },
      d.params(), grad, 1e-5, 1e-4, coords);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  EXPECT_GT(r.checked, 30);
}

TEST(DdpmLossTest, IdenticalPairsGiveSinglePairGradient) {
  RngStream rng(8);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  const auto one = RandomBatch(s, 1, rng);
  const std::vector<DiffusionPair> four(4, one[0]);
  std::vector<double> g1(d.num_parameters(), 0.0), g4(d.num_parameters(), 0.0);
  const double l1 = DdpmLoss(d, s, one, g1);
  const double l4 = DdpmLoss(d, s, four, g4);
  EXPECT_NEAR(l1, l4, 1e-14 * std::abs(l1));
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g4[i], 1e-13);
}

TEST(DdpmLossTest, ZeroLambdaGivesZeroGradient) {
  RngStream rng(9);
  NoiseSchedule s = NoiseSchedule::Linear();
  s.lambda_weights.assign(s.T, 0.0);
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  const auto batch = RandomBatch(s, 5, rng);
  std::vector<double> grad(d.num_parameters(), 1.0);
  std::fill(grad.begin(), grad.end(), 0.0);
  EXPECT_EQ(DdpmLoss(d, s, batch, grad), 0.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(DdpmLossTest, PerfectDenoiserHasZeroLoss) {
  // A zero network predicts eps = 0 exactly.
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d(DenoiserShape{}, 50);
  DiffusionPair p;
  p.x0 = {1.0, 2.0};
  p.epsilon = {0.0, 0.0};
  p.t = 10;
  const std::vector<DiffusionPair> batch = {p};
  EXPECT_EQ(DdpmLoss(d, s, batch), 0.0);
}

TEST(StepLogRatioTest, IdenticalWeightsGiveExactZero) {
  RngStream rng(10);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  for (const auto& p : RandomBatch(s, 10, rng)) EXPECT_EQ(StepLogRatio(d, d, p, s), 0.0);
}

TEST(StepLogRatioTest, AlgebraicIdentity) {
  // theta predicts eps = 0 exactly; ref's output bias adds v.
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser theta(DenoiserShape{}, 50);
  Denoiser ref(DenoiserShape{}, 50);
  auto& w = ref.mutable_params();
  w[w.size() - 2] = 0.5;
  w[w.size() - 1] = -1.5;
  DiffusionPair p;
  p.x0 = {0.2, 0.1};
  p.epsilon = {0.0, 0.0};
  p.t = 30;
  EXPECT_DOUBLE_EQ(StepLogRatio(theta, ref, p, s), 0.25 + 2.25);
}

TEST(StepLogRatioProperty, ExactAntisymmetry) {
  RngStream rng(11);
  const NoiseSchedule s = NoiseSchedule::Linear();
  for (int k = 0; k < 10; ++k) {
    const Denoiser a = Denoiser::Random(DenoiserShape{}, 50, rng);
    const Denoiser b = Denoiser::Random(DenoiserShape{}, 50, rng);
    for (const auto& p : RandomBatch(s, 10, rng)) {
      EXPECT_EQ(StepLogRatio(a, b, p, s), -StepLogRatio(b, a, p, s));
    }
  }
}

TEST(StepLogRatioTest, GradientMatchesFiniteDifferences) {
  RngStream rng(12);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser theta = Denoiser::Random(DenoiserShape{}, 50, rng);
  const Denoiser ref = Denoiser::Random(DenoiserShape{}, 50, rng);
  const auto p = RandomBatch(s, 1, rng)[0];
  std::vector<double> grad(theta.num_parameters(), 0.0);
  AccumulateGradStepLogRatio(theta, ref, p, s, 1.0, grad);
  std::vector<int> coords;
  for (int i = 0; i < 50; ++i) coords.push_back(static_cast<int>(rng.UniformInt(grad.size())));
  Denoiser probe = theta;
  const FdReport r = FiniteDiffCheck(
      [&](std::span<const double> q) {
        probe.mutable_params().assign(q.begin(), q.end());
        return StepLogRatio(probe, ref, p, s);
      },
      theta.params(), grad, 1e-5, 1e-4, coords);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(SampleCfgTest, ScaleOneIsConditionalSampling) {
  RngStream init(13);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, init);
  RngStream a(14), b(14);
  const Population cfg = SampleCfg(d, s, Condition::kAttrA, 1.0, 20, a);
  const Population cond = SampleConditional(d, s, Condition::kAttrA, 20, b, Condition::kAttrA);
  ASSERT_EQ(cfg.size(), cond.size());
  for (int i = 0; i < cfg.size(); ++i) EXPECT_EQ(cfg.samples[i].x, cond.samples[i].x);
}

TEST(SampleCfgTest, ScaleZeroIsUnconditionalSampling) {
  RngStream init(15);
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, init);
  RngStream a(16), b(16);
  const Population cfg = SampleCfg(d, s, Condition::kAttrB, 0.0, 20, a);
  const Population uncond = SampleConditional(d, s, std::nullopt, 20, b);
  for (int i = 0; i < cfg.size(); ++i) EXPECT_EQ(cfg.samples[i].x, uncond.samples[i].x);
}

TEST(SampleCfgTest, RejectsNegativeScale) {
  const NoiseSchedule s = NoiseSchedule::Linear();
  const Denoiser d(DenoiserShape{}, 50);
  RngStream rng(17);
  EXPECT_THROW(SampleCfg(d, s, Condition::kAttrA, -1.0, 1, rng), InvalidArgument);
}

}  // namespace
}  // namespace popalign
