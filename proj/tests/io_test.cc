// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/io.h"

#include <gtest/gtest.h>

#include <sstream>

#include "popalign/datagen.h"
#include "popalign/diffusion.h"
#include "popalign/gmm.h"

namespace popalign {
namespace {

std::vector<PreferencePair> RandomPairs(int pairs, int n, int dim, RngStream& rng) {
  std::vector<PreferencePair> out;
  for (int p = 0; p < pairs; ++p) {
    const auto c = static_cast<Condition>(rng.UniformInt(kNumConditions));
    Population w{c, {}}, l{c, {}};
    for (int i = 0; i < n; ++i) {
      Sample a{{}, c, std::nullopt}, b{{}, c, std::nullopt};
      for (int d = 0; d < dim; ++d) {
        a.x.push_back(rng.Normal() * 1e3);
        b.x.push_back(rng.Normal() * 1e-3);
      }
      if (rng.Uniform() < 0.5) a.attribute = static_cast<int>(rng.UniformInt(3));
      w.samples.push_back(a);
      l.samples.push_back(b);
    }
    out.push_back(PreferencePair::Make(w, l));
  }
  return out;
}

TEST(DatasetIoTest, PairsRoundTripFieldIdentical) {
  RngStream rng(1);
  for (int dim : {1, 2, 3}) {
    const auto pairs = RandomPairs(20, 3, dim, rng);
    std::stringstream ss;
    WritePairs(ss, pairs);
    EXPECT_EQ(ReadPairs(ss), pairs);
  }
}

TEST(DatasetIoTest, PopulationRoundTrip) {
  RngStream rng(2);
  const Population pop = GaussianMixture::Reference1d().Sample(50, rng, Condition::kAttrB);
  std::stringstream ss;
  WritePopulation(ss, pop);
  EXPECT_EQ(ReadPopulation(ss), pop);
}

TEST(DatasetIoTest, MixedDatasetRoundTrip) {
  RngStream rng(3);
  Dataset d;
  d.pairs = RandomPairs(4, 2, 2, rng);
  d.populations.push_back(GaussianMixture::Reference1d().Sample(5, rng));
  std::stringstream ss;
  WriteDataset(ss, d);
  EXPECT_EQ(ReadDataset(ss), d);
}

TEST(DatasetIoTest, GammaLabelsAreExplicit) {
  RngStream rng(4);
  const auto pairs = RandomPairs(1, 2, 1, rng);
  std::stringstream ss;
  WritePairs(ss, pairs);
  std::string line;
  int plus = 0, minus = 0;
  while (std::getline(ss, line)) {
    if (line.rfind("+1 ", 0) == 0) ++plus;
    if (line.rfind("-1 ", 0) == 0) ++minus;
  }
  EXPECT_EQ(plus, 2);
  EXPECT_EQ(minus, 2);
}

TEST(DatasetIoTest, RejectsMalformedInput) {
  std::stringstream bad_header("not a dataset\n");
  EXPECT_THROW(ReadPairs(bad_header), InvalidArgument);
  std::stringstream truncated(
      "# popalign-dataset v1\npair 0 condition neutral n 2 dim 1\n+1 - 1.0\n");
  EXPECT_THROW(ReadPairs(truncated), InvalidArgument);
  std::stringstream wrong_gamma(
      "# popalign-dataset v1\npair 0 condition neutral n 1 dim 1\n-1 - 1.0\n+1 - 2.0\n");
  EXPECT_THROW(ReadPairs(wrong_gamma), InvalidArgument);
}

TEST(ConfigIoTest, ParsesKeyValuesWithComments) {
  std::stringstream ss("# comment\nbeta = 0.25\n\n  alpha=0.75  # trailing\nn = 4\n");
  const auto kv = ParseKeyValues(ss);
  AlignConfig c;
  ApplyConfig(kv, c);
  EXPECT_EQ(c.beta, 0.25);
  EXPECT_EQ(c.alpha, 0.75);
  EXPECT_EQ(c.population_size, 4);
}

TEST(ConfigIoTest, UnknownKeyAndBadValueRejected) {
  AlignConfig c;
  EXPECT_THROW(ApplyConfig({{"betta", "0.5"}}, c), InvalidArgument);
  EXPECT_THROW(ApplyConfig({{"beta", "half"}}, c), InvalidArgument);
  EXPECT_THROW(ApplyConfig({{"optimizer", "rmsprop"}}, c), InvalidArgument);
}

TEST(ConfigIoTest, WriteThenApplyRoundTrips) {
  AlignConfig c;
  c.beta = 0.123456789;
  c.alpha = 0.3;
  c.population_size = 7;
  c.learning_rate = 3e-4;
  c.steps = 17;
  c.batch_size = 5;
  c.seed = 18446744073709551615ull;
  c.beta_prime_mode = BetaPrimeMode::kExplicit;
  c.beta_prime_value = 2.5;
  c.optimizer = OptimizerKind::kSgd;
  c.weight_decay = 0.01;
  c.log_every = 3;
  std::stringstream ss;
  WriteConfig(ss, c);
  AlignConfig back;
  ApplyConfig(ParseKeyValues(ss), back);
  EXPECT_EQ(back, c);
}

TEST(CheckpointIoTest, MixtureRoundTrip) {
  RngStream rng(5);
  const GaussianMixture m({0.3, -1.0}, {1.5, -2.0, 0.25, 8.0}, {0.1, -0.2}, 2);
  std::stringstream ss;
  m.Write(ss);
  EXPECT_EQ(GaussianMixture::Read(ss), m);
}

TEST(CheckpointIoTest, DenoiserRoundTrip) {
  RngStream rng(6);
  const Denoiser d = Denoiser::Random(DenoiserShape{}, 50, rng);
  std::stringstream ss;
  d.Write(ss);
  EXPECT_EQ(Denoiser::Read(ss), d);
}

}  // namespace
}  // namespace popalign
