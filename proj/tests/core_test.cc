// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/core.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "popalign/rng.h"

namespace popalign {
namespace {

TEST(RngTest, SameSeedGivesIdenticalUniforms) {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.Uniform(), b.Uniform());
}

TEST(RngTest, DifferentSeedsDiffer) {
  RngStream a(1), b(2);
  EXPECT_NE(a.Uniform(), b.Uniform());
}

TEST(RngTest, SplitStreamsAreDisjoint) {
  RngStream root(9);
  auto [left, right] = root.SplitPair();
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(left.NextU64());
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(seen.count(right.NextU64()), 0u);
}

TEST(RngTest, PhiloxKnownAnswer) {
  // Random123 known-answer vector for philox4x32-10, all-zero counter and key.
  const auto out = Philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(RngTest, UniformRangesAndMoments) {
  RngStream rng(3);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = rng.Normal();
    sum += z;
    sum_sq += z * z;
  }
  // Standard errors are 1/sqrt(n) and sqrt(2/n).
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sum_sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(RngTest, UniformOpenNeverZero) {
  RngStream rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.UniformOpen();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngTest, CategoricalFrequencies) {
  RngStream rng(5);
  const std::vector<double> w = {1.0, 3.0, 0.0, 4.0};
  std::vector<int> counts(4, 0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) ++counts[rng.Categorical(w)];
  EXPECT_EQ(counts[2], 0);
  EXPECT_NEAR(counts[0] / double(n), 0.125, 0.01);
  EXPECT_NEAR(counts[1] / double(n), 0.375, 0.01);
  EXPECT_NEAR(counts[3] / double(n), 0.5, 0.01);
}

TEST(RngTest, UniformIntInRange) {
  RngStream rng(6);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.UniformInt(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(ConditionTest, NamesRoundTrip) {
  for (int i = 0; i < kNumConditions; ++i) {
    const auto c = static_cast<Condition>(i);
    EXPECT_EQ(ParseCondition(ConditionName(c)), c);
  }
  EXPECT_THROW(ParseCondition("bogus"), InvalidArgument);
}

Population Pop(Condition c, std::vector<double> xs) {
  Population p{c, {}};
  for (double x : xs) p.samples.push_back({{x}, c, std::nullopt});
  return p;
}

TEST(PopulationTest, ValidateRejectsBrokenInvariants) {
  EXPECT_NO_THROW(Pop(Condition::kNeutral, {1.0, 2.0}).Validate());
  EXPECT_THROW(Pop(Condition::kNeutral, {}).Validate(), InvalidArgument);
  Population mixed = Pop(Condition::kNeutral, {1.0, 2.0});
  mixed.samples[1].condition = Condition::kAttrA;
  EXPECT_THROW(mixed.Validate(), InvalidArgument);
  Population ragged = Pop(Condition::kNeutral, {1.0, 2.0});
  ragged.samples[1].x.push_back(3.0);
  EXPECT_THROW(ragged.Validate(), InvalidArgument);
  Population nan = Pop(Condition::kNeutral, {std::nan("")});
  EXPECT_THROW(nan.Validate(), InvalidArgument);
}

TEST(PreferencePairTest, MakeChecksConditionAndSize) {
  EXPECT_NO_THROW(
      PreferencePair::Make(Pop(Condition::kNeutral, {1}), Pop(Condition::kNeutral, {2})));
  EXPECT_THROW(
      PreferencePair::Make(Pop(Condition::kNeutral, {1}), Pop(Condition::kAttrA, {2})),
      InvalidArgument);
  EXPECT_THROW(
      PreferencePair::Make(Pop(Condition::kNeutral, {1}), Pop(Condition::kNeutral, {2, 3})),
      InvalidArgument);
}

TEST(AlignConfigTest, BetaPrimeAutoIsTwoNTBeta) {
  AlignConfig c;
  c.beta = 0.5;
  c.population_size = 4;
  EXPECT_EQ(c.BetaPrime(1), 4.0);
  EXPECT_EQ(c.BetaPrime(50), 200.0);
  c.beta_prime_mode = BetaPrimeMode::kExplicit;
  c.beta_prime_value = 3.25;
  EXPECT_EQ(c.BetaPrime(50), 3.25);
}

TEST(AlignConfigTest, ValidateRejectsOutOfRange) {
  AlignConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.beta = 0.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = AlignConfig{};
  c.alpha = 1.5;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = AlignConfig{};
  c.population_size = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = AlignConfig{};
  c.learning_rate = -1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(FormatDoubleTest, RoundTripsExactly) {
  RngStream rng(8);
  const double specials[] = {0.0, -0.0, 1e-300, 5e-324, 1.0 / 3.0, -7.25, 1e300};
  for (double v : specials) EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.Normal() * std::pow(10.0, rng.Normal() * 10);
    EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_TRUE(std::isnan(ParseDouble(FormatDouble(std::nan("")))));
  EXPECT_THROW(ParseDouble("1.5x"), InvalidArgument);
}

TEST(TraceLogTest, IterationsMustIncrease) {
  TraceLog log({"w1"});
  log.Append({0, 1.0, 0.5, {0.2}, 0.0});
  EXPECT_THROW(log.Append({0, 1.0, 0.5, {0.2}, 0.0}), InvalidArgument);
  EXPECT_THROW(log.Append({5, 1.0, 0.5, {0.2, 0.3}, 0.0}), InvalidArgument);
}

TEST(TraceLogTest, CsvRoundTripAndHeader) {
  TraceLog log({"w1", "w2"});
  log.Append({0, 0.6931471805599453, 0.1, {0.25, 0.75}, 0.0});
  log.Append({50, 1.0 / 3.0, std::nan(""), {1e-17, 1.0}, 0.0});
  std::stringstream ss;
  log.WriteCsv(ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,loss,discrepancy,w1,w2");
  const TraceLog back = TraceLog::ReadCsv(ss);
  ASSERT_EQ(back.rows().size(), 2u);
  EXPECT_EQ(back.extra_columns(), log.extra_columns());
  EXPECT_EQ(back.rows()[0], log.rows()[0]);
  EXPECT_EQ(back.rows()[1].loss, log.rows()[1].loss);
  EXPECT_TRUE(std::isnan(back.rows()[1].discrepancy));
}

}  // namespace
}  // namespace popalign
