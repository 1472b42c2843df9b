// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/experiments.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "popalign/io.h"

namespace popalign {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("popalign_test_" + name);
  fs::remove_all(dir);
  return dir;
}

int ExitCode(int status) {
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

TEST(GitBlobSha1Test, MatchesGitHashObject) {
  // `git hash-object` of the empty file and of "hello\n".
  EXPECT_EQ(GitBlobSha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(GitBlobSha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(CatalogTest, NamesAndDefaults) {
  for (const std::string& name : ExperimentNames()) {
    EXPECT_TRUE(IsExperimentName(name));
    EXPECT_NO_THROW(DefaultConfigFor(name).Validate());
  }
  EXPECT_FALSE(IsExperimentName("repro-2d"));
  const AlignConfig one_d = DefaultConfigFor("repro-1d");
  EXPECT_EQ(one_d.beta, 0.5);
  EXPECT_EQ(one_d.alpha, 0.5);
  EXPECT_EQ(one_d.population_size, 1);
  EXPECT_EQ(one_d.learning_rate, 0.1);
  EXPECT_EQ(one_d.steps, 2000);
  EXPECT_EQ(one_d.optimizer, OptimizerKind::kSgd);
  EXPECT_EQ(DefaultConfigFor("diffusion-toy"), DefaultDiffusionConfig());
}

TEST(IdentityChecksTest, AllHold) {
  for (const CheckResult& c : IdentityChecks()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Make1dPairsTest, DeterministicAndBalanced) {
  AlignConfig config = Default1dConfig();
  Track1dOptions opts;
  opts.pairs = 50;
  const auto a = Make1dPairs(config, opts);
  const auto b = Make1dPairs(config, opts);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 50u);
  int g1 = 0;
  for (const auto& p : a) g1 += p.winner.samples[0].attribute == 0;
  EXPECT_EQ(g1, 25);
  config.seed = 1;
  EXPECT_NE(Make1dPairs(config, opts), a);
}

TEST(RunExperimentTest, RejectsUnknownOptionKey) {
  ExperimentSpec spec{"verify", DefaultConfigFor("verify"), {{"bogus", "1"}}, TempDir("bogus")};
  std::ostringstream log;
  EXPECT_THROW(RunExperiment(spec, log), InvalidArgument);
}

TEST(RunExperimentTest, Repro1dArtifactsAreReproducible) {
  const fs::path a = TempDir("repro_a"), b = TempDir("repro_b");
  ExperimentSpec spec{"repro-1d", DefaultConfigFor("repro-1d"), {}, a};
  std::ostringstream log;
  EXPECT_EQ(RunExperiment(spec, log), 0) << log.str();
  spec.out_dir = b;
  EXPECT_EQ(RunExperiment(spec, log), 0);
  for (const char* file :
       {"trace.csv", "trace_sft.csv", "dataset.txt", "manifest.txt", "checks.csv", "report.csv"}) {
    ASSERT_TRUE(fs::exists(a / file)) << file;
    EXPECT_EQ(ReadFile(a / file), ReadFile(b / file)) << file;
  }
  std::ifstream trace(a / "trace.csv");
  const TraceLog log_a = TraceLog::ReadCsv(trace);
  ASSERT_FALSE(log_a.empty());
  EXPECT_EQ(log_a.rows().back().iter, 2000);
  fs::remove_all(a);
  fs::remove_all(b);
}

#ifdef POPALIGN_CLI_PATH
TEST(CliTest, ExitCodes) {
  const std::string cli = POPALIGN_CLI_PATH;
  EXPECT_EQ(ExitCode(std::system((cli + " list > /dev/null").c_str())), 0);
  EXPECT_EQ(ExitCode(std::system((cli + " run no-such-exp > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(ExitCode(std::system((cli + " run verify --beta -1 > /dev/null 2>&1").c_str())), 2);

  const fs::path dir = TempDir("cli");
  fs::create_directories(dir);
  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "beta = 0.5\nwarp_drive = 9\n";
  EXPECT_EQ(ExitCode(std::system(
                (cli + " run verify --config " + bad.string() + " > /dev/null 2>&1").c_str())),
            2);
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace popalign
