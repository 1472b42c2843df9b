// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment catalog shared by the CLI and the acceptance binary. Each
// experiment is a plain function returning its measurements plus the named
// checks it asserts; RunExperiment adds artifact writing on top.

#ifndef POPALIGN_EXPERIMENTS_H_
#define POPALIGN_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popalign/core.h"
#include "popalign/datagen.h"
#include "popalign/diffusion.h"
#include "popalign/engine.h"
#include "popalign/gmm.h"
#include "popalign/metrics.h"
#include "popalign/popmcmc.h"

namespace popalign {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

bool AllPassed(std::span<const CheckResult> checks);

// ---------------------------------------------------------------------------
// 1D mixture track.

struct Track1dOptions {
  int pairs = 1000;
  double tau = 0.8;
};

// beta 0.5, alpha 0.5, N 1, full-batch gradient descent at lr 0.1 for 2000
// steps.
AlignConfig Default1dConfig();

// Preference pairs from the reference model: winners from G1/G3, losers from
// the full model, both classifier-filtered. Seeded from config.seed.
std::vector<PreferencePair> Make1dPairs(const AlignConfig& config, const Track1dOptions& opts);

struct Run1d {
  std::string label;
  ObjectiveKind kind = ObjectiveKind::kPopAlign;
  AlignConfig config;
  MixtureTrainResult result;
  std::vector<double> weights;
  double discrepancy = 0.0;  // quadrature, uniform ideal over {G1, G3}
  double kl = 0.0;           // KL(theta || ref)
  double detection = 0.0;    // accepted probability mass
};

Run1d TrainRun1d(const std::string& label, ObjectiveKind kind, const AlignConfig& config,
                 std::span<const PreferencePair> pairs, const Track1dOptions& opts);

struct Repro1dReport {
  std::vector<PreferencePair> pairs;
  Run1d popalign;
  Run1d sft;
  std::vector<CheckResult> checks;
};
Repro1dReport RunRepro1d(const AlignConfig& config, const Track1dOptions& opts = {});

struct SweepReport {
  std::string parameter;
  std::vector<double> values;
  std::vector<Run1d> runs;
  std::vector<CheckResult> checks;
};
SweepReport RunBetaSweep(const AlignConfig& base, std::span<const double> betas,
                         const Track1dOptions& opts = {});
SweepReport RunAlphaSweep(const AlignConfig& base, std::span<const double> alphas,
                          const Track1dOptions& opts = {});

// ---------------------------------------------------------------------------
// Diffusion track.

struct DiffusionToyOptions {
  int pretrain_steps = 6000;
  int pretrain_batch = 128;
  double pretrain_lr = 2e-3;
  // World coordinates are divided by this before entering the model.
  double data_scale = 4.0;
  int pairs = 400;
  int eval_samples = 1000;
  // A ring sample counts when its radius is within this of 6.
  double ring_tolerance = 1.0;
  double tau = 0.8;
};

AlignConfig DefaultDiffusionConfig();

struct DiffusionSnapshot {
  DiscrepancyReport neutral;
  double ring_mass = 0.0;
  RecallReport recall;
  Population neutral_samples;
  Population ring_samples;
};

DiffusionSnapshot EvaluateDenoiser(const Denoiser& model, const NoiseSchedule& schedule,
                                   const DiffusionToyOptions& opts, std::uint64_t seed,
                                   double guidance_scale = 1.0);

DenoiserTrainResult PretrainToy(const DiffusionToyOptions& opts, std::uint64_t seed,
                                const NoiseSchedule& schedule);

struct DiffusionToyReport {
  DenoiserTrainResult pretrain;
  DenoiserTrainResult aligned;
  std::vector<PreferencePair> pairs;
  DiffusionSnapshot before;
  DiffusionSnapshot after;
  std::vector<CheckResult> checks;
};
DiffusionToyReport RunDiffusionToy(const AlignConfig& config,
                                   const DiffusionToyOptions& opts = {});

struct CfgReport {
  std::vector<double> scales;
  std::vector<double> discrepancy;
  std::vector<CheckResult> checks;
};
CfgReport RunCfgAblation(const Denoiser& pretrained, const NoiseSchedule& schedule,
                         std::span<const double> scales, const DiffusionToyOptions& opts,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Population refinement.

struct McmcOptions {
  int seeds = 100;
  int population_size = 10;
  int max_steps = 2000;
  std::uint64_t seed = 0;
};

struct McmcReport {
  int runs = 0;
  int balanced = 0;
  int monotone = 0;
  std::vector<int> steps;
  std::vector<double> final_f;
  RefineResult example;
  std::vector<CheckResult> checks;
};
McmcReport RunMcmcDemo(const McmcOptions& opts);

// ---------------------------------------------------------------------------
// Oracle suite.

struct VerifyOptions {
  int fd_probes = 100;
  int jensen_instances = 200;
  std::uint64_t seed = 0;
};

// Every preference loss at theta = ref, balanced discrepancy, antisymmetry.
std::vector<CheckResult> IdentityChecks();
// Random mixture instances over N in {1,2,4,8}, beta in {0.1,0.5,2}.
JensenReport JensenCriterion(int instances, std::uint64_t seed);
// Finite-difference probes of every mixture and diffusion loss.
std::vector<CheckResult> GradientOracleChecks(int probes, std::uint64_t seed);

struct VerifyReport {
  JensenReport jensen;
  std::vector<CheckResult> checks;
};
VerifyReport RunVerify(const VerifyOptions& opts);

// ---------------------------------------------------------------------------
// CLI plumbing.

const std::vector<std::string>& ExperimentNames();
bool IsExperimentName(std::string_view name);
AlignConfig DefaultConfigFor(std::string_view name);
// Experiment option keys that may appear in a config file next to the
// AlignConfig keys.
const std::vector<std::string>& ExperimentOptionKeys();

struct ExperimentSpec {
  std::string name;
  AlignConfig config;
  std::map<std::string, std::string> options;
  std::filesystem::path out_dir;
};

// Runs the experiment, writes its artifacts, prints a summary to `log` and
// returns 0 when every check passed, 1 otherwise.
int RunExperiment(const ExperimentSpec& spec, std::ostream& log);

// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string GitBlobSha1(std::string_view content);

}  // namespace popalign

#endif  // POPALIGN_EXPERIMENTS_H_
