// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// popalign command-line entry point.
//
//   popalign run <experiment> [--seed S] [--beta B] [--alpha A] [--n N]
//                [--steps K] [--lr L] [--config FILE] [--out DIR]
//   popalign list
//
// Settings resolve as experiment defaults, then the config file, then flags.
// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or input error.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "popalign/experiments.h"
#include "popalign/io.h"

namespace {

constexpr int kUsageError = 2;

struct RunFlags {
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<int> n;
  std::optional<int> steps;
  std::optional<double> lr;
  std::string config_path;
  std::string out_dir;
};

popalign::ExperimentSpec Resolve(const RunFlags& flags) {
  popalign::ExperimentSpec spec;
  spec.name = flags.experiment;
  spec.config = popalign::DefaultConfigFor(flags.experiment);
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw popalign::InvalidArgument("cannot open config file " + flags.config_path);
    std::map<std::string, std::string> kv = popalign::ParseKeyValues(in);
    const auto& option_keys = popalign::ExperimentOptionKeys();
    for (auto it = kv.begin(); it != kv.end();) {
      if (std::find(option_keys.begin(), option_keys.end(), it->first) != option_keys.end()) {
        spec.options[it->first] = it->second;
        it = kv.erase(it);
      } else {
        ++it;
      }
    }
    popalign::ApplyConfig(kv, spec.config);
  }
  if (flags.seed) spec.config.seed = *flags.seed;
  if (flags.beta) spec.config.beta = *flags.beta;
  if (flags.alpha) spec.config.alpha = *flags.alpha;
  if (flags.n) spec.config.population_size = *flags.n;
  if (flags.steps) spec.config.steps = *flags.steps;
  if (flags.lr) spec.config.learning_rate = *flags.lr;
  spec.config.Validate();
  spec.out_dir = flags.out_dir.empty() ? "runs/" + flags.experiment : flags.out_dir;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-level preference alignment experiments"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run->add_option("experiment", flags.experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(popalign::ExperimentNames()));
  run->add_option("--seed", flags.seed, "Root RNG seed");
  run->add_option("--beta", flags.beta, "KL regularization strength");
  run->add_option("--alpha", flags.alpha, "Normalizer mixing weight in [0, 1]");
  run->add_option("--n", flags.n, "Population size N");
  run->add_option("--steps", flags.steps, "Optimizer steps");
  run->add_option("--lr", flags.lr, "Learning rate");
  run->add_option("--config", flags.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  run->add_option("--out", flags.out_dir, "Output directory (default runs/<experiment>)");

  CLI::App* list = app.add_subcommand("list", "List experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (list->parsed()) {
    for (const std::string& name : popalign::ExperimentNames()) std::cout << name << '\n';
    return 0;
  }

  try {
    const popalign::ExperimentSpec spec = Resolve(flags);
    std::cout << "running " << spec.name << " -> " << spec.out_dir.string() << '\n';
    return popalign::RunExperiment(spec, std::cout);
  } catch (const popalign::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number (" << e.what() << ")\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
