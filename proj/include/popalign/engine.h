// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Optimizers, training loops for every objective on both model families,
// and the numerical verification oracles (finite differences, Jensen bound).

#ifndef POPALIGN_ENGINE_H_
#define POPALIGN_ENGINE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popalign/core.h"
#include "popalign/datagen.h"
#include "popalign/diffusion.h"
#include "popalign/gmm.h"
#include "popalign/rng.h"

namespace popalign {

// ---------------------------------------------------------------------------
// Optimizers.

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void Step(std::span<double> params, std::span<const double> grad) = 0;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

// Adam with decoupled weight decay.
class Adam : public Optimizer {
 public:
  Adam(int num_params, double lr, double weight_decay = 0.0, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  void Step(std::span<double> params, std::span<const double> grad) override;
  const AdamState& state() const { return state_; }

 private:
  AdamState state_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
};

// Plain gradient descent with decoupled weight decay.
class Sgd : public Optimizer {
 public:
  Sgd(double lr, double weight_decay = 0.0) : lr_(lr), weight_decay_(weight_decay) {}
  void Step(std::span<double> params, std::span<const double> grad) override;

 private:
  double lr_, weight_decay_;
};

std::unique_ptr<Optimizer> MakeOptimizer(const AlignConfig& config, int num_params);

// ---------------------------------------------------------------------------
// Training.

enum class ObjectiveKind { kPopAlign, kSft, kDpo, kPopulationDpo, kDiffusionDpo };

std::string ObjectiveName(ObjectiveKind kind);
ObjectiveKind ParseObjective(const std::string& name);

struct TrainOptions {
  // Classifier for the logged discrepancy and the detection-collapse check.
  const OracleClassifier* classifier = nullptr;
  // A run counts as diverged when the detected fraction of model samples
  // falls below this multiple of the reference model's.
  double collapse_ratio = 0.5;
  // Converged: relative loss change below `converge_tol` over
  // `converge_window` steps. The run stops there when `stop_on_convergence`.
  int converge_window = 100;
  double converge_tol = 1e-6;
  bool stop_on_convergence = true;
  // Quadrature nodes for the mixture discrepancy logged in the trace.
  int trace_nodes = 4001;
  // Diffusion track: neutral samples drawn for each logged discrepancy.
  int eval_samples = 200;
  double data_scale = 1.0;
};

struct TrainStatus {
  bool converged = false;
  bool diverged = false;
  std::string reason;
  int steps_run = 0;
};

struct MixtureTrainResult {
  GaussianMixture model = GaussianMixture::Reference1d();
  TraceLog trace;
  TrainStatus status;
};

// Trains a mixture from `init` against the frozen `ref`. kPopAlign,
// kPopulationDpo, kDpo (sample i of the winner set against sample i of the
// loser set) and kSft (winner NLL) are supported. The trace logs the loss,
// the quadrature discrepancy (NaN without a classifier) and the weights.
MixtureTrainResult TrainMixture(ObjectiveKind kind, const GaussianMixture& init,
                                const GaussianMixture& ref,
                                std::span<const PreferencePair> pairs,
                                const AlignConfig& config, const TrainOptions& options = {});

struct PretrainOptions {
  int steps = 6000;
  int batch_size = 128;
  double learning_rate = 2e-3;
  double condition_dropout = 0.1;
  std::uint64_t seed = 0;
  int log_every = 100;
  // Training data are divided by this before entering the model.
  double data_scale = 1.0;
};

struct DenoiserTrainResult {
  Denoiser model{DenoiserShape{}, 50};
  TraceLog trace;
  TrainStatus status;
};

// Fits the epsilon-predictor on fresh draws from `world`, cycling uniformly
// through every condition, with condition dropout for guidance.
DenoiserTrainResult PretrainDenoiser(const Generator& world, const NoiseSchedule& schedule,
                                     const DenoiserShape& shape,
                                     const PretrainOptions& options);

// Aligns a denoiser on preference pairs given in world coordinates
// (divided by options.data_scale before use). kPopAlign, kSft and
// kDiffusionDpo are supported; every step draws fresh (t, eps) per item.
DenoiserTrainResult AlignDenoiser(ObjectiveKind kind, const Denoiser& init,
                                  const Denoiser& ref, const NoiseSchedule& schedule,
                                  std::span<const PreferencePair> pairs,
                                  const AlignConfig& config, const TrainOptions& options = {});

// ---------------------------------------------------------------------------
// Verification oracles.

struct FdReport {
  double max_rel_error = 0.0;
  int worst_index = -1;
  int checked = 0;
  int skipped = 0;  // coordinates with |g| <= 1e-10
  bool passed = false;
};

using LossClosure = std::function<double(std::span<const double>)>;

// Central differences on `coords` (all coordinates when empty) against the
// analytic gradient. Relative error is |a - n| / max(|a|, |n|).
FdReport FiniteDiffCheck(const LossClosure& loss, std::span<const double> params,
                         std::span<const double> analytic, double h, double tol,
                         std::span<const int> coords = {});

struct JensenValues {
  double population;  // log sigmoid(beta (sum lr_w - sum lr_l))
  double bound;       // mean_i log sigmoid(gamma_i beta' (lr_i - mu))
  double gap() const { return population - bound; }
};

// Both objectives in maximization form for one instance, beta' = 2 N beta.
JensenValues JensenPair(std::span<const double> lr_w, std::span<const double> lr_l,
                        double beta, double mu);

struct JensenReport {
  int instances = 0;
  int evaluations = 0;
  int violations = 0;
  double min_gap = 0.0;
  double max_gap = 0.0;
};

// Draws populations of size config.population_size from theta (winners) and
// ref (losers) and compares the two objectives at beta = config.beta with
// mu = 0 and mu = the batch mean.
JensenReport JensenBoundCheck(const GaussianMixture& theta, const GaussianMixture& ref,
                              int instances, const AlignConfig& config, RngStream& rng,
                              double slack = 1e-9);

// Random K=3 instances cycling through N in `ns` and beta in `betas`, each
// with its own random (theta, ref) pair.
JensenReport RandomJensenSweep(int instances, std::span<const int> ns,
                               std::span<const double> betas, RngStream& rng,
                               double slack = 1e-9);

// A random 1D mixture with K components: logits ~ N(0,1), means ~ U[-8, 8],
// log-stds ~ U[-0.5, 0.5].
GaussianMixture RandomMixture1d(int k, RngStream& rng);

}  // namespace popalign

#endif  // POPALIGN_ENGINE_H_
