// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// A small conditional DDPM over low-dimensional points: a linear variance
// schedule, a two-hidden-layer SiLU epsilon-predictor with hand-written
// reverse-mode gradients, and ancestral sampling with classifier-free
// guidance.
//
// Timesteps are 1-based (1 <= t <= T) everywhere in the public API.

#ifndef POPALIGN_DIFFUSION_H_
#define POPALIGN_DIFFUSION_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "popalign/core.h"
#include "popalign/rng.h"

namespace popalign {

struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;        // beta_t, index t-1
  std::vector<double> alpha_bars;   // prod_{s<=t} (1 - beta_s), index t-1
  std::vector<double> lambda_weights;  // per-step loss weights, index t-1

  // betas linearly spaced from beta_1 to beta_T; unit loss weights.
  static NoiseSchedule Linear(int T = 50, double beta_1 = 1e-4, double beta_T = 0.05);
  static NoiseSchedule FromBetas(std::vector<double> betas);

  double beta(int t) const { return betas[t - 1]; }
  double alpha_bar(int t) const { return alpha_bars[t - 1]; }
  double lambda(int t) const { return lambda_weights[t - 1]; }
  void CheckStep(int t) const;
  // Throws unless 0 < beta_1 <= ... <= beta_T < 1 and every lambda > 0.
  void Validate() const;
};

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps with the given noise.
std::vector<double> DiffuseWithNoise(const NoiseSchedule& schedule,
                                     std::span<const double> x0, int t,
                                     std::span<const double> eps);
// Draws eps ~ N(0, I) and returns (x_t, eps).
std::pair<std::vector<double>, std::vector<double>> ForwardDiffuse(
    const NoiseSchedule& schedule, std::span<const double> x0, int t, RngStream& rng);

struct DenoiserShape {
  int dim = 2;
  int hidden = 64;
  int time_features = 8;
  int cond_embed = 8;
  // Condition vocabulary; one extra row of the embedding table is the null
  // token used for unconditional (guidance) passes.
  int vocab = kNumConditions;

  int input_size() const { return dim + time_features + cond_embed; }
  int num_parameters() const;
  friend bool operator==(const DenoiserShape&, const DenoiserShape&) = default;
};

// Epsilon-predictor eps_theta(x_t, t, c):
//   [x_t | sinusoidal(t/T) | embed(c)] -> H SiLU -> H SiLU -> d.
// All weights live in one flat vector laid out as
//   [embed (vocab+1) x E | W1 H x in | b1 | W2 H x H | b2 | W3 d x H | b3].
class Denoiser {
 public:
  // Buffers from a forward pass, reused by Backward.
  struct Activations {
    std::vector<double> input, h1_pre, h1, h2_pre, h2, out;
    int token = 0;
  };

  Denoiser(DenoiserShape shape, int T);
  // Scaled-Gaussian initialization; the output layer starts small.
  static Denoiser Random(DenoiserShape shape, int T, RngStream& rng);

  const DenoiserShape& shape() const { return shape_; }
  int T() const { return T_; }
  int num_parameters() const { return static_cast<int>(params_.size()); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  // nullopt selects the null token.
  std::vector<double> Forward(std::span<const double> x_t, int t,
                              std::optional<Condition> c) const;
  void Forward(std::span<const double> x_t, int t, std::optional<Condition> c,
               Activations& act) const;
  // Adds d(upstream . out)/d(params) into `grad`.
  void Backward(const Activations& act, std::span<const double> upstream,
                std::span<double> grad) const;

  void Write(std::ostream& os) const;
  static Denoiser Read(std::istream& is);

  friend bool operator==(const Denoiser&, const Denoiser&) = default;

 private:
  struct Offsets {
    int embed, w1, b1, w2, b2, w3, b3;
  };
  Offsets offsets() const;
  int Token(std::optional<Condition> c) const;

  DenoiserShape shape_;
  int T_;
  std::vector<double> params_;
};

// One training item for the diffusion objectives: a clean sample, its noise
// draw and timestep, and its winner (+1) / loser (-1) role.
struct DiffusionPair {
  std::vector<double> x0;
  std::vector<double> epsilon;
  int t = 1;
  std::optional<Condition> condition = Condition::kNeutral;
  int gamma = +1;
};

// Draws (eps, t) for a clean sample.
DiffusionPair MakeDiffusionPair(const NoiseSchedule& schedule, const Sample& x0, int gamma,
                                RngStream& rng);

// Delta = -(||eps - eps_theta||^2 - ||eps - eps_ref||^2), the per-step
// log-ratio in epsilon-error form with unit weight.
double StepLogRatio(const Denoiser& theta, const Denoiser& ref, const DiffusionPair& pair,
                    const NoiseSchedule& schedule);
// Adds scale * dDelta/dtheta into `grad`; returns Delta.
double AccumulateGradStepLogRatio(const Denoiser& theta, const Denoiser& ref,
                                  const DiffusionPair& pair, const NoiseSchedule& schedule,
                                  double scale, std::span<double> grad);

// mean_i lambda(t_i) ||eps_i - eps_theta(x_t, t_i, c_i)||^2. If `grad` is
// non-empty the gradient of that mean is added into it.
double DdpmLoss(const Denoiser& model, const NoiseSchedule& schedule,
                std::span<const DiffusionPair> batch, std::span<double> grad = {});

// Ancestral sampling with eps_hat = (1 - s) eps_null + s eps_cond. The
// weighting is written so that s = 1 and s = 0 reproduce the plain
// conditional and unconditional predictions bit for bit.
Population SampleCfg(const Denoiser& model, const NoiseSchedule& schedule,
                     Condition condition, double guidance_scale, int n, RngStream& rng);
// Plain ancestral sampling; nullopt samples unconditionally. Returned
// samples are labelled with `label`.
Population SampleConditional(const Denoiser& model, const NoiseSchedule& schedule,
                             std::optional<Condition> condition, int n, RngStream& rng,
                             Condition label = Condition::kNeutral);

}  // namespace popalign

#endif  // POPALIGN_DIFFUSION_H_
