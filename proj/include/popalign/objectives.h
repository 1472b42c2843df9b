// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Preference objectives. Each objective has two layers:
//
//  * a pure function of per-item log-ratios returning the loss and its
//    derivative with respect to every log-ratio, and
//  * a backend-generic wrapper that computes the log-ratios with a model
//    backend and chains the derivative into a parameter gradient.
//
// Every function returns a loss to minimize (the negated objective).

#ifndef POPALIGN_OBJECTIVES_H_
#define POPALIGN_OBJECTIVES_H_

#include <concepts>
#include <span>
#include <vector>

#include "popalign/core.h"
#include "popalign/diffusion.h"
#include "popalign/gmm.h"

namespace popalign {

// log(sigmoid(z)) without overflow for large |z|.
double LogSigmoid(double z);
double Sigmoid(double z);

struct LossAndGrad {
  double loss = 0.0;
  // d loss / d input_i, aligned with the inputs of the call.
  std::vector<double> d_inputs;
};

// mean_i -log sigmoid(r_w[i] - r_l[i]); d_inputs = [d/dr_w..., d/dr_l...].
LossAndGrad BtRewardLoss(std::span<const double> r_w, std::span<const double> r_l);

// mean_i -log sigmoid(beta (lr_w[i] - lr_l[i])); d_inputs = [d/dlr_w..., d/dlr_l...].
LossAndGrad DpoFromLogRatios(std::span<const double> lr_w, std::span<const double> lr_l,
                             double beta);

// -log sigmoid(beta (sum lr_w - sum lr_l)); d_inputs = [d/dlr_w..., d/dlr_l...].
LossAndGrad PopulationDpoFromLogRatios(std::span<const double> lr_w,
                                       std::span<const double> lr_l, double beta);

struct NormalizerState {
  double alpha = 0.5;
  double mu = 0.0;
};

// mu = alpha mean(lr | gamma=+1) + (1 - alpha) mean(lr | gamma=-1). A class
// may be absent only when its weight is zero.
double BatchNormalizer(std::span<const double> lr, std::span<const int> gamma, double alpha);

// mean_i -log sigmoid(gamma_i beta' (lr_i - mu)) with mu held constant.
LossAndGrad PopAlignFromLogRatios(std::span<const double> lr, std::span<const int> gamma,
                                  double beta_prime, double mu);

// ---------------------------------------------------------------------------
// Backends.

template <class B>
concept PreferenceBackend = requires(const B& b, const typename B::Item& item, double scale,
                                     std::span<double> grad) {
  { b.LogRatio(item) } -> std::convertible_to<double>;
  { b.AccumulateGradLogRatio(item, scale, grad) } -> std::convertible_to<double>;
  { b.num_parameters() } -> std::convertible_to<int>;
  { B::kExactLikelihood } -> std::convertible_to<bool>;
};

// Closed-form log p_theta(x) - log p_ref(x) of a Gaussian mixture.
struct MixtureBackend {
  using Item = Sample;
  static constexpr bool kExactLikelihood = true;

  const GaussianMixture& theta;
  const GaussianMixture& ref;

  double LogRatio(const Sample& x) const { return theta.LogProb(x.x) - ref.LogProb(x.x); }
  double AccumulateGradLogRatio(const Sample& x, double scale, std::span<double> grad) const {
    theta.AccumulateGradLogProb(x.x, scale, grad);
    return LogRatio(x);
  }
  int num_parameters() const { return theta.num_parameters(); }
};

// Per-step epsilon-error log-ratio of two denoisers.
struct DiffusionBackend {
  using Item = DiffusionPair;
  static constexpr bool kExactLikelihood = false;

  const Denoiser& theta;
  const Denoiser& ref;
  const NoiseSchedule& schedule;

  double LogRatio(const DiffusionPair& p) const {
    return StepLogRatio(theta, ref, p, schedule);
  }
  double AccumulateGradLogRatio(const DiffusionPair& p, double scale,
                                std::span<double> grad) const {
    return AccumulateGradStepLogRatio(theta, ref, p, schedule, scale, grad);
  }
  int num_parameters() const { return theta.num_parameters(); }
};

struct ObjectiveValue {
  double loss = 0.0;
  // Empty unless the gradient was requested.
  std::vector<double> grad;
  double mu = 0.0;
};

template <class Item>
struct PreferenceItem {
  Item item;
  int gamma = +1;
};

namespace internal {

template <PreferenceBackend B>
std::vector<double> LogRatios(const B& b, std::span<const typename B::Item> items) {
  std::vector<double> lr(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) lr[i] = b.LogRatio(items[i]);
  return lr;
}

template <PreferenceBackend B>
std::vector<double> ChainGrad(const B& b, std::span<const typename B::Item> items,
                              std::span<const double> d_lr) {
  std::vector<double> grad(b.num_parameters(), 0.0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (d_lr[i] != 0.0) b.AccumulateGradLogRatio(items[i], d_lr[i], grad);
  }
  return grad;
}

}  // namespace internal

// Single-sample DPO over aligned winner/loser lists.
template <PreferenceBackend B>
ObjectiveValue DpoLoss(const B& b, std::span<const typename B::Item> winners,
                       std::span<const typename B::Item> losers, double beta,
                       bool want_grad = true) {
  if (winners.size() != losers.size() || winners.empty()) {
    throw InvalidArgument("dpo needs equal-length nonempty winner/loser lists");
  }
  std::vector<typename B::Item> all(winners.begin(), winners.end());
  all.insert(all.end(), losers.begin(), losers.end());
  const auto lr = internal::LogRatios(b, std::span<const typename B::Item>(all));
  const std::size_t n = winners.size();
  auto res = DpoFromLogRatios(std::span(lr).first(n), std::span(lr).subspan(n), beta);
  ObjectiveValue out{res.loss, {}, 0.0};
  if (want_grad) {
    out.grad = internal::ChainGrad(b, std::span<const typename B::Item>(all), res.d_inputs);
  }
  return out;
}

// Diffusion-DPO: -log sigmoid(beta T (Delta_w - Delta_l)), batch mean.
inline ObjectiveValue DiffusionDpoLoss(const DiffusionBackend& b,
                                       std::span<const DiffusionPair> winners,
                                       std::span<const DiffusionPair> losers, double beta,
                                       bool want_grad = true) {
  for (std::size_t i = 0; i < winners.size() && i < losers.size(); ++i) {
    if (winners[i].t != losers[i].t) {
      throw InvalidArgument("diffusion-dpo winner and loser must share a timestep");
    }
  }
  return DpoLoss(b, winners, losers, beta * b.schedule.T, want_grad);
}

// Exact population DPO. Needs closed-form likelihoods.
template <PreferenceBackend B>
ObjectiveValue PopulationDpoExact(const B& b, std::span<const typename B::Item> winners,
                                  std::span<const typename B::Item> losers, double beta,
                                  bool want_grad = true) {
  if constexpr (!B::kExactLikelihood) {
    throw UnsupportedBackend("population DPO needs a backend with exact likelihoods");
  } else {
    if (winners.size() != losers.size() || winners.empty()) {
      throw InvalidArgument("population dpo needs equal nonempty populations");
    }
    std::vector<typename B::Item> all(winners.begin(), winners.end());
    all.insert(all.end(), losers.begin(), losers.end());
    const auto lr = internal::LogRatios(b, std::span<const typename B::Item>(all));
    const std::size_t n = winners.size();
    auto res =
        PopulationDpoFromLogRatios(std::span(lr).first(n), std::span(lr).subspan(n), beta);
    ObjectiveValue out{res.loss, {}, 0.0};
    if (want_grad) {
      out.grad = internal::ChainGrad(b, std::span<const typename B::Item>(all), res.d_inputs);
    }
    return out;
  }
}

inline ObjectiveValue PopulationDpoExact(const GaussianMixture& theta,
                                         const GaussianMixture& ref,
                                         const PreferencePair& pair, double beta,
                                         bool want_grad = true) {
  pair.Validate();
  return PopulationDpoExact(MixtureBackend{theta, ref},
                            std::span<const Sample>(pair.winner.samples),
                            std::span<const Sample>(pair.loser.samples), beta, want_grad);
}

// PopAlign. `mu_override` replaces the batch normalizer (used by the bound
// checks); otherwise mu comes from BatchNormalizer with config.alpha.
template <PreferenceBackend B>
ObjectiveValue PopAlignLoss(const B& b, std::span<const typename B::Item> items,
                            std::span<const int> gamma, const AlignConfig& config,
                            int diffusion_steps, bool want_grad = true,
                            const double* mu_override = nullptr) {
  if (items.size() != gamma.size() || items.empty()) {
    throw InvalidArgument("popalign needs one gamma label per item");
  }
  const auto lr = internal::LogRatios(b, items);
  const double mu = mu_override ? *mu_override : BatchNormalizer(lr, gamma, config.alpha);
  auto res = PopAlignFromLogRatios(lr, gamma, config.BetaPrime(diffusion_steps), mu);
  ObjectiveValue out{res.loss, {}, mu};
  if (want_grad) out.grad = internal::ChainGrad(b, items, res.d_inputs);
  return out;
}

// SFT. Mixture: mean negative log-likelihood of the winners.
ObjectiveValue SftLoss(const GaussianMixture& theta, std::span<const Sample> winners,
                       bool want_grad = true);
// Diffusion: the epsilon-prediction ELBO surrogate on winner items.
ObjectiveValue SftLoss(const Denoiser& theta, const NoiseSchedule& schedule,
                       std::span<const DiffusionPair> winners, bool want_grad = true);

// Flattens pairs into (items, gamma) with winners first per pair.
void FlattenPairs(std::span<const PreferencePair> pairs, std::vector<Sample>& items,
                  std::vector<int>& gamma);

}  // namespace popalign

#endif  // POPALIGN_OBJECTIVES_H_
