// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Population reward model for the Bradley-Terry reward-fitting stage:
// a permutation-invariant scorer r(X) = v . mean_i tanh(W x_i + b) + c.

#ifndef POPALIGN_REWARD_H_
#define POPALIGN_REWARD_H_

#include <span>
#include <vector>

#include "popalign/core.h"
#include "popalign/rng.h"

namespace popalign {

class PopulationReward {
 public:
  PopulationReward(int dim, int hidden);
  static PopulationReward Random(int dim, int hidden, RngStream& rng);

  int dim() const { return dim_; }
  int hidden() const { return hidden_; }
  int num_parameters() const { return static_cast<int>(params_.size()); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  double Score(const Population& pop) const;
  // Adds scale * dr(X)/dparams into `grad`; returns r(X).
  double AccumulateGrad(const Population& pop, double scale, std::span<double> grad) const;

 private:
  int dim_;
  int hidden_;
  // [W (hidden x dim) | b (hidden) | v (hidden) | c].
  std::vector<double> params_;
};

struct RewardFit {
  double loss = 0.0;
  std::vector<double> grad;
};

// Bradley-Terry loss mean_i -log sigmoid(r(X_w) - r(X_l)) over the pairs and
// its parameter gradient.
RewardFit BtRewardObjective(const PopulationReward& model,
                            std::span<const PreferencePair> pairs);

}  // namespace popalign

#endif  // POPALIGN_REWARD_H_
