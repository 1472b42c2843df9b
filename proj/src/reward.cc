// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/reward.h"

#include <cmath>

#include "popalign/objectives.h"

namespace popalign {

PopulationReward::PopulationReward(int dim, int hidden)
    : dim_(dim), hidden_(hidden), params_(hidden * dim + 2 * hidden + 1, 0.0) {
  if (dim < 1 || hidden < 1) throw InvalidArgument("reward model needs dim, hidden >= 1");
}

PopulationReward PopulationReward::Random(int dim, int hidden, RngStream& rng) {
  PopulationReward r(dim, hidden);
  for (int i = 0; i < hidden * dim; ++i) r.params_[i] = rng.Normal() / std::sqrt(dim);
  for (int i = 0; i < hidden; ++i) {
    r.params_[hidden * dim + hidden + i] = rng.Normal() / std::sqrt(hidden);
  }
  return r;
}

double PopulationReward::Score(const Population& pop) const {
  std::vector<double> none;
  return AccumulateGrad(pop, 0.0, none);
}

double PopulationReward::AccumulateGrad(const Population& pop, double scale,
                                        std::span<double> grad) const {
  if (pop.samples.empty()) throw InvalidArgument("reward needs a nonempty population");
  if (pop.dim() != dim_) throw InvalidArgument("population dimension differs from reward");
  const bool want_grad = !grad.empty() && scale != 0.0;
  if (!grad.empty() && grad.size() != params_.size()) {
    throw InvalidArgument("gradient buffer has wrong size");
  }
  const double* w = params_.data();
  const double* b = w + hidden_ * dim_;
  const double* v = b + hidden_;
  const double c = params_.back();
  const double inv_n = 1.0 / static_cast<double>(pop.size());

  std::vector<double> pooled(hidden_, 0.0);
  std::vector<double> act(hidden_);
  for (const Sample& s : pop.samples) {
    for (int h = 0; h < hidden_; ++h) {
      double z = b[h];
      for (int j = 0; j < dim_; ++j) z += w[h * dim_ + j] * s.x[j];
      act[h] = std::tanh(z);
      pooled[h] += act[h] * inv_n;
      if (want_grad) {
        // d r / d z_h for this sample = v_h (1 - tanh^2) / N.
        const double dz = scale * v[h] * (1.0 - act[h] * act[h]) * inv_n;
        for (int j = 0; j < dim_; ++j) grad[h * dim_ + j] += dz * s.x[j];
        grad[hidden_ * dim_ + h] += dz;
      }
    }
  }
  double r = c;
  for (int h = 0; h < hidden_; ++h) r += v[h] * pooled[h];
  if (want_grad) {
    for (int h = 0; h < hidden_; ++h) grad[hidden_ * dim_ + hidden_ + h] += scale * pooled[h];
    grad.back() += scale;
  }
  return r;
}

RewardFit BtRewardObjective(const PopulationReward& model,
                            std::span<const PreferencePair> pairs) {
  if (pairs.empty()) throw InvalidArgument("reward fitting needs at least one pair");
  std::vector<double> r_w, r_l;
  for (const PreferencePair& p : pairs) {
    r_w.push_back(model.Score(p.winner));
    r_l.push_back(model.Score(p.loser));
  }
  const LossAndGrad lg = BtRewardLoss(r_w, r_l);
  RewardFit out{lg.loss, std::vector<double>(model.num_parameters(), 0.0)};
  const std::size_t n = pairs.size();
  for (std::size_t i = 0; i < n; ++i) {
    model.AccumulateGrad(pairs[i].winner, lg.d_inputs[i], out.grad);
    model.AccumulateGrad(pairs[i].loser, lg.d_inputs[n + i], out.grad);
  }
  return out;
}

}  // namespace popalign
