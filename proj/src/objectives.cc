// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/objectives.h"

#include <cmath>

namespace popalign {

double LogSigmoid(double z) {
  // log sigmoid(z) = -log1p(exp(-z)) = z - log1p(exp(z)).
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// Incremental mean: exact when every term is equal, so identity-case losses
// come out as exactly log 2.
class RunningMean {
 public:
  void Add(double v) {
    ++n_;
    mean_ += (v - mean_) / static_cast<double>(n_);
  }
  double value() const { return mean_; }

 private:
  double mean_ = 0.0;
  long long n_ = 0;
};

void CheckPaired(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) throw InvalidArgument("loss needs a nonempty batch");
  if (a.size() != b.size()) throw InvalidArgument("winner and loser lists differ in length");
}

// Mean of -log sigmoid(scale (a_i - b_i)) and its input derivatives.
LossAndGrad PairwiseLogistic(std::span<const double> a, std::span<const double> b,
                             double scale) {
  CheckPaired(a, b);
  const std::size_t n = a.size();
  LossAndGrad out;
  out.d_inputs.assign(2 * n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  RunningMean mean;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = scale * (a[i] - b[i]);
    mean.Add(-LogSigmoid(z));
    // d/dz -log sigmoid(z) = -sigmoid(-z).
    const double dz = -Sigmoid(-z) * inv_n;
    out.d_inputs[i] = dz * scale;
    out.d_inputs[n + i] = -dz * scale;
  }
  out.loss = mean.value();
  return out;
}

}  // namespace

LossAndGrad BtRewardLoss(std::span<const double> r_w, std::span<const double> r_l) {
  return PairwiseLogistic(r_w, r_l, 1.0);
}

LossAndGrad DpoFromLogRatios(std::span<const double> lr_w, std::span<const double> lr_l,
                             double beta) {
  return PairwiseLogistic(lr_w, lr_l, beta);
}

LossAndGrad PopulationDpoFromLogRatios(std::span<const double> lr_w,
                                       std::span<const double> lr_l, double beta) {
  CheckPaired(lr_w, lr_l);
  double sum_w = 0.0, sum_l = 0.0;
  for (double v : lr_w) sum_w += v;
  for (double v : lr_l) sum_l += v;
  const double z = beta * (sum_w - sum_l);
  const std::size_t n = lr_w.size();
  LossAndGrad out;
  out.loss = -LogSigmoid(z);
  const double dz = -Sigmoid(-z);
  out.d_inputs.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.d_inputs[i] = dz * beta;
    out.d_inputs[n + i] = -dz * beta;
  }
  return out;
}

double BatchNormalizer(std::span<const double> lr, std::span<const int> gamma, double alpha) {
  if (lr.size() != gamma.size()) throw InvalidArgument("one gamma label per log-ratio");
  double sum_w = 0.0, sum_l = 0.0;
  std::size_t n_w = 0, n_l = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    if (gamma[i] == +1) {
      sum_w += lr[i];
      ++n_w;
    } else if (gamma[i] == -1) {
      sum_l += lr[i];
      ++n_l;
    } else {
      throw InvalidArgument("gamma labels must be +1 or -1");
    }
  }
  double mu = 0.0;
  if (alpha != 0.0) {
    if (n_w == 0) throw InvalidArgument("batch has no winner items but alpha > 0");
    mu += alpha * (sum_w / static_cast<double>(n_w));
  }
  if (alpha != 1.0) {
    if (n_l == 0) throw InvalidArgument("batch has no loser items but alpha < 1");
    mu += (1.0 - alpha) * (sum_l / static_cast<double>(n_l));
  }
  return mu;
}

LossAndGrad PopAlignFromLogRatios(std::span<const double> lr, std::span<const int> gamma,
                                  double beta_prime, double mu) {
  if (lr.empty()) throw InvalidArgument("popalign needs a nonempty batch");
  if (lr.size() != gamma.size()) throw InvalidArgument("one gamma label per log-ratio");
  const std::size_t n = lr.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossAndGrad out;
  out.d_inputs.assign(n, 0.0);
  RunningMean mean;
  for (std::size_t i = 0; i < n; ++i) {
    if (gamma[i] != 1 && gamma[i] != -1) {
      throw InvalidArgument("gamma labels must be +1 or -1");
    }
    const double scale = gamma[i] * beta_prime;
    const double z = scale * (lr[i] - mu);
    mean.Add(-LogSigmoid(z));
    out.d_inputs[i] = -Sigmoid(-z) * scale * inv_n;
  }
  out.loss = mean.value();
  return out;
}

ObjectiveValue SftLoss(const GaussianMixture& theta, std::span<const Sample> winners,
                       bool want_grad) {
  if (winners.empty()) throw InvalidArgument("sft needs a nonempty winner set");
  const double inv_n = 1.0 / static_cast<double>(winners.size());
  ObjectiveValue out;
  if (want_grad) out.grad.assign(theta.num_parameters(), 0.0);
  for (const Sample& s : winners) {
    out.loss -= theta.LogProb(s.x);
    if (want_grad) theta.AccumulateGradLogProb(s.x, -inv_n, out.grad);
  }
  out.loss *= inv_n;
  return out;
}

ObjectiveValue SftLoss(const Denoiser& theta, const NoiseSchedule& schedule,
                       std::span<const DiffusionPair> winners, bool want_grad) {
  if (winners.empty()) throw InvalidArgument("sft needs a nonempty winner set");
  ObjectiveValue out;
  if (want_grad) out.grad.assign(theta.num_parameters(), 0.0);
  out.loss = DdpmLoss(theta, schedule, winners, out.grad);
  return out;
}

void FlattenPairs(std::span<const PreferencePair> pairs, std::vector<Sample>& items,
                  std::vector<int>& gamma) {
  items.clear();
  gamma.clear();
  for (const PreferencePair& p : pairs) {
    for (const Sample& s : p.winner.samples) {
      items.push_back(s);
      gamma.push_back(+1);
    }
    for (const Sample& s : p.loser.samples) {
      items.push_back(s);
      gamma.push_back(-1);
    }
  }
}

}  // namespace popalign
