// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef POPALIGN_GMM_H_
#define POPALIGN_GMM_H_

#include <iosfwd>
#include <span>
#include <vector>

#include "popalign/core.h"
#include "popalign/rng.h"

namespace popalign {

// Isotropic Gaussian mixture in d dimensions, parameterized by unconstrained
// logits (weights = softmax), means (K x d, row-major) and log standard
// deviations (one per component).
//
// The flat parameter layout used by gradients and optimizers is
//   [logits (K) | means (K*d) | log_stds (K)].
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> logits, std::vector<double> means,
                  std::vector<double> log_stds, int dim = 1);

  // The skewed three-mode 1D model: logits (1, 0, -1), means (-7, 0, 7),
  // unit standard deviations. Components are G1, G2, G3 in that order.
  static GaussianMixture Reference1d();

  int num_components() const { return static_cast<int>(logits_.size()); }
  int dim() const { return dim_; }
  int num_parameters() const { return num_components() * (dim_ + 2); }

  const std::vector<double>& logits() const { return logits_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& log_stds() const { return log_stds_; }
  std::span<const double> Mean(int k) const;

  std::vector<double> Weights() const;

  // log sum_k w_k N(x; mu_k, sigma_k^2 I), via log-sum-exp.
  double LogProb(std::span<const double> x) const;
  double LogProb(const Sample& s) const { return LogProb(s.x); }

  // Posterior component memberships p(k | x).
  std::vector<double> Responsibilities(std::span<const double> x) const;

  // d log p(x) / d params in the flat layout.
  std::vector<double> GradLogProb(std::span<const double> x) const;
  // Adds scale * d log p(x) / d params into `grad`.
  void AccumulateGradLogProb(std::span<const double> x, double scale,
                             std::span<double> grad) const;

  // Ancestral sampling: component ~ softmax(logits), then Gaussian.
  std::vector<double> Draw(RngStream& rng) const;
  std::vector<double> DrawComponent(int k, RngStream& rng) const;
  Population Sample(int n, RngStream& rng,
                    Condition condition = Condition::kNeutral) const;

  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> params);

  // Plain-text checkpoint: one `k,logit,mean...,log_std` row per component.
  void Write(std::ostream& os) const;
  static GaussianMixture Read(std::istream& is);

  friend bool operator==(const GaussianMixture&, const GaussianMixture&) = default;

 private:
  void CheckDim(std::span<const double> x) const;
  // log w_k + log N(x; mu_k, sigma_k) for every k.
  std::vector<double> ComponentLogJoint(std::span<const double> x) const;

  int dim_;
  std::vector<double> logits_;
  std::vector<double> means_;
  std::vector<double> log_stds_;
};

// log(sum exp(v)), stable for any finite input.
double LogSumExp(std::span<const double> v);
std::vector<double> Softmax(std::span<const double> logits);

}  // namespace popalign

#endif  // POPALIGN_GMM_H_
