// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fairness discrepancy, attribute recall and divergence diagnostics.

#ifndef POPALIGN_METRICS_H_
#define POPALIGN_METRICS_H_

#include <functional>
#include <span>
#include <vector>

#include "popalign/core.h"
#include "popalign/datagen.h"
#include "popalign/gmm.h"

namespace popalign {

struct DiscrepancyReport {
  std::vector<double> expected;  // mean p(u|x) over accepted samples
  std::vector<double> ideal;
  double f = 0.0;  // ||expected - ideal||_2
  int n_samples = 0;
  int n_detected = 0;
};

// Uniform target over `k` attributes.
std::vector<double> UniformIdeal(int k);

double L2Distance(std::span<const double> a, std::span<const double> b);

// f = || mean_{accepted x} p(u|x) - ideal ||_2. Samples the classifier rejects
// are left out of the mean. An empty `ideal` means uniform. Throws when no
// sample is accepted.
DiscrepancyReport FairnessDiscrepancy(const Population& samples,
                                      const OracleClassifier& classifier,
                                      std::span<const double> ideal = {});

// Same quantity computed by quadrature against a 1D mixture's density
// instead of from samples: E_theta[p(u|x) | accepted], with n_detected and
// n_samples replaced by the accepted probability mass scaled to `nodes`.
DiscrepancyReport MixtureDiscrepancy(const GaussianMixture& theta,
                                     const OracleClassifier& classifier,
                                     std::span<const double> ideal = {}, double lo = -25.0,
                                     double hi = 25.0, int nodes = 20001);

// Probability mass of a 1D mixture that the classifier accepts.
double MixtureDetectionRate(const GaussianMixture& theta, const OracleClassifier& classifier,
                            double lo = -25.0, double hi = 25.0, int nodes = 20001);

struct RecallReport {
  std::vector<double> per_attribute;
  double overall = 0.0;
  std::vector<int> counts;
};

// populations[u] holds samples generated under attribute u's condition. A
// sample is a hit when the classifier accepts it with label u.
RecallReport Recall(std::span<const Population> populations,
                    const OracleClassifier& classifier);

// Composite trapezoid rule over [lo, hi] with `nodes` equally spaced points.
double Trapezoid(const std::function<double(double)>& f, double lo, double hi, int nodes);

// KL(theta || ref) for 1D mixtures by the trapezoid rule.
double KlToReference(const GaussianMixture& theta, const GaussianMixture& ref,
                     double lo = -25.0, double hi = 25.0, int nodes = 100000);

}  // namespace popalign

#endif  // POPALIGN_METRICS_H_
