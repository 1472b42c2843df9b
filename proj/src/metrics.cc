// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/metrics.h"

#include <cmath>

namespace popalign {
namespace {

std::vector<double> ResolveIdeal(std::span<const double> ideal, int k) {
  if (ideal.empty()) return UniformIdeal(k);
  if (static_cast<int>(ideal.size()) != k) {
    throw InvalidArgument("ideal vector length differs from the attribute count");
  }
  double total = 0.0;
  for (double v : ideal) {
    if (!(v >= 0.0)) throw InvalidArgument("ideal entries must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("ideal must sum to 1");
  return std::vector<double>(ideal.begin(), ideal.end());
}

void CheckMixture1d(const GaussianMixture& m) {
  if (m.dim() != 1) throw InvalidArgument("quadrature metrics need a 1D mixture");
}

}  // namespace

std::vector<double> UniformIdeal(int k) {
  if (k < 1) throw InvalidArgument("need at least one attribute");
  return std::vector<double>(k, 1.0 / k);
}

double L2Distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("vector lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

DiscrepancyReport FairnessDiscrepancy(const Population& samples,
                                      const OracleClassifier& classifier,
                                      std::span<const double> ideal) {
  const int k = classifier.num_attributes();
  DiscrepancyReport r;
  r.ideal = ResolveIdeal(ideal, k);
  r.expected.assign(k, 0.0);
  r.n_samples = samples.size();
  for (const Sample& s : samples.samples) {
    if (!classifier.Filter(s.x)) continue;
    ++r.n_detected;
    const auto p = classifier.Classify(s.x);
    for (int u = 0; u < k; ++u) r.expected[u] += p[u];
  }
  if (r.n_detected == 0) throw InvalidArgument("no sample passed the classifier");
  for (double& v : r.expected) v /= r.n_detected;
  r.f = L2Distance(r.expected, r.ideal);
  return r;
}

DiscrepancyReport MixtureDiscrepancy(const GaussianMixture& theta,
                                     const OracleClassifier& classifier,
                                     std::span<const double> ideal, double lo, double hi,
                                     int nodes) {
  CheckMixture1d(theta);
  const int k = classifier.num_attributes();
  DiscrepancyReport r;
  r.ideal = ResolveIdeal(ideal, k);
  r.expected.assign(k, 0.0);
  const double h = (hi - lo) / (nodes - 1);
  double accepted = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = lo + h * i;
    const double xs[1] = {x};
    if (!classifier.Filter(xs)) continue;
    const double w = (i == 0 || i == nodes - 1 ? 0.5 : 1.0) * h * std::exp(theta.LogProb(xs));
    accepted += w;
    const auto p = classifier.Classify(xs);
    for (int u = 0; u < k; ++u) r.expected[u] += w * p[u];
  }
  if (!(accepted > 0.0)) throw InvalidArgument("model puts no mass on accepted samples");
  for (double& v : r.expected) v /= accepted;
  r.f = L2Distance(r.expected, r.ideal);
  r.n_samples = nodes;
  r.n_detected = static_cast<int>(std::lround(accepted * nodes));
  return r;
}

double MixtureDetectionRate(const GaussianMixture& theta, const OracleClassifier& classifier,
                            double lo, double hi, int nodes) {
  CheckMixture1d(theta);
  return Trapezoid(
      [&](double x) {
        const double xs[1] = {x};
        return classifier.Filter(xs) ? std::exp(theta.LogProb(xs)) : 0.0;
      },
      lo, hi, nodes);
}

RecallReport Recall(std::span<const Population> populations,
                    const OracleClassifier& classifier) {
  RecallReport r;
  long long hits = 0, total = 0;
  for (std::size_t u = 0; u < populations.size(); ++u) {
    int h = 0;
    for (const Sample& s : populations[u].samples) {
      const auto label = classifier.Filter(s.x);
      if (label && *label == static_cast<int>(u)) ++h;
    }
    const int n = populations[u].size();
    r.per_attribute.push_back(n > 0 ? static_cast<double>(h) / n : 0.0);
    r.counts.push_back(n);
    hits += h;
    total += n;
  }
  r.overall = total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  return r;
}

double Trapezoid(const std::function<double(double)>& f, double lo, double hi, int nodes) {
  if (nodes < 2) throw InvalidArgument("trapezoid rule needs at least two nodes");
  const double h = (hi - lo) / (nodes - 1);
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < nodes - 1; ++i) s += f(lo + h * i);
  return s * h;
}

double KlToReference(const GaussianMixture& theta, const GaussianMixture& ref, double lo,
                     double hi, int nodes) {
  CheckMixture1d(theta);
  CheckMixture1d(ref);
  return Trapezoid(
      [&](double x) {
        const double xs[1] = {x};
        const double lp = theta.LogProb(xs);
        const double lq = ref.LogProb(xs);
        return std::exp(lp) * (lp - lq);
      },
      lo, hi, nodes);
}

}  // namespace popalign
