// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/gmm.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace popalign {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

double LogSumExp(std::span<const double> v) {
  if (v.empty()) return -HUGE_VAL;
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = std::exp(logits[i] - lse);
  return out;
}

GaussianMixture::GaussianMixture(std::vector<double> logits, std::vector<double> means,
                                 std::vector<double> log_stds, int dim)
    : dim_(dim),
      logits_(std::move(logits)),
      means_(std::move(means)),
      log_stds_(std::move(log_stds)) {
  const std::size_t k = logits_.size();
  if (k < 1) throw InvalidArgument("mixture needs at least one component");
  if (dim_ < 1) throw InvalidArgument("mixture dimension must be >= 1");
  if (means_.size() != k * dim_ || log_stds_.size() != k) {
    throw InvalidArgument("mixture parameter shapes disagree");
  }
}

GaussianMixture GaussianMixture::Reference1d() {
  return GaussianMixture({1.0, 0.0, -1.0}, {-7.0, 0.0, 7.0}, {0.0, 0.0, 0.0});
}

std::span<const double> GaussianMixture::Mean(int k) const {
  return std::span<const double>(means_).subspan(static_cast<std::size_t>(k) * dim_, dim_);
}

std::vector<double> GaussianMixture::Weights() const { return Softmax(logits_); }

void GaussianMixture::CheckDim(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw InvalidArgument("sample dimension " + std::to_string(x.size()) +
                          " does not match mixture dimension " + std::to_string(dim_));
  }
}

std::vector<double> GaussianMixture::ComponentLogJoint(std::span<const double> x) const {
  CheckDim(x);
  const int k_count = num_components();
  const double lse = LogSumExp(logits_);
  std::vector<double> out(k_count);
  for (int k = 0; k < k_count; ++k) {
    const auto mu = Mean(k);
    const double inv_var = std::exp(-2.0 * log_stds_[k]);
    double sq = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = x[j] - mu[j];
      sq += diff * diff;
    }
    out[k] = logits_[k] - lse - 0.5 * sq * inv_var - dim_ * (log_stds_[k] + kHalfLog2Pi);
  }
  return out;
}

double GaussianMixture::LogProb(std::span<const double> x) const {
  return LogSumExp(ComponentLogJoint(x));
}

std::vector<double> GaussianMixture::Responsibilities(std::span<const double> x) const {
  return Softmax(ComponentLogJoint(x));
}

std::vector<double> GaussianMixture::GradLogProb(std::span<const double> x) const {
  std::vector<double> grad(num_parameters(), 0.0);
  AccumulateGradLogProb(x, 1.0, grad);
  return grad;
}

void GaussianMixture::AccumulateGradLogProb(std::span<const double> x, double scale,
                                            std::span<double> grad) const {
  const int k_count = num_components();
  if (static_cast<int>(grad.size()) != num_parameters()) {
    throw InvalidArgument("gradient buffer has wrong size");
  }
  const auto resp = Responsibilities(x);
  const auto weights = Weights();
  double* g_logits = grad.data();
  double* g_means = grad.data() + k_count;
  double* g_log_stds = grad.data() + k_count + k_count * dim_;
  for (int k = 0; k < k_count; ++k) {
    const double r = resp[k];
    g_logits[k] += scale * (r - weights[k]);
    const auto mu = Mean(k);
    const double inv_var = std::exp(-2.0 * log_stds_[k]);
    double sq = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = x[j] - mu[j];
      sq += diff * diff;
      g_means[k * dim_ + j] += scale * r * diff * inv_var;
    }
    g_log_stds[k] += scale * r * (sq * inv_var - dim_);
  }
}

std::vector<double> GaussianMixture::DrawComponent(int k, RngStream& rng) const {
  if (k < 0 || k >= num_components()) throw InvalidArgument("component index out of range");
  const auto mu = Mean(k);
  const double sigma = std::exp(log_stds_[k]);
  std::vector<double> x(dim_);
  for (int j = 0; j < dim_; ++j) x[j] = mu[j] + sigma * rng.Normal();
  return x;
}

std::vector<double> GaussianMixture::Draw(RngStream& rng) const {
  const auto w = Weights();
  return DrawComponent(rng.Categorical(w), rng);
}

Population GaussianMixture::Sample(int n, RngStream& rng, Condition condition) const {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  const auto w = Weights();
  Population pop;
  pop.condition = condition;
  pop.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int k = rng.Categorical(w);
    pop.samples.push_back({DrawComponent(k, rng), condition, std::nullopt});
  }
  return pop;
}

std::vector<double> GaussianMixture::Parameters() const {
  std::vector<double> p;
  p.reserve(num_parameters());
  p.insert(p.end(), logits_.begin(), logits_.end());
  p.insert(p.end(), means_.begin(), means_.end());
  p.insert(p.end(), log_stds_.begin(), log_stds_.end());
  return p;
}

void GaussianMixture::SetParameters(std::span<const double> params) {
  if (static_cast<int>(params.size()) != num_parameters()) {
    throw InvalidArgument("parameter vector has wrong size");
  }
  const std::size_t k = logits_.size();
  std::copy_n(params.begin(), k, logits_.begin());
  std::copy_n(params.begin() + k, k * dim_, means_.begin());
  std::copy_n(params.begin() + k + k * dim_, k, log_stds_.begin());
}

void GaussianMixture::Write(std::ostream& os) const {
  os << "# gaussian-mixture dim=" << dim_ << "\n# k,logit,mean,log_std\n";
  for (int k = 0; k < num_components(); ++k) {
    os << k << ',' << FormatDouble(logits_[k]);
    for (double m : Mean(k)) os << ',' << FormatDouble(m);
    os << ',' << FormatDouble(log_stds_[k]) << '\n';
  }
}

GaussianMixture GaussianMixture::Read(std::istream& is) {
  std::string line;
  int dim = 1;
  std::vector<double> logits, means, log_stds;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("dim=");
      if (pos != std::string::npos) dim = std::stoi(line.substr(pos + 4));
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (static_cast<int>(f.size()) != dim + 3) {
      throw InvalidArgument("mixture checkpoint row has wrong arity");
    }
    if (std::stoi(f[0]) != static_cast<int>(logits.size())) {
      throw InvalidArgument("mixture checkpoint rows out of order");
    }
    logits.push_back(ParseDouble(f[1]));
    for (int j = 0; j < dim; ++j) means.push_back(ParseDouble(f[2 + j]));
    log_stds.push_back(ParseDouble(f.back()));
  }
  return GaussianMixture(std::move(logits), std::move(means), std::move(log_stds), dim);
}

}  // namespace popalign
