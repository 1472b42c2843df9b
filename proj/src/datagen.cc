// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/datagen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace popalign {
namespace {

// Below this many draws the rejection rate is too noisy to act on.
constexpr long long kMinAttemptsForStarvation = 100;
constexpr double kStarvationRate = 0.95;
// Hard cap for a single slot, so one impossible attribute cannot spin forever
// while the others keep the global rate low.
constexpr int kMaxRedrawsPerSlot = 10000;

constexpr int kRingBeads = 48;

}  // namespace

OracleClassifier::OracleClassifier(GaussianMixture reference,
                                   std::vector<std::vector<int>> attribute_components,
                                   double tau)
    : reference_(std::move(reference)),
      attribute_components_(std::move(attribute_components)),
      tau_(tau) {
  if (!(tau > 0.5 && tau <= 1.0)) throw InvalidArgument("classifier tau must lie in (0.5, 1]");
  if (attribute_components_.empty()) throw InvalidArgument("classifier needs attributes");
  std::vector<bool> used(reference_.num_components(), false);
  for (const auto& comps : attribute_components_) {
    if (comps.empty()) throw InvalidArgument("attribute with no components");
    for (int k : comps) {
      if (k < 0 || k >= reference_.num_components() || used[k]) {
        throw InvalidArgument("attribute components must be distinct valid indices");
      }
      used[k] = true;
    }
  }
}

OracleClassifier OracleClassifier::Mixture1d(double tau) {
  return OracleClassifier(GaussianMixture::Reference1d(), {{0}, {2}}, tau);
}

OracleClassifier OracleClassifier::Toy2d(double tau) {
  const double log_std = std::log(0.5);
  std::vector<double> means = {-3.0, 0.0, 3.0, 0.0};
  for (int i = 0; i < kRingBeads; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / kRingBeads;
    means.push_back(6.0 * std::cos(angle));
    means.push_back(6.0 * std::sin(angle));
  }
  const int k = 2 + kRingBeads;
  GaussianMixture ref(std::vector<double>(k, 0.0), std::move(means),
                      std::vector<double>(k, log_std), 2);
  return OracleClassifier(std::move(ref), {{0}, {1}}, tau);
}

std::vector<double> OracleClassifier::AttributeMass(std::span<const double> x) const {
  const auto resp = reference_.Responsibilities(x);
  std::vector<double> mass(attribute_components_.size(), 0.0);
  for (std::size_t u = 0; u < attribute_components_.size(); ++u) {
    for (int k : attribute_components_[u]) mass[u] += resp[k];
  }
  return mass;
}

std::vector<double> OracleClassifier::Classify(std::span<const double> x) const {
  auto mass = AttributeMass(x);
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) {
    // Far from every attribute component: no information, report uniform.
    std::fill(mass.begin(), mass.end(), 1.0 / static_cast<double>(mass.size()));
    return mass;
  }
  for (double& m : mass) m /= total;
  return mass;
}

std::optional<int> OracleClassifier::Filter(std::span<const double> x) const {
  const auto mass = AttributeMass(x);
  const auto best = std::max_element(mass.begin(), mass.end());
  if (*best >= tau_) return static_cast<int>(best - mass.begin());
  return std::nullopt;
}

std::optional<int> ClassifyFilter(const OracleClassifier& classifier, const Sample& sample) {
  return classifier.Filter(sample.x);
}

MixtureGenerator::MixtureGenerator(GaussianMixture model, int component_a, int component_b)
    : model_(std::move(model)), component_a_(component_a), component_b_(component_b) {
  const int k = model_.num_components();
  if (component_a < 0 || component_a >= k || component_b < 0 || component_b >= k) {
    throw InvalidArgument("attribute component out of range");
  }
}

Population MixtureGenerator::Generate(Condition condition, int n, RngStream& rng) const {
  if (condition == Condition::kNeutral) return model_.Sample(n, rng, condition);
  int component;
  switch (condition) {
    case Condition::kAttrA:
      component = component_a_;
      break;
    case Condition::kAttrB:
      component = component_b_;
      break;
    default:
      throw InvalidArgument("mixture generator has no '" +
                            std::string(ConditionName(condition)) + "' condition");
  }
  Population pop;
  pop.condition = condition;
  for (int i = 0; i < n; ++i) {
    pop.samples.push_back({model_.DrawComponent(component, rng), condition, std::nullopt});
  }
  return pop;
}

Population ToyWorld::Generate(Condition condition, int n, RngStream& rng) const {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  Population pop;
  pop.condition = condition;
  pop.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.condition = condition;
    int attr = -1;
    switch (condition) {
      case Condition::kAttrA:
        attr = 0;
        break;
      case Condition::kAttrB:
        attr = 1;
        break;
      case Condition::kNeutral:
        attr = rng.Uniform() < neutral_skew ? 0 : 1;
        break;
      case Condition::kUnrelated:
        break;
    }
    if (attr >= 0) {
      const double cx = attr == 0 ? -mode_offset : mode_offset;
      s.x = {cx + mode_std * rng.Normal(), mode_std * rng.Normal()};
      s.attribute = attr;
    } else {
      const double angle = 2.0 * std::numbers::pi * rng.Uniform();
      const double r = ring_radius + ring_std * rng.Normal();
      s.x = {r * std::cos(angle), r * std::sin(angle)};
    }
    pop.samples.push_back(std::move(s));
  }
  return pop;
}

DiffusionGenerator::DiffusionGenerator(const Denoiser& model, const NoiseSchedule& schedule,
                                       double data_scale, double guidance_scale)
    : model_(model),
      schedule_(schedule),
      data_scale_(data_scale),
      guidance_scale_(guidance_scale) {
  if (!(data_scale > 0.0)) throw InvalidArgument("data scale must be positive");
}

Population DiffusionGenerator::Generate(Condition condition, int n, RngStream& rng) const {
  Population pop = guidance_scale_ == 1.0
                       ? SampleConditional(model_, schedule_, condition, n, rng, condition)
                       : SampleCfg(model_, schedule_, condition, guidance_scale_, n, rng);
  for (Sample& s : pop.samples) {
    for (double& v : s.x) v *= data_scale_;
  }
  return pop;
}

std::vector<PreferencePair> GeneratePairs(const Generator& generator, Condition neutral,
                                          std::span<const Condition> attribute_conditions,
                                          int pairs, int population_size,
                                          const OracleClassifier& classifier, RngStream& rng,
                                          PairGenStats* stats) {
  const int num_attr = static_cast<int>(attribute_conditions.size());
  const int n = population_size;
  if (pairs < 1) throw InvalidArgument("need at least one pair");
  if (n < 1) throw InvalidArgument("population size must be >= 1");
  if (num_attr < 1) throw InvalidArgument("need at least one attribute condition");
  if (num_attr != classifier.num_attributes()) {
    throw InvalidArgument("attribute conditions do not match the classifier");
  }
  if (n > 1 && n % num_attr != 0) {
    throw InvalidArgument("population size must be divisible by the attribute count");
  }

  PairGenStats local;
  PairGenStats& st = stats ? *stats : local;

  // Draws one sample under `condition` until the classifier accepts it (with
  // label `want` when given).
  auto draw = [&](Condition condition, std::optional<int> want, RngStream& r) {
    for (int tries = 0; tries < kMaxRedrawsPerSlot; ++tries) {
      Sample s = std::move(generator.Generate(condition, 1, r).samples.front());
      ++st.attempts;
      const auto label = classifier.Filter(s.x);
      if (label && (!want || *label == *want)) {
        s.condition = neutral;
        s.attribute = *label;
        return s;
      }
      ++st.rejected;
      if (st.attempts >= kMinAttemptsForStarvation &&
          static_cast<double>(st.rejected) > kStarvationRate * static_cast<double>(st.attempts)) {
        throw PipelineStarvation("classifier rejected " + std::to_string(st.rejected) + " of " +
                                 std::to_string(st.attempts) + " draws");
      }
    }
    throw PipelineStarvation("no acceptable draw for condition '" +
                             std::string(ConditionName(condition)) + "' after " +
                             std::to_string(kMaxRedrawsPerSlot) + " tries");
  };

  std::vector<PreferencePair> out;
  out.reserve(pairs);
  for (int p = 0; p < pairs; ++p) {
    RngStream pair_rng = rng.Split();
    Population winner{neutral, {}};
    Population loser{neutral, {}};
    if (n == 1) {
      const int u = p % num_attr;
      winner.samples.push_back(draw(attribute_conditions[u], u, pair_rng));
    } else {
      for (int u = 0; u < num_attr; ++u) {
        for (int i = 0; i < n / num_attr; ++i) {
          winner.samples.push_back(draw(attribute_conditions[u], u, pair_rng));
        }
      }
    }
    for (int i = 0; i < n; ++i) loser.samples.push_back(draw(neutral, std::nullopt, pair_rng));
    out.push_back(PreferencePair::Make(std::move(winner), std::move(loser)));
  }
  return out;
}

}  // namespace popalign
