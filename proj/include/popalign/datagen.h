// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic preference-data pipeline: generators per condition, an oracle
// attribute classifier with an ambiguity threshold, and assembly of
// winner/loser population pairs.

#ifndef POPALIGN_DATAGEN_H_
#define POPALIGN_DATAGEN_H_

#include <optional>
#include <span>
#include <vector>

#include "popalign/core.h"
#include "popalign/diffusion.h"
#include "popalign/gmm.h"
#include "popalign/rng.h"

namespace popalign {

// Attribute classifier backed by a fixed reference mixture. Attribute u owns
// a set of mixture components; every other component is "no attribute"
// (the analog of an undetectable face).
class OracleClassifier {
 public:
  OracleClassifier(GaussianMixture reference, std::vector<std::vector<int>> attribute_components,
                   double tau = 0.8);

  // 1D track: attributes {G1, G3} of the reference model; G2 is undetected.
  static OracleClassifier Mixture1d(double tau = 0.8);
  // Diffusion track: attributes A at (-3, 0) and B at (3, 0); the ring at
  // radius 6 is covered by non-attribute components.
  static OracleClassifier Toy2d(double tau = 0.8);

  int num_attributes() const { return static_cast<int>(attribute_components_.size()); }
  double tau() const { return tau_; }
  const GaussianMixture& reference() const { return reference_; }

  // Posterior mass of each attribute's components (not renormalized).
  std::vector<double> AttributeMass(std::span<const double> x) const;
  // p(u | x): attribute masses renormalized to sum to 1.
  std::vector<double> Classify(std::span<const double> x) const;
  // Accepted attribute (argmax) iff its mass reaches tau, else nullopt.
  std::optional<int> Filter(std::span<const double> x) const;

 private:
  GaussianMixture reference_;
  std::vector<std::vector<int>> attribute_components_;
  double tau_;
};

std::optional<int> ClassifyFilter(const OracleClassifier& classifier, const Sample& sample);

// A sampler per condition.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual int dim() const = 0;
  virtual Population Generate(Condition condition, int n, RngStream& rng) const = 0;
};

// Neutral draws come from the full mixture; attribute conditions draw from a
// single component (attr-a -> G1, attr-b -> G3 by default).
class MixtureGenerator : public Generator {
 public:
  explicit MixtureGenerator(GaussianMixture model, int component_a = 0, int component_b = 2);
  int dim() const override { return model_.dim(); }
  Population Generate(Condition condition, int n, RngStream& rng) const override;
  const GaussianMixture& model() const { return model_; }

 private:
  GaussianMixture model_;
  int component_a_;
  int component_b_;
};

// Ground-truth 2D data for the diffusion track.
struct ToyWorld : public Generator {
  double mode_offset = 3.0;
  double mode_std = 0.5;
  double ring_radius = 6.0;
  double ring_std = 0.3;
  // Fraction of neutral draws that come from attribute A.
  double neutral_skew = 0.85;

  int dim() const override { return 2; }
  Population Generate(Condition condition, int n, RngStream& rng) const override;
};

// Samples a trained denoiser. The model works in coordinates divided by
// `data_scale`; samples are returned in world coordinates.
class DiffusionGenerator : public Generator {
 public:
  DiffusionGenerator(const Denoiser& model, const NoiseSchedule& schedule, double data_scale,
                     double guidance_scale = 1.0);
  int dim() const override { return model_.shape().dim; }
  Population Generate(Condition condition, int n, RngStream& rng) const override;

 private:
  const Denoiser& model_;
  const NoiseSchedule& schedule_;
  double data_scale_;
  double guidance_scale_;
};

struct PairGenStats {
  long long attempts = 0;
  long long rejected = 0;
};

// Builds `pairs` preference pairs of population size N. Losers are N neutral
// draws; winners hold N/|A| draws per attribute condition, relabelled to the
// neutral condition. Draws the classifier rejects (or, for winners, assigns
// to another attribute) are redrawn. With N = 1 the single winner sample
// rotates through the attributes across pairs. Every pair uses its own split
// RNG stream. Throws PipelineStarvation once more than 95% of draws are
// rejected.
std::vector<PreferencePair> GeneratePairs(const Generator& generator, Condition neutral,
                                          std::span<const Condition> attribute_conditions,
                                          int pairs, int population_size,
                                          const OracleClassifier& classifier, RngStream& rng,
                                          PairGenStats* stats = nullptr);

}  // namespace popalign

#endif  // POPALIGN_DATAGEN_H_
