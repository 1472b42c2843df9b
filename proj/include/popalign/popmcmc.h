// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0
//
// Greedy population refinement: replace one sample at a time with a fresh
// generator draw and keep the change only when a judge does not score the
// population worse.

#ifndef POPALIGN_POPMCMC_H_
#define POPALIGN_POPMCMC_H_

#include <functional>
#include <vector>

#include "popalign/core.h"
#include "popalign/datagen.h"
#include "popalign/rng.h"

namespace popalign {

struct JudgeVerdict {
  int step = 0;
  bool accepted = false;
  double score_before = 0.0;
  double score_after = 0.0;
  bool terminated = false;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // Lower is better.
  virtual double Score(const Population& pop) const = 0;
  virtual bool Accepts(double score_before, double score_after) const {
    return score_after <= score_before;
  }
  virtual bool Terminated(const Population& pop) const = 0;
};

// Scores a population by the fairness discrepancy of its hard classifier
// labels against a uniform target, plus one point per sample the classifier
// cannot place. Terminates once there are no undetected samples and the
// attribute counts differ by at most one.
class FairnessJudge : public Judge {
 public:
  explicit FairnessJudge(const OracleClassifier& classifier) : classifier_(classifier) {}
  double Score(const Population& pop) const override;
  bool Terminated(const Population& pop) const override;
  std::vector<int> Counts(const Population& pop, int* undetected) const;

 private:
  const OracleClassifier& classifier_;
};

// Refuses every proposal and never terminates.
class RejectAllJudge : public Judge {
 public:
  double Score(const Population&) const override { return 0.0; }
  bool Accepts(double, double) const override { return false; }
  bool Terminated(const Population&) const override { return false; }
};

using Proposer = std::function<Sample(RngStream&)>;

struct RefineResult {
  Population final;
  std::vector<JudgeVerdict> trace;
  int steps = 0;
  bool terminated = false;
};

// Runs at most `max_steps` proposals. Termination is checked before the
// first proposal and after every accepted move.
RefineResult RefinePopulation(const Population& initial, const Proposer& proposer,
                              const Judge& judge, int max_steps, RngStream& rng);

// Proposer drawing from `generator` under `condition`, relabelled to the
// population's condition.
Proposer GeneratorProposer(const Generator& generator, Condition condition,
                           Condition label);

}  // namespace popalign

#endif  // POPALIGN_POPMCMC_H_
