// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/popmcmc.h"

#include <algorithm>

#include "popalign/metrics.h"

namespace popalign {

std::vector<int> FairnessJudge::Counts(const Population& pop, int* undetected) const {
  std::vector<int> counts(classifier_.num_attributes(), 0);
  int missing = 0;
  for (const Sample& s : pop.samples) {
    const auto label = classifier_.Filter(s.x);
    if (label) {
      ++counts[*label];
    } else {
      ++missing;
    }
  }
  if (undetected) *undetected = missing;
  return counts;
}

double FairnessJudge::Score(const Population& pop) const {
  int undetected = 0;
  const auto counts = Counts(pop, &undetected);
  const int k = static_cast<int>(counts.size());
  int detected = 0;
  for (int c : counts) detected += c;
  const auto ideal = UniformIdeal(k);
  std::vector<double> share(k, 0.0);
  if (detected == 0) {
    // Worst case: all mass on one attribute.
    share[0] = 1.0;
  } else {
    for (int u = 0; u < k; ++u) share[u] = static_cast<double>(counts[u]) / detected;
  }
  return undetected + L2Distance(share, ideal);
}

bool FairnessJudge::Terminated(const Population& pop) const {
  int undetected = 0;
  const auto counts = Counts(pop, &undetected);
  if (undetected > 0) return false;
  int lo = counts.front(), hi = counts.front();
  for (int c : counts) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi - lo <= 1;
}

RefineResult RefinePopulation(const Population& initial, const Proposer& proposer,
                              const Judge& judge, int max_steps, RngStream& rng) {
  if (initial.size() < 2) throw InvalidArgument("refinement needs N >= 2");
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  RefineResult r;
  r.final = initial;
  if (judge.Terminated(r.final)) {
    r.terminated = true;
    return r;
  }
  double score = judge.Score(r.final);
  for (int step = 1; step <= max_steps; ++step) {
    const auto slot = static_cast<std::size_t>(rng.UniformInt(r.final.samples.size()));
    Sample proposal = proposer(rng);
    Sample previous = std::move(r.final.samples[slot]);
    r.final.samples[slot] = std::move(proposal);
    const double candidate = judge.Score(r.final);
    JudgeVerdict v;
    v.step = step;
    v.score_before = score;
    v.score_after = candidate;
    v.accepted = judge.Accepts(score, candidate);
    if (v.accepted) {
      score = candidate;
      v.terminated = judge.Terminated(r.final);
    } else {
      // Back-track.
      r.final.samples[slot] = std::move(previous);
    }
    r.trace.push_back(v);
    r.steps = step;
    if (v.terminated) {
      r.terminated = true;
      break;
    }
  }
  return r;
}

Proposer GeneratorProposer(const Generator& generator, Condition condition,
                           Condition label) {
  return [&generator, condition, label](RngStream& rng) {
    Sample s = std::move(generator.Generate(condition, 1, rng).samples.front());
    s.condition = label;
    return s;
  };
}

}  // namespace popalign
