// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/experiments.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "popalign/io.h"
#include "popalign/objectives.h"
#include "popalign/svg.h"

namespace popalign {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<Condition, 2> kAttributeConditions = {Condition::kAttrA,
                                                           Condition::kAttrB};
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

CheckResult Check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string FmtSci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

bool AllPassed(std::span<const CheckResult> checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// 1D mixture track.

AlignConfig Default1dConfig() {
  AlignConfig c;
  c.beta = 0.5;
  c.alpha = 0.5;
  c.population_size = 1;
  c.learning_rate = 0.1;
  c.steps = 2000;
  c.batch_size = 0;
  c.optimizer = OptimizerKind::kSgd;
  c.log_every = 50;
  return c;
}

std::vector<PreferencePair> Make1dPairs(const AlignConfig& config, const Track1dOptions& opts) {
  RngStream root(config.seed);
  RngStream data_rng = root.Split();
  const MixtureGenerator generator(GaussianMixture::Reference1d());
  const OracleClassifier classifier = OracleClassifier::Mixture1d(opts.tau);
  return GeneratePairs(generator, Condition::kNeutral, kAttributeConditions, opts.pairs,
                       config.population_size, classifier, data_rng);
}

Run1d TrainRun1d(const std::string& label, ObjectiveKind kind, const AlignConfig& config,
                 std::span<const PreferencePair> pairs, const Track1dOptions& opts) {
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const OracleClassifier classifier = OracleClassifier::Mixture1d(opts.tau);
  TrainOptions train_opts;
  train_opts.classifier = &classifier;
  Run1d run{label, kind, config, TrainMixture(kind, ref, ref, pairs, config, train_opts), {},
            0.0, 0.0, 0.0};
  const GaussianMixture& model = run.result.model;
  run.weights = model.Weights();
  try {
    run.discrepancy = MixtureDiscrepancy(model, classifier).f;
  } catch (const InvalidArgument&) {
    run.discrepancy = kNaN;
  }
  run.kl = KlToReference(model, ref);
  run.detection = MixtureDetectionRate(model, classifier);
  return run;
}

Repro1dReport RunRepro1d(const AlignConfig& config, const Track1dOptions& opts) {
  Repro1dReport r;
  r.pairs = Make1dPairs(config, opts);
  r.popalign = TrainRun1d("popalign", ObjectiveKind::kPopAlign, config, r.pairs, opts);
  r.sft = TrainRun1d("sft", ObjectiveKind::kSft, config, r.pairs, opts);
  const double w2_ref = GaussianMixture::Reference1d().Weights()[1];
  const auto& w = r.popalign.weights;
  r.checks.push_back(Check("popalign balances G1/G3", std::abs(w[0] - w[2]) < 0.15,
                           "|w1 - w3| = " + Fmt(std::abs(w[0] - w[2])) + " (< 0.15)"));
  r.checks.push_back(Check("popalign keeps G2", std::abs(w[1] - w2_ref) <= 0.10,
                           "w2 = " + Fmt(w[1]) + " vs initial " + Fmt(w2_ref) + " (+-0.10)"));
  r.checks.push_back(Check("popalign run healthy", !r.popalign.result.status.diverged,
                           r.popalign.result.status.diverged
                               ? r.popalign.result.status.reason
                               : "not diverged"));
  r.checks.push_back(Check("sft collapses G2", r.sft.weights[1] < 0.05,
                           "w2 = " + Fmt(r.sft.weights[1]) + " (< 0.05)"));
  return r;
}

SweepReport RunBetaSweep(const AlignConfig& base, std::span<const double> betas,
                         const Track1dOptions& opts) {
  SweepReport r;
  r.parameter = "beta";
  r.values.assign(betas.begin(), betas.end());
  const auto pairs = Make1dPairs(base, opts);
  for (double beta : betas) {
    AlignConfig c = base;
    c.beta = beta;
    r.runs.push_back(
        TrainRun1d("beta=" + FormatDouble(beta), ObjectiveKind::kPopAlign, c, pairs, opts));
  }
  bool kl_ok = true, f_ok = true;
  std::string kl_text, f_text;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    kl_text += (i ? " , " : "") + Fmt(r.runs[i].kl);
    f_text += (i ? " , " : "") + Fmt(r.runs[i].discrepancy);
    if (i > 0) {
      kl_ok = kl_ok && r.runs[i].kl <= r.runs[i - 1].kl;
      f_ok = f_ok && r.runs[i].discrepancy >= r.runs[i - 1].discrepancy;
    }
  }
  r.checks.push_back(Check("KL non-increasing in beta", kl_ok, "KL = " + kl_text));
  r.checks.push_back(
      Check("discrepancy non-decreasing in beta", f_ok, "discrepancy = " + f_text));
  return r;
}

SweepReport RunAlphaSweep(const AlignConfig& base, std::span<const double> alphas,
                          const Track1dOptions& opts) {
  if (alphas.size() != 3) throw InvalidArgument("alpha sweep expects three values");
  SweepReport r;
  r.parameter = "alpha";
  r.values.assign(alphas.begin(), alphas.end());
  const auto pairs = Make1dPairs(base, opts);
  for (double alpha : alphas) {
    AlignConfig c = base;
    c.alpha = alpha;
    r.runs.push_back(
        TrainRun1d("alpha=" + FormatDouble(alpha), ObjectiveKind::kPopAlign, c, pairs, opts));
  }
  const Run1d& low = r.runs[0];
  const auto& rows = low.result.trace.rows();
  const double f_start = rows.front().discrepancy;
  const double f_end = low.discrepancy;
  const bool low_ok = low.result.status.diverged || f_end >= f_start;
  r.checks.push_back(Check(
      "alpha=" + FormatDouble(alphas[0]) + " diverges or fails to reduce discrepancy", low_ok,
      (low.result.status.diverged ? "diverged (" + low.result.status.reason + ")"
                                  : "not diverged") +
          "; discrepancy " + Fmt(f_start) + " -> " + Fmt(f_end)));
  r.checks.push_back(Check("alpha=" + FormatDouble(alphas[2]) + " discrepancy <= alpha=" +
                               FormatDouble(alphas[1]),
                           r.runs[2].discrepancy <= r.runs[1].discrepancy,
                           Fmt(r.runs[2].discrepancy) + " vs " + Fmt(r.runs[1].discrepancy)));
  return r;
}

// ---------------------------------------------------------------------------
// Diffusion track.

AlignConfig DefaultDiffusionConfig() {
  AlignConfig c;
  c.beta = 0.004;
  c.alpha = 0.5;
  c.population_size = 2;
  c.learning_rate = 3e-4;
  c.steps = 600;
  c.batch_size = 32;
  c.optimizer = OptimizerKind::kAdam;
  c.log_every = 50;
  return c;
}

DenoiserTrainResult PretrainToy(const DiffusionToyOptions& opts, std::uint64_t seed,
                                const NoiseSchedule& schedule) {
  ToyWorld world;
  PretrainOptions p;
  p.steps = opts.pretrain_steps;
  p.batch_size = opts.pretrain_batch;
  p.learning_rate = opts.pretrain_lr;
  p.seed = seed;
  p.data_scale = opts.data_scale;
  return PretrainDenoiser(world, schedule, DenoiserShape{}, p);
}

namespace {

double RingMass(const Population& ring, double tolerance) {
  int inside = 0;
  for (const Sample& s : ring.samples) {
    const double r = std::hypot(s.x[0], s.x[1]);
    if (std::abs(r - 6.0) <= tolerance) ++inside;
  }
  return static_cast<double>(inside) / ring.size();
}

DiscrepancyReport SafeDiscrepancy(const Population& pop, const OracleClassifier& classifier) {
  try {
    return FairnessDiscrepancy(pop, classifier);
  } catch (const InvalidArgument&) {
    DiscrepancyReport r;
    r.f = kNaN;
    r.n_samples = pop.size();
    return r;
  }
}

}  // namespace

DiffusionSnapshot EvaluateDenoiser(const Denoiser& model, const NoiseSchedule& schedule,
                                   const DiffusionToyOptions& opts, std::uint64_t seed,
                                   double guidance_scale) {
  RngStream root(seed);
  RngStream neutral_rng = root.Split();
  RngStream ring_rng = root.Split();
  RngStream a_rng = root.Split();
  RngStream b_rng = root.Split();
  const DiffusionGenerator gen(model, schedule, opts.data_scale, guidance_scale);
  const OracleClassifier classifier = OracleClassifier::Toy2d(opts.tau);
  DiffusionSnapshot s;
  s.neutral_samples = gen.Generate(Condition::kNeutral, opts.eval_samples, neutral_rng);
  s.neutral = SafeDiscrepancy(s.neutral_samples, classifier);
  s.ring_samples = gen.Generate(Condition::kUnrelated, opts.eval_samples, ring_rng);
  s.ring_mass = RingMass(s.ring_samples, opts.ring_tolerance);
  const int half = std::max(1, opts.eval_samples / 2);
  const std::vector<Population> attr = {gen.Generate(Condition::kAttrA, half, a_rng),
                                        gen.Generate(Condition::kAttrB, half, b_rng)};
  s.recall = Recall(attr, classifier);
  return s;
}

DiffusionToyReport RunDiffusionToy(const AlignConfig& config, const DiffusionToyOptions& opts) {
  config.Validate();
  const NoiseSchedule schedule = NoiseSchedule::Linear();
  RngStream root(config.seed);
  const std::uint64_t pretrain_seed = root.Split().NextU64();
  RngStream data_rng = root.Split();
  const std::uint64_t eval_seed = root.Split().NextU64();
  const OracleClassifier classifier = OracleClassifier::Toy2d(opts.tau);

  DiffusionToyReport r;
  r.pretrain = PretrainToy(opts, pretrain_seed, schedule);
  const Denoiser& pretrained = r.pretrain.model;
  r.before = EvaluateDenoiser(pretrained, schedule, opts, eval_seed);

  const DiffusionGenerator gen(pretrained, schedule, opts.data_scale);
  r.pairs = GeneratePairs(gen, Condition::kNeutral, kAttributeConditions, opts.pairs,
                          config.population_size, classifier, data_rng);

  TrainOptions train_opts;
  train_opts.classifier = &classifier;
  train_opts.data_scale = opts.data_scale;
  r.aligned = AlignDenoiser(ObjectiveKind::kPopAlign, pretrained, pretrained, schedule, r.pairs,
                            config, train_opts);
  r.after = EvaluateDenoiser(r.aligned.model, schedule, opts, eval_seed);

  const double f0 = r.before.neutral.f;
  const double f1 = r.after.neutral.f;
  r.checks.push_back(Check("discrepancy reduced by >= 50%", f1 <= 0.5 * f0,
                           "f " + Fmt(f0) + " -> " + Fmt(f1) + " (" +
                               Fmt(100.0 * (1.0 - f1 / f0)) + "% reduction)"));
  const double retention = r.after.ring_mass / r.before.ring_mass;
  r.checks.push_back(Check("ring mass retained >= 80%", retention >= 0.8,
                           "ring mass " + Fmt(r.before.ring_mass) + " -> " +
                               Fmt(r.after.ring_mass) + " (retention " + Fmt(retention) +
                               ")"));
  r.checks.push_back(Check("attribute recall >= 0.95", r.after.recall.overall >= 0.95,
                           "recall " + Fmt(r.before.recall.overall) + " -> " +
                               Fmt(r.after.recall.overall)));
  r.checks.push_back(Check("alignment run healthy", !r.aligned.status.diverged,
                           r.aligned.status.diverged ? r.aligned.status.reason
                                                     : "not diverged"));
  return r;
}

CfgReport RunCfgAblation(const Denoiser& pretrained, const NoiseSchedule& schedule,
                         std::span<const double> scales, const DiffusionToyOptions& opts,
                         std::uint64_t seed) {
  CfgReport r;
  const OracleClassifier classifier = OracleClassifier::Toy2d(opts.tau);
  for (double s : scales) {
    RngStream rng(seed);
    const DiffusionGenerator gen(pretrained, schedule, opts.data_scale, s);
    const Population pop = gen.Generate(Condition::kNeutral, opts.eval_samples, rng);
    r.scales.push_back(s);
    r.discrepancy.push_back(SafeDiscrepancy(pop, classifier).f);
  }
  const auto find = [&](double s) {
    for (std::size_t i = 0; i < r.scales.size(); ++i) {
      if (r.scales[i] == s) return static_cast<int>(i);
    }
    return -1;
  };
  const int i1 = find(1.0), i7 = find(7.0);
  if (i1 >= 0 && i7 >= 0) {
    r.checks.push_back(Check("discrepancy(s=7) >= discrepancy(s=1)",
                             r.discrepancy[i7] >= r.discrepancy[i1],
                             Fmt(r.discrepancy[i7]) + " vs " + Fmt(r.discrepancy[i1])));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Population refinement.

McmcReport RunMcmcDemo(const McmcOptions& opts) {
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const MixtureGenerator generator(ref);
  const OracleClassifier classifier = OracleClassifier::Mixture1d();
  const FairnessJudge judge(classifier);
  const Proposer proposer =
      GeneratorProposer(generator, Condition::kNeutral, Condition::kNeutral);
  McmcReport r;
  RngStream root(opts.seed);
  for (int run = 0; run < opts.seeds; ++run) {
    RngStream rng = root.Split();
    Population initial = generator.Generate(Condition::kAttrA, opts.population_size, rng);
    initial.condition = Condition::kNeutral;
    for (Sample& s : initial.samples) s.condition = Condition::kNeutral;
    RefineResult res = RefinePopulation(initial, proposer, judge, opts.max_steps, rng);
    ++r.runs;
    if (res.terminated) ++r.balanced;
    bool monotone = true;
    double last = judge.Score(initial);
    for (const JudgeVerdict& v : res.trace) {
      if (!v.accepted) continue;
      if (v.score_after > v.score_before || v.score_after > last) monotone = false;
      last = v.score_after;
    }
    if (monotone) ++r.monotone;
    r.steps.push_back(res.steps);
    r.final_f.push_back(SafeDiscrepancy(res.final, classifier).f);
    if (run == 0) r.example = std::move(res);
  }
  const int need = static_cast<int>(std::ceil(0.99 * r.runs));
  r.checks.push_back(Check("balanced within max steps", r.balanced >= need,
                           std::to_string(r.balanced) + " of " + std::to_string(r.runs) +
                               " runs balanced within " + std::to_string(opts.max_steps) +
                               " steps"));
  const int low_f = static_cast<int>(
      std::count_if(r.final_f.begin(), r.final_f.end(), [](double f) { return f <= 0.1; }));
  r.checks.push_back(Check("final discrepancy <= 0.1", low_f >= need,
                           std::to_string(low_f) + " of " + std::to_string(r.runs) + " runs"));
  r.checks.push_back(Check("judge score non-increasing on accepted moves",
                           r.monotone == r.runs,
                           std::to_string(r.monotone) + " of " + std::to_string(r.runs) +
                               " traces monotone"));
  return r;
}

// ---------------------------------------------------------------------------
// Oracle suite.

std::vector<CheckResult> IdentityChecks() {
  std::vector<CheckResult> out;
  const double log2 = std::log(2.0);
  RngStream rng(2024);

  // Mixture backend, theta = ref.
  const GaussianMixture ref = GaussianMixture::Reference1d();
  const MixtureBackend mix{ref, ref};
  const Population w = ref.Sample(6, rng);
  const Population l = ref.Sample(6, rng);
  std::vector<Sample> items(w.samples);
  items.insert(items.end(), l.samples.begin(), l.samples.end());
  std::vector<int> gamma(12, -1);
  std::fill(gamma.begin(), gamma.begin() + 6, +1);
  AlignConfig cfg;
  cfg.population_size = 6;
  const double zero = 0.0;
  const auto exact = [&](const std::string& name, double v) {
    out.push_back(Check(name + " = log 2 at theta = ref", v == log2,
                        "value " + FormatDouble(v) + ", log 2 = " + FormatDouble(log2)));
  };
  exact("mixture popalign",
        PopAlignLoss(mix, std::span<const Sample>(items), gamma, cfg, 1, false, &zero).loss);
  exact("mixture popalign (batch mu)",
        PopAlignLoss(mix, std::span<const Sample>(items), gamma, cfg, 1, false).loss);
  exact("mixture dpo", DpoLoss(mix, std::span<const Sample>(w.samples),
                               std::span<const Sample>(l.samples), 0.5, false)
                           .loss);
  exact("mixture population dpo",
        PopulationDpoExact(ref, ref, PreferencePair::Make(w, l), 0.5, false).loss);
  const std::vector<double> r_same = {0.3, -1.2, 4.0};
  exact("bt reward loss (equal rewards)", BtRewardLoss(r_same, r_same).loss);

  // Diffusion backend, theta = ref.
  const NoiseSchedule schedule = NoiseSchedule::Linear();
  const Denoiser net = Denoiser::Random(DenoiserShape{}, schedule.T, rng);
  const DiffusionBackend diff{net, net, schedule};
  std::vector<DiffusionPair> dw, dl, ditems;
  std::vector<int> dgamma;
  for (int i = 0; i < 4; ++i) {
    Sample x{{rng.Normal(), rng.Normal()}, Condition::kNeutral, std::nullopt};
    DiffusionPair a = MakeDiffusionPair(schedule, x, +1, rng);
    DiffusionPair b = MakeDiffusionPair(schedule, x, -1, rng);
    b.t = a.t;
    dw.push_back(a);
    dl.push_back(b);
  }
  ditems = dw;
  ditems.insert(ditems.end(), dl.begin(), dl.end());
  dgamma.assign(8, -1);
  std::fill(dgamma.begin(), dgamma.begin() + 4, +1);
  AlignConfig dcfg;
  dcfg.population_size = 4;
  exact("diffusion popalign",
        PopAlignLoss(diff, std::span<const DiffusionPair>(ditems), dgamma, dcfg, schedule.T,
                     false, &zero)
            .loss);
  exact("diffusion-dpo", DiffusionDpoLoss(diff, dw, dl, 0.5, false).loss);

  // Balanced classifier output -> f = 0. A symmetric two-attribute classifier
  // and samples at both attribute centers.
  const OracleClassifier sym(GaussianMixture({0.0, 0.0}, {-7.0, 7.0}, {0.0, 0.0}), {{0}, {1}});
  Population balanced{Condition::kNeutral, {}};
  for (double x : {-7.0, 7.0, -7.0, 7.0}) {
    balanced.samples.push_back({{x}, Condition::kNeutral, std::nullopt});
  }
  const double f = FairnessDiscrepancy(balanced, sym).f;
  out.push_back(Check("balanced classifier output gives f = 0", f == 0.0, "f = " + FormatDouble(f)));

  // Antisymmetry of the step log-ratio.
  const Denoiser other = Denoiser::Random(DenoiserShape{}, schedule.T, rng);
  bool antisym = true;
  for (const DiffusionPair& p : ditems) {
    const double a = StepLogRatio(net, other, p, schedule);
    const double b = StepLogRatio(other, net, p, schedule);
    if (a != -b) antisym = false;
  }
  out.push_back(Check("step log-ratio antisymmetry exact", antisym,
                      antisym ? "Delta(theta, ref) == -Delta(ref, theta) on 8 items"
                              : "mismatch"));

  // Jensen gap vanishes at theta = ref.
  AlignConfig jcfg;
  jcfg.population_size = 4;
  RngStream jrng(7);
  const JensenReport j = JensenBoundCheck(ref, ref, 5, jcfg, jrng);
  out.push_back(Check("jensen gap = 0 at theta = ref", j.min_gap == 0.0 && j.max_gap == 0.0,
                      "gap range [" + FormatDouble(j.min_gap) + ", " + FormatDouble(j.max_gap) +
                          "]"));
  return out;
}

JensenReport JensenCriterion(int instances, std::uint64_t seed) {
  RngStream rng(seed);
  const std::array<int, 4> ns = {1, 2, 4, 8};
  const std::array<double, 3> betas = {0.1, 0.5, 2.0};
  return RandomJensenSweep(instances, ns, betas, rng);
}

namespace {

// A random mixture whose components overlap, so every parameter has a
// resolvable gradient at the sampled points.
GaussianMixture OverlappingMixture(RngStream& rng) {
  std::vector<double> logits(3), means(3), log_stds(3);
  for (int k = 0; k < 3; ++k) {
    logits[k] = 0.5 * rng.Normal();
    means[k] = -2.0 + 4.0 * rng.Uniform();
    log_stds[k] = -0.3 + 0.6 * rng.Uniform();
  }
  return GaussianMixture(logits, means, log_stds);
}

// Folds one probe's report into a running worst case.
void Merge(FdReport& total, const FdReport& one) {
  total.checked += one.checked;
  total.skipped += one.skipped;
  if (one.max_rel_error > total.max_rel_error) total.max_rel_error = one.max_rel_error;
}

CheckResult FdCheck(const std::string& name, const FdReport& r, double tol, int probes) {
  return Check(name, r.checked > 0 && r.max_rel_error < tol,
               "max rel err " + FmtSci(r.max_rel_error) + " over " + std::to_string(r.checked) +
                   " coordinates in " + std::to_string(probes) + " probes (tol " +
                   FmtSci(tol) + ")");
}

}  // namespace

std::vector<CheckResult> GradientOracleChecks(int probes, std::uint64_t seed) {
  constexpr double kH = 1e-5;
  constexpr double kMixTol = 1e-5;
  constexpr double kDiffTol = 1e-4;
  std::vector<CheckResult> out;
  RngStream root(seed);

  // Mixture losses: full parameter vector per probe.
  FdReport pop{}, pdpo{}, dpo{}, sft{};
  RngStream mix_rng = root.Split();
  for (int p = 0; p < probes; ++p) {
    const GaussianMixture theta = OverlappingMixture(mix_rng);
    const GaussianMixture ref = OverlappingMixture(mix_rng);
    const int n = 1 + static_cast<int>(mix_rng.UniformInt(4));
    const Population w = theta.Sample(n, mix_rng);
    const Population l = ref.Sample(n, mix_rng);
    std::vector<Sample> items(w.samples);
    items.insert(items.end(), l.samples.begin(), l.samples.end());
    std::vector<int> gamma(2 * n, -1);
    std::fill(gamma.begin(), gamma.begin() + n, +1);
    AlignConfig cfg;
    cfg.population_size = n;
    cfg.beta = 0.1 + 0.9 * mix_rng.Uniform();
    cfg.alpha = mix_rng.Uniform();
    const auto params = theta.Parameters();
    GaussianMixture probe = theta;
    const auto with = [&](std::span<const double> q) -> const GaussianMixture& {
      probe.SetParameters(q);
      return probe;
    };
    const std::span<const Sample> ws(w.samples), ls(l.samples), all(items);

    // PopAlign holds mu at its base value, matching the stop-gradient.
    const ObjectiveValue base = PopAlignLoss(MixtureBackend{theta, ref}, all, gamma, cfg, 1);
    const double mu = base.mu;
    Merge(pop, FiniteDiffCheck(
                   [&](std::span<const double> q) {
                     return PopAlignLoss(MixtureBackend{with(q), ref}, all, gamma, cfg, 1,
                                         false, &mu)
                         .loss;
                   },
                   params, base.grad, kH, kMixTol));
    Merge(pdpo, FiniteDiffCheck(
                    [&](std::span<const double> q) {
                      return PopulationDpoExact(MixtureBackend{with(q), ref}, ws, ls, cfg.beta,
                                                false)
                          .loss;
                    },
                    params,
                    PopulationDpoExact(MixtureBackend{theta, ref}, ws, ls, cfg.beta).grad, kH,
                    kMixTol));
    Merge(dpo, FiniteDiffCheck(
                   [&](std::span<const double> q) {
                     return DpoLoss(MixtureBackend{with(q), ref}, ws, ls, cfg.beta, false).loss;
                   },
                   params, DpoLoss(MixtureBackend{theta, ref}, ws, ls, cfg.beta).grad, kH,
                   kMixTol));
    Merge(sft, FiniteDiffCheck(
                   [&](std::span<const double> q) { return SftLoss(with(q), ws, false).loss; },
                   params, SftLoss(theta, ws).grad, kH, kMixTol));

  }
  out.push_back(FdCheck("mixture popalign gradient", pop, kMixTol, probes));
  out.push_back(FdCheck("mixture population-dpo gradient", pdpo, kMixTol, probes));
  out.push_back(FdCheck("mixture dpo gradient", dpo, kMixTol, probes));
  out.push_back(FdCheck("mixture sft gradient", sft, kMixTol, probes));

  // Diffusion losses: one random weight per probe, cycling through fresh
  // instances every ten probes.
  FdReport ddpm{}, dpop{}, ddpo{}, dsft{};
  RngStream diff_rng = root.Split();
  const NoiseSchedule schedule = NoiseSchedule::Linear();
  const int instances = std::max(1, (probes + 9) / 10);
  int done = 0;
  for (int inst = 0; inst < instances; ++inst) {
    const Denoiser theta = Denoiser::Random(DenoiserShape{}, schedule.T, diff_rng);
    const Denoiser ref = Denoiser::Random(DenoiserShape{}, schedule.T, diff_rng);
    std::vector<DiffusionPair> w, l, items;
    for (int i = 0; i < 3; ++i) {
      const auto cond = static_cast<Condition>(diff_rng.UniformInt(kNumConditions));
      Sample a{{diff_rng.Normal(), diff_rng.Normal()}, cond, std::nullopt};
      Sample b{{diff_rng.Normal(), diff_rng.Normal()}, cond, std::nullopt};
      DiffusionPair pw = MakeDiffusionPair(schedule, a, +1, diff_rng);
      DiffusionPair pl = MakeDiffusionPair(schedule, b, -1, diff_rng);
      pl.t = pw.t;
      w.push_back(pw);
      l.push_back(pl);
    }
    w.back().condition = std::nullopt;  // exercise the null token
    items = w;
    items.insert(items.end(), l.begin(), l.end());
    std::vector<int> gamma(6, -1);
    std::fill(gamma.begin(), gamma.begin() + 3, +1);
    AlignConfig cfg;
    cfg.population_size = 3;
    // Small beta keeps the logistic terms out of saturation at random weights.
    cfg.beta = 1e-3 + 4e-3 * diff_rng.Uniform();
    const auto params = theta.params();
    Denoiser probe = theta;
    const auto with = [&](std::span<const double> q) -> const Denoiser& {
      probe.mutable_params().assign(q.begin(), q.end());
      return probe;
    };
    const DiffusionBackend base_backend{theta, ref, schedule};
    std::vector<double> g_ddpm(theta.num_parameters(), 0.0);
    DdpmLoss(theta, schedule, items, g_ddpm);
    const ObjectiveValue v_pop = PopAlignLoss(base_backend, std::span<const DiffusionPair>(items),
                                              gamma, cfg, schedule.T);
    const double mu = v_pop.mu;
    const ObjectiveValue v_dpo = DiffusionDpoLoss(base_backend, w, l, cfg.beta);
    const ObjectiveValue v_sft = SftLoss(theta, schedule, w);

    const int count = std::min(10, probes - done);
    std::vector<int> coords;
    for (int c = 0; c < count; ++c) {
      coords.push_back(static_cast<int>(diff_rng.UniformInt(params.size())));
    }
    done += count;
    Merge(ddpm, FiniteDiffCheck(
                    [&](std::span<const double> q) { return DdpmLoss(with(q), schedule, items); },
                    params, g_ddpm, kH, kDiffTol, coords));
    Merge(dpop, FiniteDiffCheck(
                    [&](std::span<const double> q) {
                      return PopAlignLoss(DiffusionBackend{with(q), ref, schedule},
                                          std::span<const DiffusionPair>(items), gamma, cfg,
                                          schedule.T, false, &mu)
                          .loss;
                    },
                    params, v_pop.grad, kH, kDiffTol, coords));
    Merge(ddpo, FiniteDiffCheck(
                    [&](std::span<const double> q) {
                      return DiffusionDpoLoss(DiffusionBackend{with(q), ref, schedule}, w, l,
                                              cfg.beta, false)
                          .loss;
                    },
                    params, v_dpo.grad, kH, kDiffTol, coords));
    Merge(dsft, FiniteDiffCheck(
                    [&](std::span<const double> q) {
                      return SftLoss(with(q), schedule, w, false).loss;
                    },
                    params, v_sft.grad, kH, kDiffTol, coords));
  }
  out.push_back(FdCheck("diffusion ddpm gradient", ddpm, kDiffTol, probes));
  out.push_back(FdCheck("diffusion popalign gradient", dpop, kDiffTol, probes));
  out.push_back(FdCheck("diffusion-dpo gradient", ddpo, kDiffTol, probes));
  out.push_back(FdCheck("diffusion sft gradient", dsft, kDiffTol, probes));
  return out;
}

VerifyReport RunVerify(const VerifyOptions& opts) {
  VerifyReport r;
  r.checks = IdentityChecks();
  r.jensen = JensenCriterion(opts.jensen_instances, opts.seed);
  r.checks.push_back(Check("jensen bound holds", r.jensen.violations == 0,
                           std::to_string(r.jensen.violations) + " violations in " +
                               std::to_string(r.jensen.evaluations) + " evaluations; min gap " +
                               FmtSci(r.jensen.min_gap)));
  for (CheckResult& c : GradientOracleChecks(opts.fd_probes, opts.seed)) {
    r.checks.push_back(std::move(c));
  }
  return r;
}

// ---------------------------------------------------------------------------
// CLI plumbing.

const std::vector<std::string>& ExperimentNames() {
  static const std::vector<std::string> names = {"repro-1d",   "ablate-beta-1d", "ablate-alpha-1d",
                                                 "diffusion-toy", "ablate-cfg",  "mcmc-demo",
                                                 "verify"};
  return names;
}

bool IsExperimentName(std::string_view name) {
  const auto& names = ExperimentNames();
  return std::find(names.begin(), names.end(), name) != names.end();
}

AlignConfig DefaultConfigFor(std::string_view name) {
  if (name == "diffusion-toy" || name == "ablate-cfg") return DefaultDiffusionConfig();
  return Default1dConfig();
}

const std::vector<std::string>& ExperimentOptionKeys() {
  static const std::vector<std::string> keys = {
      "pairs",         "tau",          "pretrain_steps", "pretrain_batch", "pretrain_lr",
      "data_scale",    "eval_samples", "ring_tolerance", "mcmc_seeds",     "mcmc_steps",
      "fd_probes",     "jensen_instances"};
  return keys;
}

std::string GitBlobSha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

void WriteText(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

template <class T>
std::string ToText(const T& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

double OptionDouble(const ExperimentSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.options.find(key);
  return it == spec.options.end() ? fallback : ParseDouble(it->second);
}

int OptionInt(const ExperimentSpec& spec, const std::string& key, int fallback) {
  const auto it = spec.options.find(key);
  return it == spec.options.end() ? fallback : std::stoi(it->second);
}

Track1dOptions Track1dFrom(const ExperimentSpec& spec) {
  Track1dOptions o;
  o.pairs = OptionInt(spec, "pairs", o.pairs);
  o.tau = OptionDouble(spec, "tau", o.tau);
  return o;
}

DiffusionToyOptions DiffusionFrom(const ExperimentSpec& spec) {
  DiffusionToyOptions o;
  o.pairs = OptionInt(spec, "pairs", o.pairs);
  o.tau = OptionDouble(spec, "tau", o.tau);
  o.pretrain_steps = OptionInt(spec, "pretrain_steps", o.pretrain_steps);
  o.pretrain_batch = OptionInt(spec, "pretrain_batch", o.pretrain_batch);
  o.pretrain_lr = OptionDouble(spec, "pretrain_lr", o.pretrain_lr);
  o.data_scale = OptionDouble(spec, "data_scale", o.data_scale);
  o.eval_samples = OptionInt(spec, "eval_samples", o.eval_samples);
  o.ring_tolerance = OptionDouble(spec, "ring_tolerance", o.ring_tolerance);
  return o;
}

const std::string kReport1dHeader =
    "run,objective,beta,alpha,n,w1,w2,w3,discrepancy,kl,detection,converged,diverged,steps\n";

std::string Report1dRow(const Run1d& r) {
  std::ostringstream os;
  os << r.label << ',' << ObjectiveName(r.kind) << ',' << FormatDouble(r.config.beta) << ','
     << FormatDouble(r.config.alpha) << ',' << r.config.population_size;
  for (double w : r.weights) os << ',' << FormatDouble(w);
  os << ',' << FormatDouble(r.discrepancy) << ',' << FormatDouble(r.kl) << ','
     << FormatDouble(r.detection) << ',' << (r.result.status.converged ? 1 : 0) << ','
     << (r.result.status.diverged ? 1 : 0) << ',' << r.result.status.steps_run << '\n';
  return os.str();
}

std::string DensitySvg(const std::string& title,
                       const std::vector<std::pair<std::string, const GaussianMixture*>>& models) {
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < models.size(); ++i) {
    PlotSeries s;
    s.label = models[i].first;
    s.color = kColors[i % 5];
    for (int k = 0; k <= 480; ++k) {
      const double x = -12.0 + 24.0 * k / 480.0;
      const double xs[1] = {x};
      s.x.push_back(x);
      s.y.push_back(std::exp(models[i].second->LogProb(xs)));
    }
    series.push_back(std::move(s));
  }
  return LinePlotSvg({title, "x", "density", 640, 400}, series);
}

std::string TraceText(const TraceLog& t) {
  return ToText([&](std::ostream& os) { t.WriteCsv(os); });
}

std::string CheckCsv(std::span<const CheckResult> checks) {
  std::ostringstream os;
  os << "check,passed,detail\n";
  for (const CheckResult& c : checks) {
    std::string d = c.detail;
    std::replace(d.begin(), d.end(), ',', ';');
    os << c.name << ',' << (c.passed ? 1 : 0) << ',' << d << '\n';
  }
  return os.str();
}

void PrintChecks(std::ostream& log, std::span<const CheckResult> checks) {
  for (const CheckResult& c : checks) {
    log << (c.passed ? "  ok    " : "  FAIL  ") << c.name << ": " << c.detail << '\n';
  }
}

// Config echo plus content hashes of every input artifact.
void WriteManifest(const ExperimentSpec& spec,
                   const std::vector<std::pair<std::string, std::string>>& inputs) {
  std::ostringstream os;
  const std::string config_text = ToText([&](std::ostream& o) { WriteConfig(o, spec.config); });
  os << "# popalign manifest\nexperiment = " << spec.name << '\n' << config_text;
  for (const auto& [k, v] : spec.options) os << k << " = " << v << '\n';
  std::string all = spec.name + '\n' + config_text;
  for (const auto& [k, v] : spec.options) all += k + " = " + v + '\n';
  for (const auto& [name, content] : inputs) {
    os << "sha1 " << name << " = " << GitBlobSha1(content) << '\n';
    all += content;
  }
  os << "sha1 inputs = " << GitBlobSha1(all) << '\n';
  WriteText(spec.out_dir / "manifest.txt", os.str());
}

int Finish(std::ostream& log, const std::string& name, std::span<const CheckResult> checks) {
  PrintChecks(log, checks);
  const bool ok = AllPassed(checks);
  log << name << ": " << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? 0 : 1;
}

int RunRepro(const ExperimentSpec& spec, std::ostream& log) {
  const Track1dOptions opts = Track1dFrom(spec);
  const Repro1dReport r = RunRepro1d(spec.config, opts);
  const std::string dataset = ToText([&](std::ostream& os) { WritePairs(os, r.pairs); });
  WriteText(spec.out_dir / "dataset.txt", dataset);
  WriteText(spec.out_dir / "trace.csv", TraceText(r.popalign.result.trace));
  WriteText(spec.out_dir / "trace_sft.csv", TraceText(r.sft.result.trace));
  WriteText(spec.out_dir / "report.csv",
            kReport1dHeader + Report1dRow(r.popalign) + Report1dRow(r.sft));
  WriteText(spec.out_dir / "checks.csv", CheckCsv(r.checks));
  WriteText(spec.out_dir / "popalign_model.csv",
            ToText([&](std::ostream& os) { r.popalign.result.model.Write(os); }));
  WriteText(spec.out_dir / "sft_model.csv",
            ToText([&](std::ostream& os) { r.sft.result.model.Write(os); }));
  const GaussianMixture ref = GaussianMixture::Reference1d();
  WriteText(spec.out_dir / "density.svg",
            DensitySvg("1D mixture: reference vs aligned",
                       {{"reference", &ref},
                        {"popalign", &r.popalign.result.model},
                        {"sft", &r.sft.result.model}}));
  WriteManifest(spec, {{"dataset.txt", dataset}});
  log << "repro-1d: popalign w = (" << Fmt(r.popalign.weights[0]) << ", "
      << Fmt(r.popalign.weights[1]) << ", " << Fmt(r.popalign.weights[2])
      << "), discrepancy " << Fmt(r.popalign.discrepancy) << "; sft w2 = "
      << Fmt(r.sft.weights[1]) << '\n';
  return Finish(log, spec.name, r.checks);
}

int RunSweep(const ExperimentSpec& spec, std::ostream& log, bool beta) {
  const Track1dOptions opts = Track1dFrom(spec);
  const std::vector<double> values =
      beta ? std::vector<double>{0.1, 0.5, 0.9} : std::vector<double>{0.25, 0.5, 0.75};
  const SweepReport r = beta ? RunBetaSweep(spec.config, values, opts)
                             : RunAlphaSweep(spec.config, values, opts);
  std::string report = kReport1dHeader;
  std::vector<std::pair<std::string, const GaussianMixture*>> models;
  const GaussianMixture ref = GaussianMixture::Reference1d();
  models.push_back({"reference", &ref});
  for (const Run1d& run : r.runs) {
    report += Report1dRow(run);
    const std::string dir = r.parameter + "_" + FormatDouble(beta ? run.config.beta
                                                                    : run.config.alpha);
    WriteText(spec.out_dir / dir / "trace.csv", TraceText(run.result.trace));
    WriteText(spec.out_dir / dir / "model.csv",
              ToText([&](std::ostream& os) { run.result.model.Write(os); }));
    models.push_back({run.label, &run.result.model});
    log << r.parameter << " sweep: " << run.label << " w = (" << Fmt(run.weights[0]) << ", "
        << Fmt(run.weights[1]) << ", " << Fmt(run.weights[2]) << "), discrepancy "
        << Fmt(run.discrepancy) << ", KL " << Fmt(run.kl)
        << (run.result.status.diverged ? ", diverged" : "") << '\n';
  }
  WriteText(spec.out_dir / "report.csv", report);
  WriteText(spec.out_dir / "checks.csv", CheckCsv(r.checks));
  WriteText(spec.out_dir / "density.svg", DensitySvg("1D " + r.parameter + " sweep", models));
  const auto pairs = Make1dPairs(spec.config, opts);
  const std::string dataset = ToText([&](std::ostream& os) { WritePairs(os, pairs); });
  WriteText(spec.out_dir / "dataset.txt", dataset);
  WriteManifest(spec, {{"dataset.txt", dataset}});
  return Finish(log, spec.name, r.checks);
}

std::string ScatterOf(const std::string& title, const Population& a, const std::string& la,
                      const Population& b, const std::string& lb) {
  std::vector<PlotSeries> series(2);
  series[0].label = la;
  series[0].color = kColors[0];
  series[1].label = lb;
  series[1].color = kColors[1];
  for (const Sample& s : a.samples) series[0].x.push_back(s.x[0]), series[0].y.push_back(s.x[1]);
  for (const Sample& s : b.samples) series[1].x.push_back(s.x[0]), series[1].y.push_back(s.x[1]);
  return ScatterPlotSvg({title, "x1", "x2", 640, 480}, series);
}

std::string SnapshotRow(const std::string& label, const DiffusionSnapshot& s) {
  std::ostringstream os;
  os << label << ',' << FormatDouble(s.neutral.f) << ','
     << FormatDouble(s.neutral.expected.empty() ? kNaN : s.neutral.expected[0]) << ','
     << FormatDouble(s.neutral.expected.empty() ? kNaN : s.neutral.expected[1]) << ','
     << s.neutral.n_detected << ',' << s.neutral.n_samples << ',' << FormatDouble(s.ring_mass)
     << ',' << FormatDouble(s.recall.overall) << '\n';
  return os.str();
}

int RunDiffusion(const ExperimentSpec& spec, std::ostream& log) {
  const DiffusionToyOptions opts = DiffusionFrom(spec);
  const DiffusionToyReport r = RunDiffusionToy(spec.config, opts);
  const std::string dataset = ToText([&](std::ostream& os) { WritePairs(os, r.pairs); });
  WriteText(spec.out_dir / "dataset.txt", dataset);
  WriteText(spec.out_dir / "pretrain_trace.csv", TraceText(r.pretrain.trace));
  WriteText(spec.out_dir / "trace.csv", TraceText(r.aligned.trace));
  WriteText(spec.out_dir / "pretrained.ckpt",
            ToText([&](std::ostream& os) { r.pretrain.model.Write(os); }));
  WriteText(spec.out_dir / "aligned.ckpt",
            ToText([&](std::ostream& os) { r.aligned.model.Write(os); }));
  WriteText(spec.out_dir / "report.csv",
            "model,discrepancy,p_attr_a,p_attr_b,n_detected,n_samples,ring_mass,recall\n" +
                SnapshotRow("pretrained", r.before) + SnapshotRow("popalign", r.after));
  WriteText(spec.out_dir / "checks.csv", CheckCsv(r.checks));
  WriteText(spec.out_dir / "neutral.svg",
            ScatterOf("neutral-condition samples", r.before.neutral_samples, "pretrained",
                      r.after.neutral_samples, "popalign"));
  WriteText(spec.out_dir / "unrelated.svg",
            ScatterOf("unrelated-condition samples", r.before.ring_samples, "pretrained",
                      r.after.ring_samples, "popalign"));
  WriteManifest(spec, {{"dataset.txt", dataset}});
  log << "diffusion-toy: discrepancy " << Fmt(r.before.neutral.f) << " -> "
      << Fmt(r.after.neutral.f) << ", ring mass " << Fmt(r.before.ring_mass) << " -> "
      << Fmt(r.after.ring_mass) << ", recall " << Fmt(r.after.recall.overall) << '\n';
  return Finish(log, spec.name, r.checks);
}

int RunCfg(const ExperimentSpec& spec, std::ostream& log) {
  const DiffusionToyOptions opts = DiffusionFrom(spec);
  const NoiseSchedule schedule = NoiseSchedule::Linear();
  RngStream root(spec.config.seed);
  const std::uint64_t pretrain_seed = root.Split().NextU64();
  const DenoiserTrainResult pre = PretrainToy(opts, pretrain_seed, schedule);
  const std::vector<double> scales = {0.0, 1.0, 3.0, 5.0, 7.0};
  const CfgReport r = RunCfgAblation(pre.model, schedule, scales, opts, root.Split().NextU64());
  std::ostringstream report;
  report << "guidance_scale,discrepancy\n";
  std::vector<PlotSeries> series(1);
  series[0].label = "pretrained";
  for (std::size_t i = 0; i < r.scales.size(); ++i) {
    report << FormatDouble(r.scales[i]) << ',' << FormatDouble(r.discrepancy[i]) << '\n';
    series[0].x.push_back(r.scales[i]);
    series[0].y.push_back(r.discrepancy[i]);
    log << "ablate-cfg: s = " << r.scales[i] << " discrepancy " << Fmt(r.discrepancy[i]) << '\n';
  }
  WriteText(spec.out_dir / "report.csv", report.str());
  WriteText(spec.out_dir / "checks.csv", CheckCsv(r.checks));
  WriteText(spec.out_dir / "pretrain_trace.csv", TraceText(pre.trace));
  const std::string ckpt = ToText([&](std::ostream& os) { pre.model.Write(os); });
  WriteText(spec.out_dir / "pretrained.ckpt", ckpt);
  WriteText(spec.out_dir / "cfg.svg",
            LinePlotSvg({"discrepancy vs guidance scale", "guidance scale", "discrepancy", 640,
                         400},
                        series));
  WriteManifest(spec, {{"pretrained.ckpt", ckpt}});
  return Finish(log, spec.name, r.checks);
}

int RunMcmc(const ExperimentSpec& spec, std::ostream& log) {
  McmcOptions opts;
  opts.seed = spec.config.seed;
  opts.population_size = spec.config.population_size > 1 ? spec.config.population_size : 10;
  opts.seeds = OptionInt(spec, "mcmc_seeds", opts.seeds);
  opts.max_steps = OptionInt(spec, "mcmc_steps", opts.max_steps);
  const McmcReport r = RunMcmcDemo(opts);
  std::ostringstream report;
  report << "run,steps,final_discrepancy\n";
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    report << i << ',' << r.steps[i] << ',' << FormatDouble(r.final_f[i]) << '\n';
  }
  std::ostringstream trace;
  trace << "step,accepted,score_before,score_after,terminated\n";
  for (const JudgeVerdict& v : r.example.trace) {
    trace << v.step << ',' << (v.accepted ? 1 : 0) << ',' << FormatDouble(v.score_before) << ','
          << FormatDouble(v.score_after) << ',' << (v.terminated ? 1 : 0) << '\n';
  }
  WriteText(spec.out_dir / "report.csv", report.str());
  WriteText(spec.out_dir / "trace.csv", trace.str());
  WriteText(spec.out_dir / "checks.csv", CheckCsv(r.checks));
  const std::string refined =
      ToText([&](std::ostream& os) { WritePopulation(os, r.example.final); });
  WriteText(spec.out_dir / "refined_population.txt", refined);
  WriteManifest(spec, {});
  int max_steps = 0;
  for (int s : r.steps) max_steps = std::max(max_steps, s);
  log << "mcmc-demo: " << r.balanced << "/" << r.runs << " balanced, longest chain "
      << max_steps << " steps\n";
  return Finish(log, spec.name, r.checks);
}

int RunVerifyExperiment(const ExperimentSpec& spec, std::ostream& log) {
  VerifyOptions opts;
  opts.seed = spec.config.seed;
  opts.fd_probes = OptionInt(spec, "fd_probes", opts.fd_probes);
  opts.jensen_instances = OptionInt(spec, "jensen_instances", opts.jensen_instances);
  const VerifyReport r = RunVerify(opts);
  WriteText(spec.out_dir / "report.csv", CheckCsv(r.checks));
  WriteManifest(spec, {});
  return Finish(log, spec.name, r.checks);
}

}  // namespace

int RunExperiment(const ExperimentSpec& spec, std::ostream& log) {
  spec.config.Validate();
  for (const auto& [key, value] : spec.options) {
    const auto& keys = ExperimentOptionKeys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw InvalidArgument("unknown experiment option: " + key);
    }
  }
  std::filesystem::create_directories(spec.out_dir);
  if (spec.name == "repro-1d") return RunRepro(spec, log);
  if (spec.name == "ablate-beta-1d") return RunSweep(spec, log, true);
  if (spec.name == "ablate-alpha-1d") return RunSweep(spec, log, false);
  if (spec.name == "diffusion-toy") return RunDiffusion(spec, log);
  if (spec.name == "ablate-cfg") return RunCfg(spec, log);
  if (spec.name == "mcmc-demo") return RunMcmc(spec, log);
  if (spec.name == "verify") return RunVerifyExperiment(spec, log);
  throw InvalidArgument("unknown experiment: " + spec.name);
}

}  // namespace popalign
