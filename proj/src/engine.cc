// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/engine.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "popalign/metrics.h"
#include "popalign/objectives.h"

namespace popalign {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool AllFinite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Pair indices for one step: every pair in order for full batch, otherwise a
// uniform draw without replacement.
std::vector<int> SelectBatch(int num_pairs, int batch_size, RngStream& rng) {
  std::vector<int> idx(num_pairs);
  std::iota(idx.begin(), idx.end(), 0);
  if (batch_size <= 0 || batch_size >= num_pairs) return idx;
  for (int i = 0; i < batch_size; ++i) {
    const int j = i + static_cast<int>(rng.UniformInt(num_pairs - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(batch_size);
  return idx;
}

// Tracks the relative-loss-change convergence rule.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(int window, double tol) : window_(window), tol_(tol) {}
  bool Add(double loss) {
    history_.push_back(loss);
    const std::size_t n = history_.size();
    if (window_ < 1 || n <= static_cast<std::size_t>(window_)) return false;
    const double old = history_[n - 1 - window_];
    const double denom = std::max(std::abs(old), std::numeric_limits<double>::min());
    return std::abs(loss - old) / denom < tol_;
  }

 private:
  int window_;
  double tol_;
  std::vector<double> history_;
};

std::vector<std::string> WeightColumns(int k) {
  std::vector<std::string> cols;
  for (int i = 1; i <= k; ++i) cols.push_back("w" + std::to_string(i));
  return cols;
}

}  // namespace

// ---------------------------------------------------------------------------
// Optimizers.

Adam::Adam(int num_params, double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  state_.m.assign(num_params, 0.0);
  state_.v.assign(num_params, 0.0);
}

void Adam::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != state_.m.size() || grad.size() != state_.m.size()) {
    throw InvalidArgument("adam: parameter and gradient sizes must match its state");
  }
  ++state_.step;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(state_.step));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(state_.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state_.m[i] = beta1_ * state_.m[i] + (1.0 - beta1_) * grad[i];
    state_.v[i] = beta2_ * state_.v[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = state_.m[i] / c1;
    const double v_hat = state_.v[i] / c2;
    params[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) + weight_decay_ * params[i]);
  }
}

void Sgd::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw InvalidArgument("sgd: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr_ * (grad[i] + weight_decay_ * params[i]);
  }
}

std::unique_ptr<Optimizer> MakeOptimizer(const AlignConfig& config, int num_params) {
  if (config.optimizer == OptimizerKind::kSgd) {
    return std::make_unique<Sgd>(config.learning_rate, config.weight_decay);
  }
  return std::make_unique<Adam>(num_params, config.learning_rate, config.weight_decay);
}

std::string ObjectiveName(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kPopAlign:
      return "popalign";
    case ObjectiveKind::kSft:
      return "sft";
    case ObjectiveKind::kDpo:
      return "dpo";
    case ObjectiveKind::kPopulationDpo:
      return "population-dpo";
    case ObjectiveKind::kDiffusionDpo:
      return "diffusion-dpo";
  }
  return "?";
}

ObjectiveKind ParseObjective(const std::string& name) {
  for (auto k : {ObjectiveKind::kPopAlign, ObjectiveKind::kSft, ObjectiveKind::kDpo,
                 ObjectiveKind::kPopulationDpo, ObjectiveKind::kDiffusionDpo}) {
    if (ObjectiveName(k) == name) return k;
  }
  throw InvalidArgument("unknown objective: " + name);
}

// ---------------------------------------------------------------------------
// Mixture training.

MixtureTrainResult TrainMixture(ObjectiveKind kind, const GaussianMixture& init,
                                const GaussianMixture& ref,
                                std::span<const PreferencePair> pairs,
                                const AlignConfig& config, const TrainOptions& options) {
  config.Validate();
  if (pairs.empty()) throw InvalidArgument("training needs at least one pair");
  if (kind == ObjectiveKind::kDiffusionDpo) {
    throw UnsupportedBackend("diffusion-dpo needs the diffusion backend");
  }
  for (const PreferencePair& p : pairs) p.Validate();

  const int num_pairs = static_cast<int>(pairs.size());
  GaussianMixture model = init;
  std::vector<double> params = model.Parameters();
  auto optimizer = MakeOptimizer(config, model.num_parameters());
  RngStream rng(config.seed);
  TraceLog trace(WeightColumns(model.num_components()));
  TrainStatus status;

  // Reference log-densities never change; cache them.
  std::vector<std::vector<double>> ref_w(num_pairs), ref_l(num_pairs);
  for (int p = 0; p < num_pairs; ++p) {
    for (const Sample& s : pairs[p].winner.samples) ref_w[p].push_back(ref.LogProb(s.x));
    for (const Sample& s : pairs[p].loser.samples) ref_l[p].push_back(ref.LogProb(s.x));
  }
  const double beta_prime = config.BetaPrime(1);
  const double ref_detection =
      options.classifier ? MixtureDetectionRate(ref, *options.classifier) : kNaN;

  std::vector<double> grad(model.num_parameters());
  auto evaluate = [&](std::span<const int> batch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    switch (kind) {
      case ObjectiveKind::kPopAlign: {
        std::vector<const Sample*> items;
        std::vector<double> lr;
        std::vector<int> gamma;
        for (int p : batch) {
          for (std::size_t i = 0; i < ref_w[p].size(); ++i) {
            items.push_back(&pairs[p].winner.samples[i]);
            lr.push_back(model.LogProb(items.back()->x) - ref_w[p][i]);
            gamma.push_back(+1);
          }
          for (std::size_t i = 0; i < ref_l[p].size(); ++i) {
            items.push_back(&pairs[p].loser.samples[i]);
            lr.push_back(model.LogProb(items.back()->x) - ref_l[p][i]);
            gamma.push_back(-1);
          }
        }
        const double mu = BatchNormalizer(lr, gamma, config.alpha);
        const LossAndGrad res = PopAlignFromLogRatios(lr, gamma, beta_prime, mu);
        for (std::size_t i = 0; i < items.size(); ++i) {
          model.AccumulateGradLogProb(items[i]->x, res.d_inputs[i], grad);
        }
        return res.loss;
      }
      case ObjectiveKind::kPopulationDpo:
      case ObjectiveKind::kDpo: {
        double loss = 0.0;
        for (int p : batch) {
          const auto& w = pairs[p].winner.samples;
          const auto& l = pairs[p].loser.samples;
          std::vector<double> lr_w(w.size()), lr_l(l.size());
          for (std::size_t i = 0; i < w.size(); ++i) lr_w[i] = model.LogProb(w[i].x) - ref_w[p][i];
          for (std::size_t i = 0; i < l.size(); ++i) lr_l[i] = model.LogProb(l[i].x) - ref_l[p][i];
          const LossAndGrad res = kind == ObjectiveKind::kDpo
                                      ? DpoFromLogRatios(lr_w, lr_l, config.beta)
                                      : PopulationDpoFromLogRatios(lr_w, lr_l, config.beta);
          loss += res.loss * inv_b;
          const std::size_t n = w.size();
          for (std::size_t i = 0; i < n; ++i) {
            model.AccumulateGradLogProb(w[i].x, res.d_inputs[i] * inv_b, grad);
            model.AccumulateGradLogProb(l[i].x, res.d_inputs[n + i] * inv_b, grad);
          }
        }
        return loss;
      }
      case ObjectiveKind::kSft: {
        std::vector<Sample> winners;
        for (int p : batch) {
          winners.insert(winners.end(), pairs[p].winner.samples.begin(),
                         pairs[p].winner.samples.end());
        }
        ObjectiveValue v = SftLoss(model, winners);
        grad = std::move(v.grad);
        return v.loss;
      }
      case ObjectiveKind::kDiffusionDpo:
        break;
    }
    return kNaN;
  };

  auto log_row = [&](int step, double loss) {
    TraceLog::Row row;
    row.iter = step;
    row.loss = loss;
    row.discrepancy = kNaN;
    if (options.classifier) {
      try {
        row.discrepancy =
            MixtureDiscrepancy(model, *options.classifier, {}, -25.0, 25.0, options.trace_nodes).f;
      } catch (const InvalidArgument&) {
        // No accepted mass at all: the discrepancy is undefined.
      }
    }
    row.extra = model.Weights();
    trace.Append(std::move(row));
    if (options.classifier && !status.diverged) {
      const double rate = MixtureDetectionRate(model, *options.classifier, -25.0, 25.0,
                                               options.trace_nodes);
      if (rate < options.collapse_ratio * ref_detection) {
        status.diverged = true;
        status.reason = "detection collapse: accepted mass " + FormatDouble(rate) +
                        " vs reference " + FormatDouble(ref_detection);
      }
    }
  };

  ConvergenceMonitor monitor(options.converge_window, options.converge_tol);
  for (int step = 0;; ++step) {
    const auto batch = SelectBatch(num_pairs, config.batch_size, rng);
    const double loss = evaluate(batch);
    status.steps_run = step;
    if (!std::isfinite(loss) || !AllFinite(grad)) {
      status.diverged = true;
      status.reason = "non-finite loss or gradient at step " + std::to_string(step);
      TraceLog::Row row{step, loss, kNaN, model.Weights(), 0.0};
      trace.Append(std::move(row));
      break;
    }
    const bool at_end = step == config.steps;
    const bool converged = monitor.Add(loss);
    if (converged) status.converged = true;
    const bool stop = at_end || (converged && options.stop_on_convergence);
    if (step % config.log_every == 0 || stop) log_row(step, loss);
    if (stop) break;
    optimizer->Step(params, grad);
    model.SetParameters(params);
  }
  return {std::move(model), std::move(trace), std::move(status)};
}

// ---------------------------------------------------------------------------
// Diffusion training.

namespace {

constexpr std::array<Condition, 4> kAllConditions = {
    Condition::kNeutral, Condition::kAttrA, Condition::kAttrB, Condition::kUnrelated};

Sample Scaled(const Sample& s, double inv_scale) {
  Sample out = s;
  for (double& v : out.x) v *= inv_scale;
  return out;
}

void FillNoise(DiffusionPair& p, int dim, RngStream& rng) {
  p.epsilon.resize(dim);
  for (double& e : p.epsilon) e = rng.Normal();
}

}  // namespace

DenoiserTrainResult PretrainDenoiser(const Generator& world, const NoiseSchedule& schedule,
                                     const DenoiserShape& shape,
                                     const PretrainOptions& options) {
  if (options.steps < 0 || options.batch_size < 1) {
    throw InvalidArgument("pretraining needs steps >= 0 and batch_size >= 1");
  }
  if (shape.dim != world.dim()) throw InvalidArgument("denoiser and data dimensions differ");
  RngStream rng(options.seed);
  RngStream init_rng = rng.Split();
  RngStream data_rng = rng.Split();
  Denoiser model = Denoiser::Random(shape, schedule.T, init_rng);
  Adam adam(model.num_parameters(), options.learning_rate);
  TraceLog trace;
  TrainStatus status;
  const double inv_scale = 1.0 / options.data_scale;
  std::vector<DiffusionPair> batch(options.batch_size);
  std::vector<double> grad(model.num_parameters());
  for (int step = 0; step <= options.steps; ++step) {
    for (DiffusionPair& p : batch) {
      const Condition c = kAllConditions[data_rng.UniformInt(kAllConditions.size())];
      Sample x0 = Scaled(world.Generate(c, 1, data_rng).samples.front(), inv_scale);
      p = MakeDiffusionPair(schedule, x0, +1, data_rng);
      if (data_rng.Uniform() < options.condition_dropout) p.condition = std::nullopt;
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    const double loss = DdpmLoss(model, schedule, batch, grad);
    status.steps_run = step;
    if (!std::isfinite(loss) || !AllFinite(grad)) {
      status.diverged = true;
      status.reason = "non-finite loss or gradient at step " + std::to_string(step);
      trace.Append({step, loss, kNaN, {}, 0.0});
      break;
    }
    if (step % options.log_every == 0 || step == options.steps) {
      trace.Append({step, loss, kNaN, {}, 0.0});
    }
    if (step == options.steps) break;
    adam.Step(model.mutable_params(), grad);
  }
  return {std::move(model), std::move(trace), std::move(status)};
}

DenoiserTrainResult AlignDenoiser(ObjectiveKind kind, const Denoiser& init,
                                  const Denoiser& ref, const NoiseSchedule& schedule,
                                  std::span<const PreferencePair> pairs,
                                  const AlignConfig& config, const TrainOptions& options) {
  config.Validate();
  if (pairs.empty()) throw InvalidArgument("training needs at least one pair");
  if (kind == ObjectiveKind::kDpo || kind == ObjectiveKind::kPopulationDpo) {
    throw UnsupportedBackend(ObjectiveName(kind) + " needs exact likelihoods");
  }
  const int dim = init.shape().dim;
  const double inv_scale = 1.0 / options.data_scale;
  // Model-space copies of the data.
  std::vector<PreferencePair> data;
  data.reserve(pairs.size());
  for (const PreferencePair& p : pairs) {
    p.Validate();
    PreferencePair q = p;
    for (Sample& s : q.winner.samples) s = Scaled(s, inv_scale);
    for (Sample& s : q.loser.samples) s = Scaled(s, inv_scale);
    data.push_back(std::move(q));
  }
  const int num_pairs = static_cast<int>(data.size());

  Denoiser model = init;
  auto optimizer = MakeOptimizer(config, model.num_parameters());
  RngStream rng(config.seed);
  RngStream batch_rng = rng.Split();
  RngStream noise_rng = rng.Split();
  const RngStream eval_rng = rng.Split();
  TraceLog trace({"detected"});
  TrainStatus status;
  const double beta_prime = config.BetaPrime(schedule.T);

  // Detection rate and discrepancy of neutral samples, always from the same
  // eval stream so logged values are comparable across steps.
  auto evaluate_samples = [&](const Denoiser& m, double* f) {
    RngStream r = eval_rng;
    DiffusionGenerator gen(m, schedule, options.data_scale);
    const Population pop = gen.Generate(Condition::kNeutral, options.eval_samples, r);
    int detected = 0;
    for (const Sample& s : pop.samples) detected += options.classifier->Filter(s.x) ? 1 : 0;
    *f = kNaN;
    if (detected > 0) *f = FairnessDiscrepancy(pop, *options.classifier).f;
    return static_cast<double>(detected) / pop.size();
  };
  double ref_detection = kNaN;
  if (options.classifier) {
    double unused;
    ref_detection = evaluate_samples(ref, &unused);
  }

  struct Item {
    DiffusionPair pair;
    Denoiser::Activations act;
    double lr = 0.0;
  };
  std::vector<Item> items;
  std::vector<double> grad(model.num_parameters());

  auto evaluate = [&](std::span<const int> batch) {
    // Build items with fresh (t, eps); loser i of a pair shares winner i's t.
    items.clear();
    for (int p : batch) {
      const auto& w = data[p].winner.samples;
      const auto& l = data[p].loser.samples;
      for (std::size_t i = 0; i < w.size(); ++i) {
        Item wi, li;
        wi.pair = MakeDiffusionPair(schedule, w[i], +1, noise_rng);
        li.pair.x0 = l[i].x;
        li.pair.t = wi.pair.t;
        li.pair.condition = l[i].condition;
        li.pair.gamma = -1;
        FillNoise(li.pair, dim, noise_rng);
        items.push_back(std::move(wi));
        items.push_back(std::move(li));
      }
    }
    // Forward passes.
    for (Item& it : items) {
      if (kind == ObjectiveKind::kSft && it.pair.gamma < 0) continue;
      const auto x_t = DiffuseWithNoise(schedule, it.pair.x0, it.pair.t, it.pair.epsilon);
      model.Forward(x_t, it.pair.t, it.pair.condition, it.act);
      double err_theta = 0.0, err_ref = 0.0;
      if (kind != ObjectiveKind::kSft) {
        const auto e_ref = ref.Forward(x_t, it.pair.t, it.pair.condition);
        for (int j = 0; j < dim; ++j) {
          const double b = it.pair.epsilon[j] - e_ref[j];
          err_ref += b * b;
        }
      }
      for (int j = 0; j < dim; ++j) {
        const double a = it.pair.epsilon[j] - it.act.out[j];
        err_theta += a * a;
      }
      it.lr = -(err_theta - err_ref);
    }
    // Loss and d loss / d lr per item.
    std::vector<double> d_lr(items.size(), 0.0);
    double loss = 0.0;
    if (kind == ObjectiveKind::kPopAlign) {
      std::vector<double> lr(items.size());
      std::vector<int> gamma(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        lr[i] = items[i].lr;
        gamma[i] = items[i].pair.gamma;
      }
      const double mu = BatchNormalizer(lr, gamma, config.alpha);
      LossAndGrad res = PopAlignFromLogRatios(lr, gamma, beta_prime, mu);
      loss = res.loss;
      d_lr = std::move(res.d_inputs);
    } else if (kind == ObjectiveKind::kDiffusionDpo) {
      const std::size_t n = items.size() / 2;
      std::vector<double> lr_w(n), lr_l(n);
      for (std::size_t i = 0; i < n; ++i) {
        lr_w[i] = items[2 * i].lr;
        lr_l[i] = items[2 * i + 1].lr;
      }
      LossAndGrad res = DpoFromLogRatios(lr_w, lr_l, config.beta * schedule.T);
      loss = res.loss;
      for (std::size_t i = 0; i < n; ++i) {
        d_lr[2 * i] = res.d_inputs[i];
        d_lr[2 * i + 1] = res.d_inputs[n + i];
      }
    } else {
      // SFT: mean ||eps - eps_theta||^2 over winners = mean of -lr.
      const double inv_n = 2.0 / static_cast<double>(items.size());
      for (std::size_t i = 0; i < items.size(); i += 2) {
        loss -= items[i].lr * inv_n;
        d_lr[i] = -inv_n;
      }
    }
    // Backward passes: dlr/d eps_theta = 2 (eps - eps_theta).
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> upstream(dim);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (d_lr[i] == 0.0) continue;
      const Item& it = items[i];
      for (int j = 0; j < dim; ++j) {
        upstream[j] = d_lr[i] * 2.0 * (it.pair.epsilon[j] - it.act.out[j]);
      }
      model.Backward(it.act, upstream, grad);
    }
    return loss;
  };

  auto log_row = [&](int step, double loss) {
    TraceLog::Row row{step, loss, kNaN, {kNaN}, 0.0};
    if (options.classifier) {
      row.extra[0] = evaluate_samples(model, &row.discrepancy);
      if (!status.diverged && row.extra[0] < options.collapse_ratio * ref_detection) {
        status.diverged = true;
        status.reason = "detection collapse: detected fraction " + FormatDouble(row.extra[0]) +
                        " vs reference " + FormatDouble(ref_detection);
      }
    }
    trace.Append(std::move(row));
  };

  for (int step = 0;; ++step) {
    const auto batch = SelectBatch(num_pairs, config.batch_size, batch_rng);
    const double loss = evaluate(batch);
    status.steps_run = step;
    if (!std::isfinite(loss) || !AllFinite(grad)) {
      status.diverged = true;
      status.reason = "non-finite loss or gradient at step " + std::to_string(step);
      trace.Append({step, loss, kNaN, {kNaN}, 0.0});
      break;
    }
    const bool at_end = step == config.steps;
    if (step % config.log_every == 0 || at_end) log_row(step, loss);
    if (at_end) break;
    optimizer->Step(model.mutable_params(), grad);
  }
  return {std::move(model), std::move(trace), std::move(status)};
}

// ---------------------------------------------------------------------------
// Verification oracles.

FdReport FiniteDiffCheck(const LossClosure& loss, std::span<const double> params,
                         std::span<const double> analytic, double h, double tol,
                         std::span<const int> coords) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (analytic.size() != params.size()) throw InvalidArgument("gradient size mismatch");
  std::vector<int> all;
  if (coords.empty()) {
    all.resize(params.size());
    std::iota(all.begin(), all.end(), 0);
    coords = all;
  }
  FdReport r;
  std::vector<double> probe(params.begin(), params.end());
  for (int i : coords) {
    if (i < 0 || i >= static_cast<int>(params.size())) {
      throw InvalidArgument("probe coordinate out of range");
    }
    const double a = analytic[i];
    if (std::abs(a) <= 1e-10) {
      ++r.skipped;
      continue;
    }
    probe[i] = params[i] + h;
    const double up = loss(probe);
    probe[i] = params[i] - h;
    const double down = loss(probe);
    probe[i] = params[i];
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max(std::abs(a), std::abs(numeric));
    double err = std::abs(a - numeric) / denom;
    if (std::isnan(err)) err = HUGE_VAL;
    ++r.checked;
    if (r.worst_index < 0 || err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_index = i;
    }
  }
  r.passed = r.max_rel_error < tol;
  return r;
}

JensenValues JensenPair(std::span<const double> lr_w, std::span<const double> lr_l,
                        double beta, double mu) {
  if (lr_w.size() != lr_l.size() || lr_w.empty()) {
    throw InvalidArgument("jensen check needs equal nonempty populations");
  }
  const std::size_t n = lr_w.size();
  double sum_w = 0.0, sum_l = 0.0;
  for (double v : lr_w) sum_w += v;
  for (double v : lr_l) sum_l += v;
  JensenValues out{};
  out.population = LogSigmoid(beta * (sum_w - sum_l));
  std::vector<double> lr(lr_w.begin(), lr_w.end());
  lr.insert(lr.end(), lr_l.begin(), lr_l.end());
  std::vector<int> gamma(2 * n, -1);
  std::fill(gamma.begin(), gamma.begin() + n, +1);
  const double beta_prime = 2.0 * static_cast<double>(n) * beta;
  out.bound = -PopAlignFromLogRatios(lr, gamma, beta_prime, mu).loss;
  return out;
}

JensenReport JensenBoundCheck(const GaussianMixture& theta, const GaussianMixture& ref,
                              int instances, const AlignConfig& config, RngStream& rng,
                              double slack) {
  config.Validate();
  JensenReport r;
  r.min_gap = HUGE_VAL;
  r.max_gap = -HUGE_VAL;
  const int n = config.population_size;
  MixtureBackend backend{theta, ref};
  for (int k = 0; k < instances; ++k) {
    const Population w = theta.Sample(n, rng);
    const Population l = ref.Sample(n, rng);
    std::vector<double> lr_w, lr_l;
    for (const Sample& s : w.samples) lr_w.push_back(backend.LogRatio(s));
    for (const Sample& s : l.samples) lr_l.push_back(backend.LogRatio(s));
    std::vector<double> all(lr_w);
    all.insert(all.end(), lr_l.begin(), lr_l.end());
    const double batch_mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
    for (double mu : {0.0, batch_mean}) {
      const JensenValues v = JensenPair(lr_w, lr_l, config.beta, mu);
      ++r.evaluations;
      r.min_gap = std::min(r.min_gap, v.gap());
      r.max_gap = std::max(r.max_gap, v.gap());
      if (v.gap() < -slack) ++r.violations;
    }
    ++r.instances;
  }
  return r;
}

GaussianMixture RandomMixture1d(int k, RngStream& rng) {
  std::vector<double> logits(k), means(k), log_stds(k);
  for (int i = 0; i < k; ++i) {
    logits[i] = rng.Normal();
    means[i] = -8.0 + 16.0 * rng.Uniform();
    log_stds[i] = -0.5 + rng.Uniform();
  }
  return GaussianMixture(std::move(logits), std::move(means), std::move(log_stds));
}

JensenReport RandomJensenSweep(int instances, std::span<const int> ns,
                               std::span<const double> betas, RngStream& rng, double slack) {
  if (ns.empty() || betas.empty()) throw InvalidArgument("sweep needs N and beta values");
  JensenReport total;
  total.min_gap = HUGE_VAL;
  total.max_gap = -HUGE_VAL;
  for (int i = 0; i < instances; ++i) {
    AlignConfig cfg;
    cfg.population_size = ns[i % ns.size()];
    cfg.beta = betas[(i / ns.size()) % betas.size()];
    const GaussianMixture theta = RandomMixture1d(3, rng);
    const GaussianMixture ref = RandomMixture1d(3, rng);
    const JensenReport one = JensenBoundCheck(theta, ref, 1, cfg, rng, slack);
    total.instances += one.instances;
    total.evaluations += one.evaluations;
    total.violations += one.violations;
    total.min_gap = std::min(total.min_gap, one.min_gap);
    total.max_gap = std::max(total.max_gap, one.max_gap);
  }
  return total;
}

}  // namespace popalign
