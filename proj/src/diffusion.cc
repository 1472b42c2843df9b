// Copyright 2026 The popalign Authors
// SPDX-License-Identifier: Apache-2.0

#include "popalign/diffusion.h"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace popalign {
namespace {

inline double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double Silu(double z) { return z * Sigmoid(z); }

inline double SiluDerivative(double z) {
  const double s = Sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

// out = W x + b for a row-major (rows x cols) W.
void Affine(const double* w, const double* b, const double* x, int rows, int cols,
            double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<std::size_t>(r) * cols;
    double acc = b[r];
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

constexpr char kCheckpointHeader[] = "# popalign-denoiser v1";

}  // namespace

NoiseSchedule NoiseSchedule::Linear(int T, double beta_1, double beta_T) {
  if (T < 1) throw InvalidArgument("schedule needs T >= 1");
  std::vector<double> betas(T);
  for (int i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / (T - 1);
    betas[i] = beta_1 + frac * (beta_T - beta_1);
  }
  return FromBetas(std::move(betas));
}

NoiseSchedule NoiseSchedule::FromBetas(std::vector<double> betas) {
  NoiseSchedule s;
  s.T = static_cast<int>(betas.size());
  s.betas = std::move(betas);
  s.alpha_bars.resize(s.T);
  double prod = 1.0;
  for (int i = 0; i < s.T; ++i) {
    prod *= 1.0 - s.betas[i];
    s.alpha_bars[i] = prod;
  }
  s.lambda_weights.assign(s.T, 1.0);
  s.Validate();
  return s;
}

void NoiseSchedule::CheckStep(int t) const {
  if (t < 1 || t > T) {
    throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " +
                          std::to_string(T) + "]");
  }
}

void NoiseSchedule::Validate() const {
  if (T < 1 || static_cast<int>(betas.size()) != T ||
      static_cast<int>(alpha_bars.size()) != T ||
      static_cast<int>(lambda_weights.size()) != T) {
    throw InvalidArgument("schedule arrays must have length T");
  }
  for (int i = 0; i < T; ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0)) throw InvalidArgument("betas must lie in (0, 1)");
    if (i > 0 && betas[i] < betas[i - 1]) throw InvalidArgument("betas must be ascending");
    if (!(lambda_weights[i] >= 0.0)) throw InvalidArgument("loss weights must be >= 0");
  }
}

std::vector<double> DiffuseWithNoise(const NoiseSchedule& schedule,
                                     std::span<const double> x0, int t,
                                     std::span<const double> eps) {
  schedule.CheckStep(t);
  if (x0.size() != eps.size()) throw InvalidArgument("noise and sample dimensions differ");
  const double a = std::sqrt(schedule.alpha_bar(t));
  const double b = std::sqrt(1.0 - schedule.alpha_bar(t));
  std::vector<double> x_t(x0.size());
  for (std::size_t j = 0; j < x0.size(); ++j) x_t[j] = a * x0[j] + b * eps[j];
  return x_t;
}

std::pair<std::vector<double>, std::vector<double>> ForwardDiffuse(
    const NoiseSchedule& schedule, std::span<const double> x0, int t, RngStream& rng) {
  schedule.CheckStep(t);
  std::vector<double> eps(x0.size());
  for (double& e : eps) e = rng.Normal();
  auto x_t = DiffuseWithNoise(schedule, x0, t, eps);
  return {std::move(x_t), std::move(eps)};
}

int DenoiserShape::num_parameters() const {
  return (vocab + 1) * cond_embed + hidden * input_size() + hidden + hidden * hidden +
         hidden + dim * hidden + dim;
}

Denoiser::Denoiser(DenoiserShape shape, int T)
    : shape_(shape), T_(T), params_(shape.num_parameters(), 0.0) {
  if (shape.dim < 1 || shape.hidden < 1 || shape.time_features < 0 ||
      shape.time_features % 2 != 0 || shape.cond_embed < 0 || shape.vocab < 1) {
    throw InvalidArgument("invalid denoiser shape");
  }
  if (T < 1) throw InvalidArgument("denoiser needs T >= 1");
}

Denoiser Denoiser::Random(DenoiserShape shape, int T, RngStream& rng) {
  Denoiser d(shape, T);
  const Offsets o = d.offsets();
  auto fill = [&](int begin, int count, double scale) {
    for (int i = 0; i < count; ++i) d.params_[begin + i] = scale * rng.Normal();
  };
  const int in = shape.input_size();
  const int h = shape.hidden;
  fill(o.embed, (shape.vocab + 1) * shape.cond_embed, 1.0);
  fill(o.w1, h * in, 1.0 / std::sqrt(static_cast<double>(in)));
  fill(o.w2, h * h, 1.0 / std::sqrt(static_cast<double>(h)));
  fill(o.w3, shape.dim * h, 0.1 / std::sqrt(static_cast<double>(h)));
  return d;
}

Denoiser::Offsets Denoiser::offsets() const {
  Offsets o{};
  const int in = shape_.input_size();
  const int h = shape_.hidden;
  o.embed = 0;
  o.w1 = o.embed + (shape_.vocab + 1) * shape_.cond_embed;
  o.b1 = o.w1 + h * in;
  o.w2 = o.b1 + h;
  o.b2 = o.w2 + h * h;
  o.w3 = o.b2 + h;
  o.b3 = o.w3 + shape_.dim * h;
  return o;
}

int Denoiser::Token(std::optional<Condition> c) const {
  if (!c) return shape_.vocab;
  const int token = static_cast<int>(*c);
  if (token < 0 || token >= shape_.vocab) {
    throw InvalidArgument("condition outside the denoiser vocabulary");
  }
  return token;
}

std::vector<double> Denoiser::Forward(std::span<const double> x_t, int t,
                                      std::optional<Condition> c) const {
  Activations act;
  Forward(x_t, t, c, act);
  return act.out;
}

void Denoiser::Forward(std::span<const double> x_t, int t, std::optional<Condition> c,
                       Activations& act) const {
  const int d = shape_.dim;
  const int h = shape_.hidden;
  const int f = shape_.time_features;
  const int e = shape_.cond_embed;
  const int in = shape_.input_size();
  if (static_cast<int>(x_t.size()) != d) throw InvalidArgument("denoiser input dimension");
  if (t < 1 || t > T_) throw InvalidArgument("denoiser timestep out of range");
  const Offsets o = offsets();
  act.token = Token(c);

  act.input.resize(in);
  for (int j = 0; j < d; ++j) act.input[j] = x_t[j];
  const double tau = static_cast<double>(t) / T_;
  for (int k = 0; k < f / 2; ++k) {
    const double angle = std::numbers::pi * std::ldexp(1.0, k) * tau;
    act.input[d + 2 * k] = std::sin(angle);
    act.input[d + 2 * k + 1] = std::cos(angle);
  }
  const double* emb = params_.data() + o.embed + static_cast<std::size_t>(act.token) * e;
  for (int j = 0; j < e; ++j) act.input[d + f + j] = emb[j];

  act.h1_pre.resize(h);
  act.h1.resize(h);
  Affine(params_.data() + o.w1, params_.data() + o.b1, act.input.data(), h, in,
         act.h1_pre.data());
  for (int i = 0; i < h; ++i) act.h1[i] = Silu(act.h1_pre[i]);

  act.h2_pre.resize(h);
  act.h2.resize(h);
  Affine(params_.data() + o.w2, params_.data() + o.b2, act.h1.data(), h, h,
         act.h2_pre.data());
  for (int i = 0; i < h; ++i) act.h2[i] = Silu(act.h2_pre[i]);

  act.out.resize(d);
  Affine(params_.data() + o.w3, params_.data() + o.b3, act.h2.data(), d, h, act.out.data());
}

void Denoiser::Backward(const Activations& act, std::span<const double> upstream,
                        std::span<double> grad) const {
  const int d = shape_.dim;
  const int h = shape_.hidden;
  const int f = shape_.time_features;
  const int e = shape_.cond_embed;
  const int in = shape_.input_size();
  if (static_cast<int>(upstream.size()) != d) throw InvalidArgument("upstream dimension");
  if (grad.size() != params_.size()) throw InvalidArgument("gradient buffer has wrong size");
  const Offsets o = offsets();
  const double* p = params_.data();
  double* g = grad.data();

  // Output layer.
  std::vector<double> g_h2(h, 0.0);
  for (int r = 0; r < d; ++r) {
    const double u = upstream[r];
    g[o.b3 + r] += u;
    double* gw = g + o.w3 + static_cast<std::size_t>(r) * h;
    const double* w = p + o.w3 + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) {
      gw[c] += u * act.h2[c];
      g_h2[c] += u * w[c];
    }
  }

  // Second hidden layer.
  std::vector<double> g_h1(h, 0.0);
  for (int r = 0; r < h; ++r) {
    const double u = g_h2[r] * SiluDerivative(act.h2_pre[r]);
    g[o.b2 + r] += u;
    double* gw = g + o.w2 + static_cast<std::size_t>(r) * h;
    const double* w = p + o.w2 + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) {
      gw[c] += u * act.h1[c];
      g_h1[c] += u * w[c];
    }
  }

  // First hidden layer; only the embedding slice of the input is trainable.
  std::vector<double> g_in(in, 0.0);
  for (int r = 0; r < h; ++r) {
    const double u = g_h1[r] * SiluDerivative(act.h1_pre[r]);
    g[o.b1 + r] += u;
    double* gw = g + o.w1 + static_cast<std::size_t>(r) * in;
    const double* w = p + o.w1 + static_cast<std::size_t>(r) * in;
    for (int c = 0; c < in; ++c) {
      gw[c] += u * act.input[c];
      g_in[c] += u * w[c];
    }
  }
  double* g_emb = g + o.embed + static_cast<std::size_t>(act.token) * e;
  for (int j = 0; j < e; ++j) g_emb[j] += g_in[d + f + j];
}

void Denoiser::Write(std::ostream& os) const {
  os << kCheckpointHeader << '\n'
     << "dim " << shape_.dim << " hidden " << shape_.hidden << " time_features "
     << shape_.time_features << " cond_embed " << shape_.cond_embed << " vocab "
     << shape_.vocab << " steps " << T_ << '\n';
  for (double v : params_) os << FormatDouble(v) << '\n';
}

Denoiser Denoiser::Read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCheckpointHeader) {
    throw InvalidArgument("missing denoiser checkpoint header");
  }
  if (!std::getline(is, line)) throw InvalidArgument("truncated denoiser checkpoint");
  std::istringstream hs(line);
  DenoiserShape shape;
  int T = 0;
  std::string key;
  while (hs >> key) {
    int value = 0;
    if (!(hs >> value)) throw InvalidArgument("malformed denoiser header");
    if (key == "dim") shape.dim = value;
    else if (key == "hidden") shape.hidden = value;
    else if (key == "time_features") shape.time_features = value;
    else if (key == "cond_embed") shape.cond_embed = value;
    else if (key == "vocab") shape.vocab = value;
    else if (key == "steps") T = value;
    else throw InvalidArgument("unknown denoiser header key: " + key);
  }
  Denoiser d(shape, T);
  for (double& v : d.params_) {
    if (!std::getline(is, line)) throw InvalidArgument("truncated denoiser weights");
    v = ParseDouble(line);
  }
  return d;
}

DiffusionPair MakeDiffusionPair(const NoiseSchedule& schedule, const Sample& x0, int gamma,
                                RngStream& rng) {
  DiffusionPair p;
  p.x0 = x0.x;
  p.t = 1 + static_cast<int>(rng.UniformInt(schedule.T));
  p.epsilon.resize(x0.x.size());
  for (double& e : p.epsilon) e = rng.Normal();
  p.condition = x0.condition;
  p.gamma = gamma;
  return p;
}

double StepLogRatio(const Denoiser& theta, const Denoiser& ref, const DiffusionPair& pair,
                    const NoiseSchedule& schedule) {
  const auto x_t = DiffuseWithNoise(schedule, pair.x0, pair.t, pair.epsilon);
  const auto e_theta = theta.Forward(x_t, pair.t, pair.condition);
  const auto e_ref = ref.Forward(x_t, pair.t, pair.condition);
  double err_theta = 0.0, err_ref = 0.0;
  for (std::size_t j = 0; j < x_t.size(); ++j) {
    const double a = pair.epsilon[j] - e_theta[j];
    const double b = pair.epsilon[j] - e_ref[j];
    err_theta += a * a;
    err_ref += b * b;
  }
  return -(err_theta - err_ref);
}

double AccumulateGradStepLogRatio(const Denoiser& theta, const Denoiser& ref,
                                  const DiffusionPair& pair, const NoiseSchedule& schedule,
                                  double scale, std::span<double> grad) {
  const auto x_t = DiffuseWithNoise(schedule, pair.x0, pair.t, pair.epsilon);
  Denoiser::Activations act;
  theta.Forward(x_t, pair.t, pair.condition, act);
  const auto e_ref = ref.Forward(x_t, pair.t, pair.condition);
  double err_theta = 0.0, err_ref = 0.0;
  std::vector<double> upstream(x_t.size());
  for (std::size_t j = 0; j < x_t.size(); ++j) {
    const double a = pair.epsilon[j] - act.out[j];
    const double b = pair.epsilon[j] - e_ref[j];
    err_theta += a * a;
    err_ref += b * b;
    // d/d eps_theta of -(eps - eps_theta)^2.
    upstream[j] = scale * 2.0 * a;
  }
  theta.Backward(act, upstream, grad);
  return -(err_theta - err_ref);
}

double DdpmLoss(const Denoiser& model, const NoiseSchedule& schedule,
                std::span<const DiffusionPair> batch, std::span<double> grad) {
  if (batch.empty()) throw InvalidArgument("ddpm loss needs a nonempty batch");
  const bool want_grad = !grad.empty();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Denoiser::Activations act;
  std::vector<double> upstream;
  double total = 0.0;
  for (const DiffusionPair& p : batch) {
    const auto x_t = DiffuseWithNoise(schedule, p.x0, p.t, p.epsilon);
    model.Forward(x_t, p.t, p.condition, act);
    const double lambda = schedule.lambda(p.t);
    double err = 0.0;
    upstream.assign(x_t.size(), 0.0);
    for (std::size_t j = 0; j < x_t.size(); ++j) {
      const double r = act.out[j] - p.epsilon[j];
      err += r * r;
      upstream[j] = 2.0 * lambda * r * inv_n;
    }
    total += lambda * err;
    if (want_grad) model.Backward(act, upstream, grad);
  }
  return total * inv_n;
}

namespace {

// One reverse step from x_t given the noise prediction.
void ReverseStep(const NoiseSchedule& schedule, int t, std::span<const double> eps_hat,
                 std::vector<double>& x, RngStream& rng) {
  const double beta = schedule.beta(t);
  const double abar = schedule.alpha_bar(t);
  const double coef = beta / std::sqrt(1.0 - abar);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = inv_sqrt_alpha * (x[j] - coef * eps_hat[j]);
  }
  if (t > 1) {
    // Posterior variance of q(x_{t-1} | x_t, x_0).
    const double abar_prev = schedule.alpha_bar(t - 1);
    const double sigma = std::sqrt(beta * (1.0 - abar_prev) / (1.0 - abar));
    for (double& v : x) v += sigma * rng.Normal();
  }
}

}  // namespace

Population SampleConditional(const Denoiser& model, const NoiseSchedule& schedule,
                             std::optional<Condition> condition, int n, RngStream& rng,
                             Condition label) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  if (model.T() != schedule.T) throw InvalidArgument("denoiser and schedule disagree on T");
  Population pop;
  pop.condition = label;
  pop.samples.reserve(n);
  Denoiser::Activations act;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(model.shape().dim);
    for (double& v : x) v = rng.Normal();
    for (int t = schedule.T; t >= 1; --t) {
      model.Forward(x, t, condition, act);
      ReverseStep(schedule, t, act.out, x, rng);
    }
    pop.samples.push_back({std::move(x), label, std::nullopt});
  }
  return pop;
}

Population SampleCfg(const Denoiser& model, const NoiseSchedule& schedule,
                     Condition condition, double guidance_scale, int n, RngStream& rng) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  if (!(guidance_scale >= 0.0)) throw InvalidArgument("guidance scale must be >= 0");
  if (model.T() != schedule.T) throw InvalidArgument("denoiser and schedule disagree on T");
  const double s = guidance_scale;
  const int d = model.shape().dim;
  Population pop;
  pop.condition = condition;
  pop.samples.reserve(n);
  Denoiser::Activations cond_act, null_act;
  std::vector<double> eps_hat(d);
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.Normal();
    for (int t = schedule.T; t >= 1; --t) {
      model.Forward(x, t, condition, cond_act);
      model.Forward(x, t, std::nullopt, null_act);
      for (int j = 0; j < d; ++j) {
        eps_hat[j] = (1.0 - s) * null_act.out[j] + s * cond_act.out[j];
      }
      ReverseStep(schedule, t, eps_hat, x, rng);
    }
    pop.samples.push_back({std::move(x), condition, std::nullopt});
  }
  return pop;
}

}  // namespace popalign
