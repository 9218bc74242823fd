#include "signet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace signet::nn {

namespace {

void check_finite(const Tensor& t, const std::string& where) {
  for (const double x : t.v) {
    if (!std::isfinite(x)) throw std::runtime_error("non-finite value in " + where);
  }
}

}  // namespace

Tensor transpose(const Tensor& x) {
  Tensor y(x.cols, x.rows);
  for (int r = 0; r < x.rows; ++r) {
    const double* src = x.row(r);
    for (int c = 0; c < x.cols; ++c) y.at(c, r) = src[c];
  }
  return y;
}

void init_xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& x : t.v) x = rng.in_range(-limit, limit);
}

void adam_update(Tensor& value, const Tensor& grad, Tensor& m, Tensor& s, long step,
                 const AdamConfig& config) {
  if (grad.size() != value.size()) throw std::invalid_argument("adam_update: shape mismatch");
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const std::size_t count = value.v.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double g = grad.v[i];
    m.v[i] = config.beta1 * m.v[i] + (1.0 - config.beta1) * g;
    s.v[i] = config.beta2 * s.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m.v[i] / correction1;
    const double s_hat = s.v[i] / correction2;
    value.v[i] -= config.lr * m_hat / (std::sqrt(s_hat) + config.epsilon);
  }
}

void adam_step(std::span<Param* const> params, AdamState& state) {
  ++state.step;
  for (Param* p : params) adam_update(p->value, p->grad, p->m, p->s, state.step, state.config);
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

Tensor linear_forward(const Linear& layer, const Tensor& x) {
  if (x.rows != layer.in()) throw std::invalid_argument("linear_forward: width mismatch");
  const int out = layer.out();
  const int in = layer.in();
  const int batch = x.cols;
  Tensor y(out, batch);
  for (int o = 0; o < out; ++o) {
    double* yo = y.row(o);
    const double bias = layer.b.value.v[static_cast<std::size_t>(o)];
    for (int c = 0; c < batch; ++c) yo[c] = bias;
    const double* w_row = layer.w.value.row(o);
    for (int i = 0; i < in; ++i) {
      const double w = w_row[i];
      const double* xi = x.row(i);
      for (int c = 0; c < batch; ++c) yo[c] += w * xi[c];
    }
  }
  return y;
}

Tensor linear_backward(Linear& layer, const Tensor& x, const Tensor& dy) {
  const int out = layer.out();
  const int in = layer.in();
  const int batch = x.cols;
  if (dy.rows != out || dy.cols != batch)
    throw std::invalid_argument("linear_backward: gradient shape mismatch");

  Tensor dx(in, batch);
  for (int o = 0; o < out; ++o) {
    const double* dyo = dy.row(o);
    const double* w_row = layer.w.value.row(o);
    for (int i = 0; i < in; ++i) {
      const double w = w_row[i];
      double* dxi = dx.row(i);
      for (int c = 0; c < batch; ++c) dxi[c] += w * dyo[c];
    }
    double bias_sum = 0.0;
    for (int c = 0; c < batch; ++c) bias_sum += dyo[c];
    layer.b.grad.v[static_cast<std::size_t>(o)] += bias_sum;
  }

  // Weight gradient dW = dy . x^T, walked sample-by-sample over a transposed
  // copy of x so the innermost loop stays contiguous.
  const Tensor xt = transpose(x);
  for (int c = 0; c < batch; ++c) {
    const double* x_sample = xt.row(c);
    for (int o = 0; o < out; ++o) {
      const double d = dy.at(o, c);
      double* gw = layer.w.grad.row(o);
      for (int i = 0; i < in; ++i) gw[i] += d * x_sample[i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// LayerNorm. Activations are feature-major, so per-sample statistics are
// accumulated across rows with contiguous batch-wide sweeps.
// ---------------------------------------------------------------------------

Tensor layernorm_forward(const LayerNorm& layer, const Tensor& x, NormCache* cache) {
  const int dim = x.rows;
  const int batch = x.cols;
  if (dim != layer.dim()) throw std::invalid_argument("layernorm_forward: width mismatch");

  std::vector<double> mean(static_cast<std::size_t>(batch), 0.0);
  for (int f = 0; f < dim; ++f) {
    const double* xf = x.row(f);
    for (int c = 0; c < batch; ++c) mean[static_cast<std::size_t>(c)] += xf[c];
  }
  for (double& v : mean) v /= dim;

  std::vector<double> variance(static_cast<std::size_t>(batch), 0.0);
  for (int f = 0; f < dim; ++f) {
    const double* xf = x.row(f);
    for (int c = 0; c < batch; ++c) {
      const double d = xf[c] - mean[static_cast<std::size_t>(c)];
      variance[static_cast<std::size_t>(c)] += d * d;
    }
  }
  std::vector<double> inv_std(static_cast<std::size_t>(batch));
  for (int c = 0; c < batch; ++c)
    inv_std[static_cast<std::size_t>(c)] =
        1.0 / std::sqrt(variance[static_cast<std::size_t>(c)] / dim + layer.epsilon);

  Tensor x_hat(dim, batch);
  Tensor y(dim, batch);
  for (int f = 0; f < dim; ++f) {
    const double* xf = x.row(f);
    double* xh = x_hat.row(f);
    double* yf = y.row(f);
    const double g = layer.gain.value.v[static_cast<std::size_t>(f)];
    const double b = layer.bias.value.v[static_cast<std::size_t>(f)];
    for (int c = 0; c < batch; ++c) {
      xh[c] = (xf[c] - mean[static_cast<std::size_t>(c)]) * inv_std[static_cast<std::size_t>(c)];
      yf[c] = g * xh[c] + b;
    }
  }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor layernorm_backward(LayerNorm& layer, const NormCache& cache, const Tensor& dy) {
  const int dim = dy.rows;
  const int batch = dy.cols;
  if (cache.x_hat.rows != dim || cache.x_hat.cols != batch)
    throw std::invalid_argument("layernorm_backward: cache mismatch");

  // dx = inv_std * (dxhat - mean(dxhat) - x_hat * mean(dxhat * x_hat)),
  // means taken over features; dxhat = gain * dy.
  std::vector<double> mean_d(static_cast<std::size_t>(batch), 0.0);
  std::vector<double> mean_dx(static_cast<std::size_t>(batch), 0.0);
  for (int f = 0; f < dim; ++f) {
    const double* dyf = dy.row(f);
    const double* xh = cache.x_hat.row(f);
    const double g = layer.gain.value.v[static_cast<std::size_t>(f)];
    double dgain = 0.0;
    double dbias = 0.0;
    for (int c = 0; c < batch; ++c) {
      const double dxhat = g * dyf[c];
      mean_d[static_cast<std::size_t>(c)] += dxhat;
      mean_dx[static_cast<std::size_t>(c)] += dxhat * xh[c];
      dgain += dyf[c] * xh[c];
      dbias += dyf[c];
    }
    layer.gain.grad.v[static_cast<std::size_t>(f)] += dgain;
    layer.bias.grad.v[static_cast<std::size_t>(f)] += dbias;
  }
  for (double& v : mean_d) v /= dim;
  for (double& v : mean_dx) v /= dim;

  Tensor dx(dim, batch);
  for (int f = 0; f < dim; ++f) {
    const double* dyf = dy.row(f);
    const double* xh = cache.x_hat.row(f);
    double* dxf = dx.row(f);
    const double g = layer.gain.value.v[static_cast<std::size_t>(f)];
    for (int c = 0; c < batch; ++c) {
      dxf[c] = cache.inv_std[static_cast<std::size_t>(c)] *
               (g * dyf[c] - mean_d[static_cast<std::size_t>(c)] -
                xh[c] * mean_dx[static_cast<std::size_t>(c)]);
    }
  }
  return dx;
}

Tensor tanh_forward(const Tensor& x) {
  Tensor y(x.rows, x.cols);
  for (int i = 0; i < x.size(); ++i) y.v[static_cast<std::size_t>(i)] = std::tanh(x.v[static_cast<std::size_t>(i)]);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  if (y.size() != dy.size()) throw std::invalid_argument("tanh_backward: shape mismatch");
  Tensor dx(y.rows, y.cols);
  for (int i = 0; i < y.size(); ++i) {
    const double t = y.v[static_cast<std::size_t>(i)];
    dx.v[static_cast<std::size_t>(i)] = (1.0 - t * t) * dy.v[static_cast<std::size_t>(i)];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MlpBlock
// ---------------------------------------------------------------------------

MlpBlock::MlpBlock(const std::string& name, int dim, int depth) {
  if (depth < 1) throw std::invalid_argument("MlpBlock: depth must be positive");
  for (int i = 0; i < depth; ++i) {
    const std::string stage = name + "." + std::to_string(i);
    linears.emplace_back(stage, dim, dim);
    norms.emplace_back(stage, dim);
  }
}

void MlpBlock::init(Rng& rng) {
  for (auto& linear : linears) linear.init(rng);
}

void MlpBlock::collect_params(std::vector<Param*>& out) {
  for (std::size_t i = 0; i < linears.size(); ++i) {
    out.push_back(&linears[i].w);
    out.push_back(&linears[i].b);
    out.push_back(&norms[i].gain);
    out.push_back(&norms[i].bias);
  }
}

Tensor mlp_forward(const MlpBlock& block, const Tensor& x, MlpCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->norms.clear();
    cache->activations.clear();
  }
  Tensor h = x;
  for (int stage = 0; stage < block.depth(); ++stage) {
    const std::size_t s = static_cast<std::size_t>(stage);
    if (cache) cache->inputs.push_back(h);
    Tensor z = linear_forward(block.linears[s], h);
    NormCache norm_cache;
    Tensor normed = layernorm_forward(block.norms[s], z, cache ? &norm_cache : nullptr);
    Tensor activated = tanh_forward(normed);
    check_finite(activated, block.linears[s].w.name + " output");
    if (cache) {
      cache->norms.push_back(std::move(norm_cache));
      cache->activations.push_back(activated);
    }
    h = std::move(activated);
  }
  return h;
}

Tensor mlp_backward(MlpBlock& block, const MlpCache& cache, const Tensor& dy) {
  if (static_cast<int>(cache.inputs.size()) != block.depth())
    throw std::logic_error("mlp_backward: missing forward cache");
  Tensor d = dy;
  for (int stage = block.depth() - 1; stage >= 0; --stage) {
    const std::size_t s = static_cast<std::size_t>(stage);
    Tensor d_norm = tanh_backward(cache.activations[s], d);
    Tensor d_linear = layernorm_backward(block.norms[s], cache.norms[s], d_norm);
    d = linear_backward(block.linears[s], cache.inputs[s], d_linear);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Masked categorical head
// ---------------------------------------------------------------------------

namespace {

bool selectable(std::span<const std::uint8_t> mask, std::size_t j) {
  return mask.empty() || mask[j] != 0;
}

double masked_max(std::span<const double> logits, std::span<const std::uint8_t> mask) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (selectable(mask, j) && logits[j] > best) best = logits[j];
  if (!std::isfinite(best)) throw std::runtime_error("masked softmax: everything masked");
  return best;
}

}  // namespace

std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != logits.size())
    throw std::invalid_argument("masked_softmax: mask length mismatch");
  const double max = masked_max(logits, mask);
  std::vector<double> probs(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (!selectable(mask, j)) continue;
    probs[j] = std::exp(logits[j] - max);
    total += probs[j];
  }
  for (double& p : probs) p /= total;
  return probs;
}

SoftmaxSample masked_softmax_sample(std::span<const double> logits,
                                    std::span<const std::uint8_t> mask, Rng& rng) {
  const auto probs = masked_softmax(logits, mask);
  const double u = rng.uniform01();
  double cumulative = 0.0;
  int last = -1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    cumulative += probs[j];
    last = static_cast<int>(j);
    if (u < cumulative) break;
  }
  return {last, masked_log_prob(logits, mask, last)};
}

double masked_log_prob(std::span<const double> logits, std::span<const std::uint8_t> mask,
                       int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= logits.size() ||
      !selectable(mask, static_cast<std::size_t>(index)))
    throw std::invalid_argument("masked_log_prob: index not selectable");
  const double max = masked_max(logits, mask);
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (selectable(mask, j)) total += std::exp(logits[j] - max);
  return logits[static_cast<std::size_t>(index)] - max - std::log(total);
}

double masked_entropy(std::span<const double> logits, std::span<const std::uint8_t> mask) {
  const auto probs = masked_softmax(logits, mask);
  double entropy = 0.0;
  for (const double p : probs)
    if (p > 0.0) entropy -= p * std::log(p);
  return entropy;
}

void masked_log_prob_backward(std::span<const double> probs, int index, double scale,
                              std::span<double> dlogits) {
  for (std::size_t j = 0; j < probs.size(); ++j) dlogits[j] -= scale * probs[j];
  dlogits[static_cast<std::size_t>(index)] += scale;
}

void masked_entropy_backward(std::span<const double> probs, double scale,
                             std::span<double> dlogits) {
  double entropy = 0.0;
  for (const double p : probs)
    if (p > 0.0) entropy -= p * std::log(p);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    if (p > 0.0) dlogits[j] += scale * (-p * (std::log(p) + entropy));
  }
}

// ---------------------------------------------------------------------------
// PPO
// ---------------------------------------------------------------------------

namespace {

void clip_global_norm(std::span<Param* const> params, double max_norm) {
  double sum_sq = 0.0;
  for (const Param* p : params)
    for (const double g : p->grad.v) sum_sq += g * g;
  const double norm = std::sqrt(sum_sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (Param* p : params)
    for (double& g : p->grad.v) g *= scale;
}

}  // namespace

std::vector<EpochLoss> ppo_update(std::span<PpoHead* const> heads, const PpoConfig& config,
                                  std::span<Param* const> params, AdamState& adam) {
  if (config.clip <= 0.0) throw std::invalid_argument("ppo_update: clip must be positive");
  if (config.epochs < 1) throw std::invalid_argument("ppo_update: epochs must be >= 1");

  int total = 0;
  for (const PpoHead* head : heads) total += head->batch_size();
  if (total == 0) return {};

  std::vector<EpochLoss> losses;
  losses.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Param* p : params) p->zero_grad();
    EpochLoss epoch_loss;

    for (PpoHead* head : heads) {
      const int batch = head->batch_size();
      if (batch == 0) continue;
      const std::size_t b = static_cast<std::size_t>(batch);
      std::vector<double> log_prob(b), value(b), entropy(b);
      head->forward(log_prob, value, entropy);

      std::vector<double> dlog_prob(b), dvalue(b), dentropy(b);
      double policy_loss = 0.0;
      double value_loss = 0.0;
      for (int i = 0; i < batch; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double advantage = head->reward(i) - head->old_value(i);
        const double ratio = std::exp(log_prob[k] - head->old_log_prob(i));
        if (!std::isfinite(ratio)) throw std::runtime_error("ppo_update: non-finite ratio");
        const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
        const double surrogate = ratio * advantage;
        const double surrogate_clipped = clipped * advantage;
        policy_loss -= std::min(surrogate, surrogate_clipped);
        // Gradient flows through the unclipped term whenever it attains the
        // min; when the clipped term is strictly smaller the ratio sits in
        // the flat region, so the sample contributes nothing.
        dlog_prob[k] = surrogate <= surrogate_clipped ? -surrogate / batch : 0.0;

        const double value_error = value[k] - head->reward(i);
        value_loss += config.value_coef * value_error * value_error;
        dvalue[k] = config.value_coef * 2.0 * value_error / batch;

        policy_loss -= config.entropy_coef * entropy[k];
        dentropy[k] = -config.entropy_coef / batch;
      }
      head->backward(dlog_prob, dvalue, dentropy);
      epoch_loss.policy += policy_loss / batch;
      epoch_loss.value += value_loss / batch;
    }

    if (config.max_grad_norm > 0.0) clip_global_norm(params, config.max_grad_norm);
    adam_step(params, adam);
    losses.push_back(epoch_loss);
  }
  return losses;
}

}  // namespace signet::nn
