#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signet/rng.hpp"

namespace signet::nn {

// Dense 2-D tensor, row-major. Activations are stored feature-major:
// shape (features, batch), so row f holds feature f across the whole batch.
// That layout keeps every hot inner loop a straight sweep over contiguous
// memory, which vectorizes under strict IEEE arithmetic — no -ffast-math is
// needed anywhere, so results stay bit-reproducible.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int rows_, int cols_, double fill = 0.0)
      : rows(rows_), cols(cols_), v(static_cast<std::size_t>(rows_) * cols_, fill) {}

  int size() const { return rows * cols; }

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

  void fill(double x) { v.assign(v.size(), x); }
};

Tensor transpose(const Tensor& x);

// A trainable tensor bundled with its gradient and Adam accumulators.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // first moment
  Tensor s;  // second moment

  Param(std::string name_, int rows, int cols, double fill = 0.0)
      : name(std::move(name_)), value(rows, cols, fill), grad(rows, cols), m(rows, cols), s(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

// Uniform Xavier/Glorot initialization: +-sqrt(6 / (fan_in + fan_out)).
void init_xavier_uniform(Tensor& t, int fan_in, int fan_out, Rng& rng);

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
};

// Bias-corrected Adam over a single tensor; `step` is the 1-based step index.
void adam_update(Tensor& value, const Tensor& grad, Tensor& m, Tensor& s, long step,
                 const AdamConfig& config);

// One optimizer step over every parameter (each exactly once); increments the
// shared step counter first.
void adam_step(std::span<Param* const> params, AdamState& state);

// ---------------------------------------------------------------------------
// Layers. Forward functions take activations shaped (features, batch) and
// return the same; backward functions accumulate into the layer's Param
// grads and return the gradient with respect to the input.
// ---------------------------------------------------------------------------

struct Linear {
  Param w;  // (out, in)
  Param b;  // (out, 1)

  Linear(const std::string& name, int in, int out)
      : w(name + ".w", out, in), b(name + ".b", out, 1) {}

  int in() const { return w.value.cols; }
  int out() const { return w.value.rows; }

  void init(Rng& rng) { init_xavier_uniform(w.value, in(), out(), rng); }
};

Tensor linear_forward(const Linear& layer, const Tensor& x);
// `x` is the input that produced dy (caller caches it).
Tensor linear_backward(Linear& layer, const Tensor& x, const Tensor& dy);

struct LayerNorm {
  Param gain;  // (dim, 1)
  Param bias;  // (dim, 1)
  double epsilon = 1e-5;

  LayerNorm(const std::string& name, int dim)
      : gain(name + ".gain", dim, 1, 1.0), bias(name + ".bias", dim, 1, 0.0) {}

  int dim() const { return gain.value.rows; }
};

struct NormCache {
  Tensor x_hat;                 // normalized pre-affine activations
  std::vector<double> inv_std;  // per sample
};

Tensor layernorm_forward(const LayerNorm& layer, const Tensor& x, NormCache* cache);
Tensor layernorm_backward(LayerNorm& layer, const NormCache& cache, const Tensor& dy);

Tensor tanh_forward(const Tensor& x);
// `y` is the tanh output (derivative is 1 - y^2).
Tensor tanh_backward(const Tensor& y, const Tensor& dy);

// Fixed-width MLP: `depth` stages of Linear -> LayerNorm -> tanh. Output
// heads append their own projection Linear on top.
struct MlpBlock {
  std::vector<Linear> linears;
  std::vector<LayerNorm> norms;

  MlpBlock(const std::string& name, int dim, int depth);

  int dim() const { return linears.front().in(); }
  int depth() const { return static_cast<int>(linears.size()); }

  void init(Rng& rng);
  void collect_params(std::vector<Param*>& out);
};

struct MlpCache {
  std::vector<Tensor> inputs;       // input to each Linear
  std::vector<NormCache> norms;     // per-stage LayerNorm cache
  std::vector<Tensor> activations;  // tanh outputs (for the derivative)
};

// cache may be null when no backward pass will follow (action sampling).
Tensor mlp_forward(const MlpBlock& block, const Tensor& x, MlpCache* cache);
Tensor mlp_backward(MlpBlock& block, const MlpCache& cache, const Tensor& dy);

// ---------------------------------------------------------------------------
// Masked categorical head.
// ---------------------------------------------------------------------------

// Probabilities proportional to exp(logit) over unmasked entries; masked
// entries are exactly 0. Empty mask = nothing masked.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const std::uint8_t> mask);

struct SoftmaxSample {
  int index = -1;
  double log_prob = 0.0;
};

SoftmaxSample masked_softmax_sample(std::span<const double> logits,
                                    std::span<const std::uint8_t> mask, Rng& rng);

// Log-probability of `index` under the masked softmax (index must be unmasked).
double masked_log_prob(std::span<const double> logits, std::span<const std::uint8_t> mask,
                       int index);

// Entropy of the masked softmax distribution, in nats.
double masked_entropy(std::span<const double> logits, std::span<const std::uint8_t> mask);

// d(log p[index])/d(logits) = onehot(index) - p; masked entries get 0.
// Scaled by `scale` and accumulated into dlogits.
void masked_log_prob_backward(std::span<const double> probs, int index, double scale,
                              std::span<double> dlogits);

// dH/d(logits)_k = -p_k (log p_k + H); scaled and accumulated into dlogits.
void masked_entropy_backward(std::span<const double> probs, double scale,
                             std::span<double> dlogits);

// ---------------------------------------------------------------------------
// PPO. The update loop is generic over "heads": one head couples a policy
// (log-prob of the stored decision under current parameters) with the critic
// that baselines it, batched over that head's buffered samples.
// ---------------------------------------------------------------------------

struct PpoConfig {
  double clip = 0.2;
  int epochs = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.0;  // 0 = no clipping
};

class PpoHead {
 public:
  virtual ~PpoHead() = default;

  virtual int batch_size() const = 0;

  // Recompute per-sample log-probs, values, and entropies under the current
  // parameters, caching whatever backward() needs.
  virtual void forward(std::span<double> log_prob, std::span<double> value,
                       std::span<double> entropy) = 0;

  // Accumulate parameter gradients for given per-sample objective gradients.
  // dentropy applies to the distribution entropy (0 when unused).
  virtual void backward(std::span<const double> dlog_prob, std::span<const double> dvalue,
                        std::span<const double> dentropy) = 0;

  // Quantities frozen at sampling time.
  virtual double old_log_prob(int i) const = 0;
  virtual double old_value(int i) const = 0;
  virtual double reward(int i) const = 0;
};

struct EpochLoss {
  double policy = 0.0;
  double value = 0.0;
};

// K epochs of the clipped surrogate objective. Per sample: A = reward - old
// value, rho = exp(logp - old logp), policy loss -min(rho A, clip(rho) A),
// value loss value_coef (V - reward)^2, entropy bonus -entropy_coef H; each
// head contributes the mean over its own batch. One adam_step per epoch over
// `params` (the union of all trainable tensors, each listed exactly once).
std::vector<EpochLoss> ppo_update(std::span<PpoHead* const> heads, const PpoConfig& config,
                                  std::span<Param* const> params, AdamState& adam);

}  // namespace signet::nn
