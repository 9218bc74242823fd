#include "signet/neural_agent.hpp"

#include <cmath>
#include <stdexcept>

namespace signet {

NeuralAgent::StaticHead::StaticHead(const std::string& name, int dim, int depth, int choices)
    : mlp(name + ".mlp", dim, depth),
      projection(name + ".proj", dim, choices),
      critic_embedding(name + ".critic.embed", choices, dim),
      critic_mlp(name + ".critic.mlp", dim, depth),
      critic_projection(name + ".critic.proj", dim, 1) {}

namespace {

void collect_static_head(NeuralAgent::StaticHead& head, std::vector<nn::Param*>& params) {
  head.mlp.collect_params(params);
  params.push_back(&head.projection.w);
  params.push_back(&head.projection.b);
  params.push_back(&head.critic_embedding);
  head.critic_mlp.collect_params(params);
  params.push_back(&head.critic_projection.w);
  params.push_back(&head.critic_projection.b);
}

void init_static_head(NeuralAgent::StaticHead& head, int dim, Rng& rng) {
  head.mlp.init(rng);
  head.projection.init(rng);
  nn::init_xavier_uniform(head.critic_embedding.value, head.critic_embedding.value.rows, dim, rng);
  head.critic_mlp.init(rng);
  head.critic_projection.init(rng);
}

}  // namespace

NeuralAgent::NeuralAgent(const GameConfig& game, const NeuralConfig& config, Rng& init_rng)
    : game_(game),
      config_(config),
      sender_embedding_("sender.embed", game.num_states, config.embed_dim),
      receiver_embedding_("receiver.embed", game.num_symbols, config.embed_dim),
      processor_("processor", config.embed_dim, config.depth),
      sender_projection_("sender.proj", config.embed_dim, game.sender_decision_size()),
      receiver_projection_("receiver.proj", config.embed_dim, game.num_actions()),
      critic_mlp_("critic.mlp", config.embed_dim, config.depth),
      critic_projection_("critic.proj", config.embed_dim, 1),
      static_input_(config.embed_dim, 1, 1.0) {
  game_.validate();
  if (config.embed_dim < 1 || config.depth < 1)
    throw std::invalid_argument("NeuralAgent: embed_dim and depth must be positive");
  adam_.config = config_.adam;

  const bool has_negation_identity =
      game.kind == GameKind::LearnedNegation || game.kind == GameKind::CombinedNegation;
  if (has_negation_identity)
    negation_head_.emplace("negation", config.embed_dim, config.depth, game.num_symbols);
  if (game.kind == GameKind::CombinedNegation)
    function_head_.emplace("function", config.embed_dim, config.depth, 3);

  params_.push_back(&sender_embedding_);
  params_.push_back(&receiver_embedding_);
  processor_.collect_params(params_);
  params_.push_back(&sender_projection_.w);
  params_.push_back(&sender_projection_.b);
  params_.push_back(&receiver_projection_.w);
  params_.push_back(&receiver_projection_.b);
  critic_mlp_.collect_params(params_);
  params_.push_back(&critic_projection_.w);
  params_.push_back(&critic_projection_.b);
  if (negation_head_) collect_static_head(*negation_head_, params_);
  if (function_head_) collect_static_head(*function_head_, params_);

  // Draw order is fixed by construction order, so one init stream always
  // yields the same network.
  nn::init_xavier_uniform(sender_embedding_.value, game.num_states, config.embed_dim, init_rng);
  nn::init_xavier_uniform(receiver_embedding_.value, game.num_symbols, config.embed_dim, init_rng);
  processor_.init(init_rng);
  sender_projection_.init(init_rng);
  receiver_projection_.init(init_rng);
  critic_mlp_.init(init_rng);
  critic_projection_.init(init_rng);
  if (negation_head_) init_static_head(*negation_head_, config.embed_dim, init_rng);
  if (function_head_) init_static_head(*function_head_, config.embed_dim, init_rng);
}

nn::Tensor NeuralAgent::embed_columns(const nn::Param& table, std::span<const int> rows) const {
  const int dim = table.value.cols;
  nn::Tensor x(dim, static_cast<int>(rows.size()));
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const int row = rows[b];
    if (row < 0 || row >= table.value.rows)
      throw std::out_of_range("NeuralAgent: embedding row out of range");
    const double* src = table.value.row(row);
    for (int f = 0; f < dim; ++f) x.at(f, static_cast<int>(b)) = src[f];
  }
  return x;
}

double NeuralAgent::critic_value(const nn::MlpBlock& mlp, const nn::Linear& projection,
                                 const nn::Tensor& x) const {
  const nn::Tensor h = nn::mlp_forward(mlp, x, nullptr);
  const nn::Tensor v = nn::linear_forward(projection, h);
  return v.at(0, 0);
}

void NeuralAgent::record_step(Step step, ChoiceRecord& out) {
  out.log_prob = step.log_prob;
  if (recording_) {
    out.value = step.value;
    pending_.push_back(std::move(step));
  }
}

int NeuralAgent::sample_policy(const nn::Param& table, const nn::MlpBlock& mlp,
                               const nn::Linear& projection, int context,
                               std::span<const std::uint8_t> mask, Rng& rng, ChoiceRecord& out,
                               HeadId head, Role role) {
  const int rows[1] = {context};
  const nn::Tensor x = embed_columns(table, rows);
  const nn::Tensor h = nn::mlp_forward(mlp, x, nullptr);
  const nn::Tensor logits = nn::linear_forward(projection, h);  // (width, 1): contiguous
  const auto sample = nn::masked_softmax_sample(logits.v, mask, rng);

  out.index = sample.index;
  out.mask.assign(mask.begin(), mask.end());

  Step step;
  step.head = head;
  step.role = role;
  step.context = context;
  step.mask.assign(mask.begin(), mask.end());
  step.chosen = sample.index;
  step.log_prob = sample.log_prob;
  // The critic reads the pre-processor embedding; only needed when the tuple
  // will be learned from.
  if (recording_) step.value = critic_value(critic_mlp_, critic_projection_, x);
  record_step(std::move(step), out);
  return sample.index;
}

int NeuralAgent::sample_static(StaticHead& head, HeadId id, Role role, Rng& rng,
                               ChoiceRecord& out) {
  const nn::Tensor h = nn::mlp_forward(head.mlp, static_input_, nullptr);
  const nn::Tensor logits = nn::linear_forward(head.projection, h);
  const auto sample = nn::masked_softmax_sample(logits.v, {}, rng);

  out.index = sample.index;
  out.mask.clear();

  Step step;
  step.head = id;
  step.role = role;
  step.context = sample.index;  // the critic scores the selected index
  step.chosen = sample.index;
  step.log_prob = sample.log_prob;
  if (recording_) {
    const int rows[1] = {sample.index};
    const nn::Tensor xc = embed_columns(head.critic_embedding, rows);
    step.value = critic_value(head.critic_mlp, head.critic_projection, xc);
  }
  record_step(std::move(step), out);
  return sample.index;
}

int NeuralAgent::choose_symbol(int state, std::span<const std::uint8_t> mask, Rng& rng,
                               ChoiceRecord& out) {
  return sample_policy(sender_embedding_, processor_, sender_projection_, state, mask, rng, out,
                       HeadId::SenderPolicy, Role::Sender);
}

int NeuralAgent::choose_action(int symbol, Rng& rng, ChoiceRecord& out) {
  return sample_policy(receiver_embedding_, processor_, receiver_projection_, symbol, {}, rng, out,
                       HeadId::ReceiverPolicy, Role::Receiver);
}

int NeuralAgent::choose_negation_identity(Role role, Rng& rng, ChoiceRecord& out) {
  if (!negation_head_) throw std::logic_error("this game has no negation-identity choice");
  return sample_static(*negation_head_, HeadId::Negation, role, rng, out);
}

Meaning NeuralAgent::choose_meaning(Role role, Rng& rng, ChoiceRecord& out) {
  if (!function_head_) throw std::logic_error("this game has no meaning choice");
  return static_cast<Meaning>(sample_static(*function_head_, HeadId::Function, role, rng, out));
}

void NeuralAgent::learn_from(const EpisodeRecord& episode, Role role) {
  // Every decision made in `role` during this episode earns the episode's
  // terminal reward. Tuples of the other role (self-play) stay pending until
  // their own learn_from call.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->role == role) {
      it->reward = episode.reward;
      buffer_.push_back(std::move(*it));
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void NeuralAgent::end_learning_event() {
  if (!buffer_.empty()) learn();
}

// ---------------------------------------------------------------------------
// PPO heads over the buffered tuples
// ---------------------------------------------------------------------------

// Role policy head: embedding -> shared processor -> projection, with the
// shared critic reading the pre-processor embedding. Handles sender tuples
// (first and second draws alike) or receiver tuples.
class PolicyPpoHead final : public nn::PpoHead {
 public:
  PolicyPpoHead(NeuralAgent& agent, nn::Param& table, nn::Linear& projection,
                std::vector<const NeuralAgent::Step*> steps)
      : agent_(agent), table_(table), projection_(projection), steps_(std::move(steps)) {
    contexts_.reserve(steps_.size());
    for (const auto* step : steps_) contexts_.push_back(step->context);
  }

  int batch_size() const override { return static_cast<int>(steps_.size()); }

  void forward(std::span<double> log_prob, std::span<double> value,
               std::span<double> entropy) override {
    x_ = agent_.embed_columns(table_, contexts_);
    h_ = nn::mlp_forward(agent_.processor_, x_, &processor_cache_);
    logits_ = nn::linear_forward(projection_, h_);
    hv_ = nn::mlp_forward(agent_.critic_mlp_, x_, &critic_cache_);
    values_ = nn::linear_forward(agent_.critic_projection_, hv_);

    const int width = logits_.rows;
    std::vector<double> column(static_cast<std::size_t>(width));
    probs_.assign(steps_.size(), {});
    for (std::size_t b = 0; b < steps_.size(); ++b) {
      for (int o = 0; o < width; ++o) column[static_cast<std::size_t>(o)] = logits_.at(o, static_cast<int>(b));
      probs_[b] = nn::masked_softmax(column, steps_[b]->mask);
      log_prob[b] = std::log(probs_[b][static_cast<std::size_t>(steps_[b]->chosen)]);
      double ent = 0.0;
      for (const double p : probs_[b])
        if (p > 0.0) ent -= p * std::log(p);
      entropy[b] = ent;
      value[b] = values_.at(0, static_cast<int>(b));
    }
  }

  void backward(std::span<const double> dlog_prob, std::span<const double> dvalue,
                std::span<const double> dentropy) override {
    const int width = logits_.rows;
    const int batch = logits_.cols;
    nn::Tensor dlogits(width, batch);
    std::vector<double> dcolumn(static_cast<std::size_t>(width));
    for (int b = 0; b < batch; ++b) {
      const std::size_t k = static_cast<std::size_t>(b);
      std::fill(dcolumn.begin(), dcolumn.end(), 0.0);
      nn::masked_log_prob_backward(probs_[k], steps_[k]->chosen, dlog_prob[k], dcolumn);
      if (dentropy[k] != 0.0) nn::masked_entropy_backward(probs_[k], dentropy[k], dcolumn);
      for (int o = 0; o < width; ++o) dlogits.at(o, b) = dcolumn[static_cast<std::size_t>(o)];
    }

    const nn::Tensor dh = nn::linear_backward(projection_, h_, dlogits);
    const nn::Tensor dx_policy = nn::mlp_backward(agent_.processor_, processor_cache_, dh);

    nn::Tensor dv(1, batch);
    for (int b = 0; b < batch; ++b) dv.at(0, b) = dvalue[static_cast<std::size_t>(b)];
    const nn::Tensor dhv = nn::linear_backward(agent_.critic_projection_, hv_, dv);
    const nn::Tensor dx_critic = nn::mlp_backward(agent_.critic_mlp_, critic_cache_, dhv);

    // The policy and critic paths both read the same embedding column.
    const int dim = dx_policy.rows;
    for (int b = 0; b < batch; ++b) {
      double* grad_row = table_.grad.row(contexts_[static_cast<std::size_t>(b)]);
      for (int f = 0; f < dim; ++f) grad_row[f] += dx_policy.at(f, b) + dx_critic.at(f, b);
    }
  }

  double old_log_prob(int i) const override { return steps_[static_cast<std::size_t>(i)]->log_prob; }
  double old_value(int i) const override { return steps_[static_cast<std::size_t>(i)]->value; }
  double reward(int i) const override { return steps_[static_cast<std::size_t>(i)]->reward; }

 private:
  NeuralAgent& agent_;
  nn::Param& table_;
  nn::Linear& projection_;
  std::vector<const NeuralAgent::Step*> steps_;
  std::vector<int> contexts_;

  nn::Tensor x_, h_, hv_, logits_, values_;
  nn::MlpCache processor_cache_, critic_cache_;
  std::vector<std::vector<double>> probs_;
};

// Static-input head (negation identity / meaning): the policy distribution
// is one shared softmax for the whole batch, while the critic is batched
// over the selected indices.
class StaticPpoHead final : public nn::PpoHead {
 public:
  StaticPpoHead(NeuralAgent& agent, NeuralAgent::StaticHead& head,
                std::vector<const NeuralAgent::Step*> steps)
      : agent_(agent), head_(head), steps_(std::move(steps)) {
    contexts_.reserve(steps_.size());
    for (const auto* step : steps_) contexts_.push_back(step->context);
  }

  int batch_size() const override { return static_cast<int>(steps_.size()); }

  void forward(std::span<double> log_prob, std::span<double> value,
               std::span<double> entropy) override {
    h_ = nn::mlp_forward(head_.mlp, agent_.static_input_, &policy_cache_);
    logits_ = nn::linear_forward(head_.projection, h_);  // (choices, 1)
    probs_ = nn::masked_softmax(logits_.v, {});
    double ent = 0.0;
    for (const double p : probs_)
      if (p > 0.0) ent -= p * std::log(p);

    xc_ = agent_.embed_columns(head_.critic_embedding, contexts_);
    hv_ = nn::mlp_forward(head_.critic_mlp, xc_, &critic_cache_);
    values_ = nn::linear_forward(head_.critic_projection, hv_);

    for (std::size_t b = 0; b < steps_.size(); ++b) {
      log_prob[b] = std::log(probs_[static_cast<std::size_t>(steps_[b]->chosen)]);
      entropy[b] = ent;
      value[b] = values_.at(0, static_cast<int>(b));
    }
  }

  void backward(std::span<const double> dlog_prob, std::span<const double> dvalue,
                std::span<const double> dentropy) override {
    const int width = logits_.rows;
    const int batch = static_cast<int>(steps_.size());

    std::vector<double> dcolumn(static_cast<std::size_t>(width), 0.0);
    double dentropy_total = 0.0;
    for (int b = 0; b < batch; ++b) {
      const std::size_t k = static_cast<std::size_t>(b);
      nn::masked_log_prob_backward(probs_, steps_[k]->chosen, dlog_prob[k], dcolumn);
      dentropy_total += dentropy[k];
    }
    if (dentropy_total != 0.0) nn::masked_entropy_backward(probs_, dentropy_total, dcolumn);

    nn::Tensor dlogits(width, 1);
    for (int o = 0; o < width; ++o) dlogits.v[static_cast<std::size_t>(o)] = dcolumn[static_cast<std::size_t>(o)];
    const nn::Tensor dh = nn::linear_backward(head_.projection, h_, dlogits);
    nn::mlp_backward(head_.mlp, policy_cache_, dh);  // static input: gradient ends here

    nn::Tensor dv(1, batch);
    for (int b = 0; b < batch; ++b) dv.at(0, b) = dvalue[static_cast<std::size_t>(b)];
    const nn::Tensor dhv = nn::linear_backward(head_.critic_projection, hv_, dv);
    const nn::Tensor dxc = nn::mlp_backward(head_.critic_mlp, critic_cache_, dhv);
    const int dim = dxc.rows;
    for (int b = 0; b < batch; ++b) {
      double* grad_row = head_.critic_embedding.grad.row(contexts_[static_cast<std::size_t>(b)]);
      for (int f = 0; f < dim; ++f) grad_row[f] += dxc.at(f, b);
    }
  }

  double old_log_prob(int i) const override { return steps_[static_cast<std::size_t>(i)]->log_prob; }
  double old_value(int i) const override { return steps_[static_cast<std::size_t>(i)]->value; }
  double reward(int i) const override { return steps_[static_cast<std::size_t>(i)]->reward; }

 private:
  NeuralAgent& agent_;
  NeuralAgent::StaticHead& head_;
  std::vector<const NeuralAgent::Step*> steps_;
  std::vector<int> contexts_;

  nn::Tensor h_, logits_, xc_, hv_, values_;
  nn::MlpCache policy_cache_, critic_cache_;
  std::vector<double> probs_;
};

std::vector<nn::EpochLoss> NeuralAgent::learn() {
  if (buffer_.empty()) return {};

  std::vector<const Step*> sender, receiver, negation, function;
  for (const Step& step : buffer_) {
    switch (step.head) {
      case HeadId::SenderPolicy: sender.push_back(&step); break;
      case HeadId::ReceiverPolicy: receiver.push_back(&step); break;
      case HeadId::Negation: negation.push_back(&step); break;
      case HeadId::Function: function.push_back(&step); break;
    }
  }

  std::vector<std::unique_ptr<nn::PpoHead>> heads;
  if (!sender.empty())
    heads.push_back(std::make_unique<PolicyPpoHead>(*this, sender_embedding_, sender_projection_,
                                                    std::move(sender)));
  if (!receiver.empty())
    heads.push_back(std::make_unique<PolicyPpoHead>(*this, receiver_embedding_,
                                                    receiver_projection_, std::move(receiver)));
  if (!negation.empty())
    heads.push_back(std::make_unique<StaticPpoHead>(*this, *negation_head_, std::move(negation)));
  if (!function.empty())
    heads.push_back(std::make_unique<StaticPpoHead>(*this, *function_head_, std::move(function)));

  std::vector<nn::PpoHead*> head_ptrs;
  head_ptrs.reserve(heads.size());
  for (const auto& head : heads) head_ptrs.push_back(head.get());

  auto losses = nn::ppo_update(head_ptrs, config_.ppo, params_, adam_);
  buffer_.clear();
  return losses;
}

// ---------------------------------------------------------------------------
// Distribution audits
// ---------------------------------------------------------------------------

std::vector<double> NeuralAgent::symbol_distribution(int state,
                                                     std::span<const std::uint8_t> mask) {
  const int rows[1] = {state};
  const nn::Tensor x = embed_columns(sender_embedding_, rows);
  const nn::Tensor h = nn::mlp_forward(processor_, x, nullptr);
  const nn::Tensor logits = nn::linear_forward(sender_projection_, h);
  return nn::masked_softmax(logits.v, mask);
}

std::vector<double> NeuralAgent::action_distribution(int symbol) {
  const int rows[1] = {symbol};
  const nn::Tensor x = embed_columns(receiver_embedding_, rows);
  const nn::Tensor h = nn::mlp_forward(processor_, x, nullptr);
  const nn::Tensor logits = nn::linear_forward(receiver_projection_, h);
  return nn::masked_softmax(logits.v, {});
}

std::vector<double> NeuralAgent::negation_distribution() {
  if (!negation_head_) throw std::logic_error("this game has no negation-identity choice");
  const nn::Tensor h = nn::mlp_forward(negation_head_->mlp, static_input_, nullptr);
  const nn::Tensor logits = nn::linear_forward(negation_head_->projection, h);
  return nn::masked_softmax(logits.v, {});
}

std::vector<double> NeuralAgent::meaning_distribution() {
  if (!function_head_) throw std::logic_error("this game has no meaning choice");
  const nn::Tensor h = nn::mlp_forward(function_head_->mlp, static_input_, nullptr);
  const nn::Tensor logits = nn::linear_forward(function_head_->projection, h);
  return nn::masked_softmax(logits.v, {});
}

}  // namespace signet
