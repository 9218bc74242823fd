#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "signet/game.hpp"
#include "signet/nn.hpp"

namespace signet {

// Architecture and training knobs for the actor-critic agent. Widths and
// optimizer settings default to the reference setup; everything is
// overridable for tests and exploratory runs.
struct NeuralConfig {
  int embed_dim = 128;
  int depth = 5;
  nn::AdamConfig adam;  // lr 0.002, betas (0.9, 0.999), eps 1e-8
  nn::PpoConfig ppo;    // clip 0.2, 4 epochs, value coef 0.5, entropy coef 0
};

// Which policy/critic pairing produced an experience tuple.
enum class HeadId { SenderPolicy, ReceiverPolicy, Negation, Function };

// Actor-critic agent. Both roles share one processor MLP and one critic;
// role-specific embeddings and projections sit on either side. Negation
// identity and (combined game) meaning come from separate static-input
// heads, each with its own critic over the selected index. Learning is
// clipped-surrogate policy optimization over the tuples gathered during one
// learning event, role-separated in the buffer and grouped per head.
class NeuralAgent final : public Agent {
 public:
  // One buffered decision. `context` is the embedding row that conditioned
  // the decision (state, consulted symbol, or the selected index for the
  // static heads, whose policy input never varies).
  struct Step {
    HeadId head = HeadId::SenderPolicy;
    Role role = Role::Sender;
    int context = -1;
    std::vector<std::uint8_t> mask;
    int chosen = -1;
    double log_prob = 0.0;
    double value = 0.0;
    double reward = 0.0;
  };

  // A static-input categorical head (negation identity / meaning) with a
  // critic that scores the selected index.
  struct StaticHead {
    nn::MlpBlock mlp;
    nn::Linear projection;
    nn::Param critic_embedding;
    nn::MlpBlock critic_mlp;
    nn::Linear critic_projection;

    StaticHead(const std::string& name, int dim, int depth, int choices);
  };

  NeuralAgent(const GameConfig& game, const NeuralConfig& config, Rng& init_rng);

  int choose_symbol(int state, std::span<const std::uint8_t> mask, Rng& rng,
                    ChoiceRecord& out) override;
  int choose_action(int symbol, Rng& rng, ChoiceRecord& out) override;
  int choose_negation_identity(Role role, Rng& rng, ChoiceRecord& out) override;
  Meaning choose_meaning(Role role, Rng& rng, ChoiceRecord& out) override;

  void learn_from(const EpisodeRecord& episode, Role role) override;
  void end_learning_event() override;
  void set_recording(bool on) override { recording_ = on; }
  void discard_pending() override { pending_.clear(); }
  std::string describe() const override { return "neural"; }

  // Runs the clipped-surrogate update over everything buffered (grouped by
  // head, K epochs, one optimizer step per epoch) and clears the buffer.
  // Empty buffer: no-op with empty statistics.
  std::vector<nn::EpochLoss> learn();

  const GameConfig& game() const { return game_; }
  const NeuralConfig& config() const { return config_; }
  const std::vector<Step>& buffer() const { return buffer_; }
  const std::vector<Step>& pending() const { return pending_; }

  // Canonical parameter list (stable order); one optimizer state for all.
  const std::vector<nn::Param*>& parameters() const { return params_; }
  std::vector<nn::Param*>& parameters() { return params_; }
  nn::AdamState& adam() { return adam_; }
  const nn::AdamState& adam() const { return adam_; }

  // Current policy distributions, exposed for audits and tests.
  std::vector<double> symbol_distribution(int state, std::span<const std::uint8_t> mask);
  std::vector<double> action_distribution(int symbol);
  std::vector<double> negation_distribution();
  std::vector<double> meaning_distribution();

 private:
  friend class PolicyPpoHead;
  friend class StaticPpoHead;

  nn::Tensor embed_columns(const nn::Param& table, std::span<const int> rows) const;
  double critic_value(const nn::MlpBlock& mlp, const nn::Linear& projection,
                      const nn::Tensor& x) const;
  int sample_policy(const nn::Param& table, const nn::MlpBlock& mlp, const nn::Linear& projection,
                    int context, std::span<const std::uint8_t> mask, Rng& rng, ChoiceRecord& out,
                    HeadId head, Role role);
  int sample_static(StaticHead& head, HeadId id, Role role, Rng& rng, ChoiceRecord& out);
  void record_step(Step step, ChoiceRecord& out);

  GameConfig game_;
  NeuralConfig config_;

  nn::Param sender_embedding_;    // num_states x dim
  nn::Param receiver_embedding_;  // num_symbols x dim
  nn::MlpBlock processor_;        // shared across roles
  nn::Linear sender_projection_;
  nn::Linear receiver_projection_;
  nn::MlpBlock critic_mlp_;  // shared; consumes pre-processor embeddings
  nn::Linear critic_projection_;
  std::optional<StaticHead> negation_head_;  // learned/combined games
  std::optional<StaticHead> function_head_;  // combined game

  nn::Tensor static_input_;  // fixed all-ones column
  std::vector<nn::Param*> params_;
  nn::AdamState adam_;

  std::vector<Step> pending_;  // current episode, reward not yet known
  std::vector<Step> buffer_;   // finished tuples awaiting learn()
  bool recording_ = true;
};

}  // namespace signet
