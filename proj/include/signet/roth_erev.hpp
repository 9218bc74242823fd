#pragma once

#include <span>
#include <vector>

#include "signet/game.hpp"

namespace signet {

// Dense row-major accrual table.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill)
      : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& at(int r, int c) { return values_[index(r, c)]; }
  double at(int r, int c) const { return values_[index(r, c)]; }

  std::span<double> row(int r) { return {values_.data() + index(r, 0), static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {values_.data() + index(r, 0), static_cast<std::size_t>(cols_)};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int r, int c) const;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// Periodic rescaling of accrued rewards: v <- (v / sum(v)) * initial_reward
// + smoothing, applied every `interval` learning events. Restores plasticity
// without disturbing the sampling order of entries.
struct ResetPolicy {
  double initial_reward = 100.0;
  double smoothing = 1.0;
  int interval = 1000;
};

// Draw index j with probability weights[j] / sum of unmasked weights.
// An empty mask means everything is selectable.
int sample_masked(std::span<const double> weights, std::span<const std::uint8_t> mask, Rng& rng);

// Tabular reinforcement learner: each decision context owns a vector of
// accrued rewards, sampling is proportional to accruals, and success adds
// eta to every cell that was actually sampled.
class RothErevAgent final : public Agent {
 public:
  explicit RothErevAgent(const GameConfig& config, double eta = 1.0);

  int choose_symbol(int state, std::span<const std::uint8_t> mask, Rng& rng,
                    ChoiceRecord& out) override;
  int choose_action(int symbol, Rng& rng, ChoiceRecord& out) override;
  int choose_negation_identity(Role role, Rng& rng, ChoiceRecord& out) override;
  Meaning choose_meaning(Role role, Rng& rng, ChoiceRecord& out) override;

  void learn_from(const EpisodeRecord& episode, Role role) override;
  void end_learning_event() override {}
  void set_recording(bool on) override { recording_ = on; }
  void discard_pending() override {}
  std::string describe() const override { return "roth-erev"; }

  const GameConfig& config() const { return config_; }
  double learning_rate() const { return eta_; }

  Matrix& sender_matrix() { return sender_; }
  const Matrix& sender_matrix() const { return sender_; }
  Matrix& receiver_matrix() { return receiver_; }
  const Matrix& receiver_matrix() const { return receiver_; }
  std::vector<double>& negation_weights() { return negation_; }
  const std::vector<double>& negation_weights() const { return negation_; }
  std::vector<double>& meaning_weights() { return meaning_; }
  const std::vector<double>& meaning_weights() const { return meaning_; }

 private:
  GameConfig config_;
  double eta_;
  Matrix sender_;    // num_states x sender_decision_size
  Matrix receiver_;  // num_symbols x num_states
  std::vector<double> negation_;  // n+1, shared across roles
  std::vector<double> meaning_;   // 3, combined game only
  bool recording_ = true;
};

// Success credits exactly the cells the record says were sampled in `role`;
// failure changes nothing.
void reinforce(RothErevAgent& agent, const EpisodeRecord& episode, Role role);

// Applies the reset map to every accrual vector (matrix rows and the shared
// weight vectors). A zero-sum vector is a broken agent: hard error.
void reset_rewards(RothErevAgent& agent, const ResetPolicy& policy);

}  // namespace signet
