#include "signet/roth_erev.hpp"

#include <cassert>
#include <stdexcept>

namespace signet {

std::size_t Matrix::index(int r, int c) const {
  assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
  return static_cast<std::size_t>(r) * cols_ + c;
}

int sample_masked(std::span<const double> weights, std::span<const std::uint8_t> mask, Rng& rng) {
  if (!mask.empty() && mask.size() != weights.size())
    throw std::invalid_argument("sample_masked: mask length mismatch");

  const auto selectable = [&](std::size_t j) { return mask.empty() || mask[j] != 0; };

  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] < 0.0) throw std::domain_error("sample_masked: negative weight");
    if (selectable(j)) total += weights[j];
  }
  if (total <= 0.0) throw std::runtime_error("sample_masked: no selectable weight mass");

  const double u = rng.uniform01() * total;
  double cumulative = 0.0;
  int last = -1;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!selectable(j) || weights[j] == 0.0) continue;
    cumulative += weights[j];
    last = static_cast<int>(j);
    if (u < cumulative) return last;
  }
  // Rounding can leave u a hair past the accumulated total; the final
  // selectable index is the only consistent answer.
  return last;
}

namespace {

int sample_into(std::span<const double> weights, std::span<const std::uint8_t> mask, Rng& rng,
                ChoiceRecord& out) {
  out.index = sample_masked(weights, mask, rng);
  out.mask.assign(mask.begin(), mask.end());
  return out.index;
}

}  // namespace

RothErevAgent::RothErevAgent(const GameConfig& config, double eta)
    : config_(config), eta_(eta) {
  config_.validate();
  if (eta <= 0.0) throw std::invalid_argument("RothErevAgent: eta must be positive");
  sender_ = Matrix(config_.num_states, config_.sender_decision_size(), 1.0);
  receiver_ = Matrix(config_.num_symbols, config_.num_states, 1.0);
  if (config_.kind == GameKind::LearnedNegation || config_.kind == GameKind::CombinedNegation)
    negation_.assign(static_cast<std::size_t>(config_.num_symbols), 1.0);
  if (config_.kind == GameKind::CombinedNegation) meaning_.assign(3, 1.0);
}

int RothErevAgent::choose_symbol(int state, std::span<const std::uint8_t> mask, Rng& rng,
                                 ChoiceRecord& out) {
  return sample_into(sender_.row(state), mask, rng, out);
}

int RothErevAgent::choose_action(int symbol, Rng& rng, ChoiceRecord& out) {
  return sample_into(receiver_.row(symbol), {}, rng, out);
}

int RothErevAgent::choose_negation_identity(Role, Rng& rng, ChoiceRecord& out) {
  if (negation_.empty()) throw std::logic_error("this game has no negation-identity choice");
  return sample_into(negation_, {}, rng, out);
}

Meaning RothErevAgent::choose_meaning(Role, Rng& rng, ChoiceRecord& out) {
  if (meaning_.empty()) throw std::logic_error("this game has no meaning choice");
  return static_cast<Meaning>(sample_into(meaning_, {}, rng, out));
}

void RothErevAgent::learn_from(const EpisodeRecord& episode, Role role) {
  reinforce(*this, episode, role);
}

void reinforce(RothErevAgent& agent, const EpisodeRecord& episode, Role role) {
  if (episode.reward == 0.0) return;
  const double eta = agent.learning_rate();
  if (role == Role::Sender) {
    agent.sender_matrix().at(episode.state, episode.first_choice.index) += eta;
    if (episode.second_choice)
      agent.sender_matrix().at(episode.negated_state, episode.second_choice->index) += eta;
    if (episode.sender_negation) agent.negation_weights()[episode.sender_negation->index] += eta;
    if (episode.sender_meaning) agent.meaning_weights()[episode.sender_meaning->index] += eta;
  } else {
    // The sampled action is credited, not the performed one: when the inverse
    // derangement was applied, crediting f^-1(a) would reward a cell that was
    // never drawn.
    agent.receiver_matrix().at(episode.consulted_symbol, episode.action_choice.index) += eta;
    if (episode.receiver_negation)
      agent.negation_weights()[episode.receiver_negation->index] += eta;
    if (episode.receiver_meaning) agent.meaning_weights()[episode.receiver_meaning->index] += eta;
  }
}

namespace {

void reset_vector(std::span<double> values, const ResetPolicy& policy) {
  double total = 0.0;
  for (const double v : values) total += v;
  if (total <= 0.0) throw std::runtime_error("reset_rewards: vector has no mass");
  for (double& v : values) v = v / total * policy.initial_reward + policy.smoothing;
}

}  // namespace

void reset_rewards(RothErevAgent& agent, const ResetPolicy& policy) {
  if (policy.initial_reward <= 0.0)
    throw std::invalid_argument("reset_rewards: initial_reward must be positive");
  for (int r = 0; r < agent.sender_matrix().rows(); ++r)
    reset_vector(agent.sender_matrix().row(r), policy);
  for (int r = 0; r < agent.receiver_matrix().rows(); ++r)
    reset_vector(agent.receiver_matrix().row(r), policy);
  if (!agent.negation_weights().empty()) reset_vector(agent.negation_weights(), policy);
  if (!agent.meaning_weights().empty()) reset_vector(agent.meaning_weights(), policy);
}

}  // namespace signet
