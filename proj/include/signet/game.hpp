#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signet/derangement.hpp"
#include "signet/rng.hpp"

namespace signet {

enum class GameKind { Atomic, BasicNegation, LearnedNegation, CombinedNegation };

enum class Role { Sender, Receiver };

// Second-stage interpretation chosen by each side in the combined game.
// Ignore: treat the message as one plain symbol (whichever is not own phi /
// not own psi). Atomic: treat own negation symbol itself as a plain symbol.
// Negation: run the full negation protocol.
enum class Meaning : int { Ignore = 0, Atomic = 1, Negation = 2 };

GameKind parse_game_kind(const std::string& name);
std::string to_string(GameKind kind);

// Static shape of one game. For negation games there are 2n states and n+1
// symbols; the atomic game allows any (num_states, num_symbols) pair.
struct GameConfig {
  GameKind kind = GameKind::LearnedNegation;
  int n = 4;               // half the state count in negation games
  int num_states = 8;
  int num_symbols = 5;     // concrete symbols on the wire
  bool allow_negation = true;  // when false the referee masks the negation branch out

  // Negation games: 2n states, n+1 symbols. Atomic: 2n states, 2n symbols.
  static GameConfig make(GameKind kind, int n);
  // Atomic game with explicit sizes (states and symbols may differ).
  static GameConfig make_atomic(int num_states, int num_symbols);

  bool is_negation_game() const { return kind != GameKind::Atomic; }

  // Width of the sender's first decision. Atomic: num_symbols. Basic: n+1
  // (the last symbol doubles as the negation trigger). Learned/combined:
  // n+2 (all concrete symbols plus one abstract negation slot).
  int sender_decision_size() const;

  // Index in the sender's first-decision space that starts the negation
  // branch; -1 for the atomic game.
  int negation_index() const;

  int num_actions() const { return num_states; }

  void validate() const;
};

// What actually crosses the wire: one or two concrete symbols. The abstract
// negation slot of the learned/combined games never appears here; it is
// replaced by the sender's chosen negation symbol.
struct Message {
  std::array<int, 2> symbols{-1, -1};
  int length = 0;

  static Message single(int symbol) { return Message{{symbol, -1}, 1}; }
  static Message pair(int first, int second) { return Message{{first, second}, 2}; }

  int operator[](int i) const { return symbols[static_cast<std::size_t>(i)]; }
  bool contains(int symbol) const {
    return (length > 0 && symbols[0] == symbol) || (length > 1 && symbols[1] == symbol);
  }
};

// One sampled decision plus everything needed to reproduce or re-score it.
// log_prob/value are filled by agents that train on them (the neural agent);
// reinforcement agents leave them empty.
struct ChoiceRecord {
  int index = -1;
  std::vector<std::uint8_t> mask;  // 1 = selectable at sampling time; empty = everything
  std::optional<double> log_prob;
  std::optional<double> value;
};

// Full trace of one episode, sufficient for both learning rules and for
// re-deriving the outcome in tests.
struct EpisodeRecord {
  GameKind game = GameKind::Atomic;
  int state = -1;
  int negated_state = -1;  // f(state) when the negation branch ran, else -1

  std::optional<ChoiceRecord> sender_negation;    // phi pick (learned/combined)
  std::optional<ChoiceRecord> receiver_negation;  // psi pick (learned/combined)
  std::optional<ChoiceRecord> sender_meaning;     // combined only
  std::optional<ChoiceRecord> receiver_meaning;   // combined only

  ChoiceRecord first_choice;                // sender's first decision
  std::optional<ChoiceRecord> second_choice;  // sender's symbol for f(state)

  Message message;
  int consulted_symbol = -1;   // symbol the receiver actually conditioned on
  ChoiceRecord action_choice;  // receiver's sampled action
  int performed_action = -1;   // after any inverse-derangement decode
  std::optional<int> unparseable_coin;  // 0 = first wire symbol, 1 = second

  double reward = 0.0;

  bool used_negation() const { return message.length == 2; }
};

// Minimal behavioural surface a learning rule must expose to play any of the
// four games. The game referee owns all masks and all protocol logic; agents
// only turn (context row, mask) into a sampled index.
class Agent {
 public:
  virtual ~Agent() = default;

  // Sender-side: sample a symbol (or the abstract negation slot) for a state.
  virtual int choose_symbol(int state, std::span<const std::uint8_t> mask, Rng& rng,
                            ChoiceRecord& out) = 0;
  // Receiver-side: sample an action given the consulted symbol.
  virtual int choose_action(int symbol, Rng& rng, ChoiceRecord& out) = 0;
  // Learned/combined games: pick this episode's negation symbol (phi or psi).
  virtual int choose_negation_identity(Role role, Rng& rng, ChoiceRecord& out) = 0;
  // Combined game only: pick the meaning used for two-symbol interpretation.
  virtual Meaning choose_meaning(Role role, Rng& rng, ChoiceRecord& out) = 0;

  // Consume one finished episode in the given role.
  virtual void learn_from(const EpisodeRecord& episode, Role role) = 0;

  // Signals the end of one learning event (all games an agent was drawn into
  // for that event). Batch learners update here; others ignore it.
  virtual void end_learning_event() = 0;

  // Evaluation toggles recording off so play leaves no trace in the agent.
  virtual void set_recording(bool on) = 0;
  virtual void discard_pending() = 0;

  virtual std::string describe() const = 0;
};

// The four referees. Each drives one episode: sender observes `state`,
// communication happens per the game's rules, and the receiver's performed
// action earns reward 1 on a state match, else 0.
EpisodeRecord play_atomic(Agent& sender, Agent& receiver, int state, const GameConfig& config,
                          Rng& rng);
EpisodeRecord play_basic_negation(Agent& sender, Agent& receiver, int state,
                                  const GameConfig& config, const Derangement& f, Rng& rng);
EpisodeRecord play_learned_negation(Agent& sender, Agent& receiver, int state,
                                    const GameConfig& config, const Derangement& f, Rng& rng);
EpisodeRecord play_combined_negation(Agent& sender, Agent& receiver, int state,
                                     const GameConfig& config, const Derangement& f, Rng& rng);

// Dispatch on config.kind. `f` may be null for the atomic game only.
EpisodeRecord play_game(Agent& sender, Agent& receiver, int state, const GameConfig& config,
                        const Derangement* f, Rng& rng);

// Mask builders, exposed for tests. Width = config.sender_decision_size().
std::vector<std::uint8_t> first_decision_mask(const GameConfig& config, int phi,
                                              bool negation_meaning);
std::vector<std::uint8_t> second_decision_mask(const GameConfig& config, int phi);

}  // namespace signet
