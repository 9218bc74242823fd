#include "signet/game.hpp"

#include <stdexcept>

namespace signet {

GameKind parse_game_kind(const std::string& name) {
  if (name == "atomic") return GameKind::Atomic;
  if (name == "basic") return GameKind::BasicNegation;
  if (name == "learned") return GameKind::LearnedNegation;
  if (name == "combined") return GameKind::CombinedNegation;
  throw std::invalid_argument("unknown game: " + name);
}

std::string to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Atomic: return "atomic";
    case GameKind::BasicNegation: return "basic";
    case GameKind::LearnedNegation: return "learned";
    case GameKind::CombinedNegation: return "combined";
  }
  throw std::logic_error("unknown GameKind");
}

GameConfig GameConfig::make(GameKind kind, int n) {
  GameConfig config;
  config.kind = kind;
  config.n = n;
  config.num_states = 2 * n;
  config.num_symbols = kind == GameKind::Atomic ? 2 * n : n + 1;
  config.validate();
  return config;
}

GameConfig GameConfig::make_atomic(int num_states, int num_symbols) {
  GameConfig config;
  config.kind = GameKind::Atomic;
  config.n = num_states / 2;
  config.num_states = num_states;
  config.num_symbols = num_symbols;
  config.validate();
  return config;
}

int GameConfig::sender_decision_size() const {
  switch (kind) {
    case GameKind::Atomic:
      return num_symbols;
    case GameKind::BasicNegation:
      // n plain symbols plus the fixed negation symbol, which is also the trigger.
      return n + 1;
    case GameKind::LearnedNegation:
    case GameKind::CombinedNegation:
      // All n+1 concrete symbols plus the abstract negation slot.
      return num_symbols + 1;
  }
  throw std::logic_error("unknown GameKind");
}

int GameConfig::negation_index() const {
  switch (kind) {
    case GameKind::Atomic: return -1;
    case GameKind::BasicNegation: return n;
    case GameKind::LearnedNegation:
    case GameKind::CombinedNegation: return num_symbols;
  }
  throw std::logic_error("unknown GameKind");
}

void GameConfig::validate() const {
  if (kind == GameKind::Atomic) {
    if (num_states < 2) throw std::invalid_argument("atomic game needs at least 2 states");
    if (num_symbols < 1) throw std::invalid_argument("atomic game needs at least 1 symbol");
    return;
  }
  if (n < 2) throw std::invalid_argument("negation games need n >= 2");
  if (num_states != 2 * n) throw std::invalid_argument("negation games need num_states = 2n");
  if (num_symbols != n + 1) throw std::invalid_argument("negation games need num_symbols = n+1");
}

std::vector<std::uint8_t> first_decision_mask(const GameConfig& config, int phi,
                                              bool negation_meaning) {
  const int width = config.sender_decision_size();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width), 1);
  switch (config.kind) {
    case GameKind::Atomic:
      break;
    case GameKind::BasicNegation:
      if (!config.allow_negation) mask[static_cast<std::size_t>(config.negation_index())] = 0;
      break;
    case GameKind::LearnedNegation:
    case GameKind::CombinedNegation:
      if (negation_meaning) {
        // Sending phi itself as the payload would be indistinguishable from
        // the negation marker, so it is excluded up front.
        mask[static_cast<std::size_t>(phi)] = 0;
        if (!config.allow_negation) mask[static_cast<std::size_t>(config.negation_index())] = 0;
      } else {
        // Ignore/Atomic meanings act like the atomic game over all concrete
        // symbols; the abstract slot is unavailable.
        mask[static_cast<std::size_t>(config.negation_index())] = 0;
      }
      break;
  }
  return mask;
}

std::vector<std::uint8_t> second_decision_mask(const GameConfig& config, int phi) {
  const int width = config.sender_decision_size();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width), 1);
  switch (config.kind) {
    case GameKind::BasicNegation:
      // Only plain symbols may follow the negation symbol.
      mask[static_cast<std::size_t>(config.negation_index())] = 0;
      break;
    case GameKind::LearnedNegation:
    case GameKind::CombinedNegation:
      // The payload is a plain symbol: not phi (message (phi, phi) would be
      // ambiguous) and not the abstract slot.
      mask[static_cast<std::size_t>(phi)] = 0;
      mask[static_cast<std::size_t>(config.negation_index())] = 0;
      break;
    case GameKind::Atomic:
      throw std::logic_error("second_decision_mask: atomic game has no second decision");
  }
  return mask;
}

namespace {

void check_state(int state, const GameConfig& config) {
  if (state < 0 || state >= config.num_states) throw std::out_of_range("state out of range");
}

// Receiver consults `symbol`, samples an action, and optionally decodes it
// through the inverse derangement.
void decode_and_act(Agent& receiver, int symbol, bool apply_inverse, const Derangement* f,
                    EpisodeRecord& rec, Rng& rng) {
  rec.consulted_symbol = symbol;
  const int sampled = receiver.choose_action(symbol, rng, rec.action_choice);
  rec.performed_action = apply_inverse ? f->invert(sampled) : sampled;
}

void settle(EpisodeRecord& rec) { rec.reward = rec.performed_action == rec.state ? 1.0 : 0.0; }

}  // namespace

EpisodeRecord play_atomic(Agent& sender, Agent& receiver, int state, const GameConfig& config,
                          Rng& rng) {
  check_state(state, config);
  EpisodeRecord rec;
  rec.game = GameKind::Atomic;
  rec.state = state;

  const auto mask = first_decision_mask(config, -1, false);
  const int symbol = sender.choose_symbol(state, mask, rng, rec.first_choice);
  rec.message = Message::single(symbol);
  decode_and_act(receiver, symbol, false, nullptr, rec, rng);
  settle(rec);
  return rec;
}

EpisodeRecord play_basic_negation(Agent& sender, Agent& receiver, int state,
                                  const GameConfig& config, const Derangement& f, Rng& rng) {
  check_state(state, config);
  EpisodeRecord rec;
  rec.game = GameKind::BasicNegation;
  rec.state = state;

  const auto mask = first_decision_mask(config, -1, true);
  const int first = sender.choose_symbol(state, mask, rng, rec.first_choice);
  if (first == config.negation_index()) {
    // Negation branch: name the opposite state with a plain symbol. Both
    // sides share the fixed convention, so the receiver always decodes the
    // payload and undoes the derangement.
    rec.negated_state = f.map(state);
    rec.second_choice.emplace();
    const auto payload_mask = second_decision_mask(config, -1);
    const int payload = sender.choose_symbol(rec.negated_state, payload_mask, rng, *rec.second_choice);
    rec.message = Message::pair(first, payload);
    decode_and_act(receiver, payload, true, &f, rec, rng);
  } else {
    rec.message = Message::single(first);
    decode_and_act(receiver, first, false, nullptr, rec, rng);
  }
  settle(rec);
  return rec;
}

namespace {

// Shared by the learned and combined games: sender-side negation emission
// (abstract slot already drawn) and receiver-side two-symbol interpretation.
void emit_negated_payload(Agent& sender, int state, int phi, const GameConfig& config,
                          const Derangement& f, EpisodeRecord& rec, Rng& rng) {
  rec.negated_state = f.map(state);
  rec.second_choice.emplace();
  const auto payload_mask = second_decision_mask(config, phi);
  const int payload = sender.choose_symbol(rec.negated_state, payload_mask, rng, *rec.second_choice);
  rec.message = Message::pair(phi, payload);
}

// Unparseable two-symbol message: a fair coin picks which wire symbol to
// read, and the action is performed without the inverse map.
void decode_unparseable(Agent& receiver, const Derangement* f, EpisodeRecord& rec, Rng& rng) {
  const int coin = static_cast<int>(rng.below(2));
  rec.unparseable_coin = coin;
  decode_and_act(receiver, rec.message[coin], false, f, rec, rng);
}

}  // namespace

EpisodeRecord play_learned_negation(Agent& sender, Agent& receiver, int state,
                                    const GameConfig& config, const Derangement& f, Rng& rng) {
  check_state(state, config);
  EpisodeRecord rec;
  rec.game = GameKind::LearnedNegation;
  rec.state = state;

  rec.sender_negation.emplace();
  const int phi = sender.choose_negation_identity(Role::Sender, rng, *rec.sender_negation);
  rec.receiver_negation.emplace();
  const int psi = receiver.choose_negation_identity(Role::Receiver, rng, *rec.receiver_negation);

  const auto mask = first_decision_mask(config, phi, true);
  const int first = sender.choose_symbol(state, mask, rng, rec.first_choice);

  if (first == config.negation_index()) {
    emit_negated_payload(sender, state, phi, config, f, rec, rng);
    const int payload = rec.message[1];
    if (psi == phi) {
      decode_and_act(receiver, payload, true, &f, rec, rng);
    } else if (psi == payload) {
      decode_and_act(receiver, phi, true, &f, rec, rng);
    } else {
      decode_unparseable(receiver, &f, rec, rng);
    }
  } else {
    rec.message = Message::single(first);
    decode_and_act(receiver, first, false, nullptr, rec, rng);
  }
  settle(rec);
  return rec;
}

EpisodeRecord play_combined_negation(Agent& sender, Agent& receiver, int state,
                                     const GameConfig& config, const Derangement& f, Rng& rng) {
  check_state(state, config);
  EpisodeRecord rec;
  rec.game = GameKind::CombinedNegation;
  rec.state = state;

  rec.sender_negation.emplace();
  const int phi = sender.choose_negation_identity(Role::Sender, rng, *rec.sender_negation);
  rec.sender_meaning.emplace();
  const Meaning sender_meaning = sender.choose_meaning(Role::Sender, rng, *rec.sender_meaning);
  rec.receiver_negation.emplace();
  const int psi = receiver.choose_negation_identity(Role::Receiver, rng, *rec.receiver_negation);
  rec.receiver_meaning.emplace();
  const Meaning receiver_meaning = receiver.choose_meaning(Role::Receiver, rng, *rec.receiver_meaning);

  const bool sender_negates = sender_meaning == Meaning::Negation;
  const auto mask = first_decision_mask(config, phi, sender_negates);
  const int first = sender.choose_symbol(state, mask, rng, rec.first_choice);

  if (sender_negates && first == config.negation_index()) {
    emit_negated_payload(sender, state, phi, config, f, rec, rng);
    const int payload = rec.message[1];
    const bool psi_present = rec.message.contains(psi);
    if (!psi_present) {
      decode_unparseable(receiver, &f, rec, rng);
    } else {
      const int other = psi == phi ? payload : phi;
      switch (receiver_meaning) {
        case Meaning::Ignore:
          decode_and_act(receiver, other, false, &f, rec, rng);
          break;
        case Meaning::Atomic:
          // The negation symbol is read as a plain name for a state.
          decode_and_act(receiver, psi, false, &f, rec, rng);
          break;
        case Meaning::Negation:
          decode_and_act(receiver, other, true, &f, rec, rng);
          break;
      }
    }
  } else {
    rec.message = Message::single(first);
    decode_and_act(receiver, first, false, nullptr, rec, rng);
  }
  settle(rec);
  return rec;
}

EpisodeRecord play_game(Agent& sender, Agent& receiver, int state, const GameConfig& config,
                        const Derangement* f, Rng& rng) {
  if (config.is_negation_game() && f == nullptr)
    throw std::invalid_argument("play_game: negation games need a derangement");
  switch (config.kind) {
    case GameKind::Atomic: return play_atomic(sender, receiver, state, config, rng);
    case GameKind::BasicNegation: return play_basic_negation(sender, receiver, state, config, *f, rng);
    case GameKind::LearnedNegation:
      return play_learned_negation(sender, receiver, state, config, *f, rng);
    case GameKind::CombinedNegation:
      return play_combined_negation(sender, receiver, state, config, *f, rng);
  }
  throw std::logic_error("unknown GameKind");
}

}  // namespace signet
