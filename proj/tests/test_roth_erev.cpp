#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "enumeration.hpp"
#include "signet/game.hpp"
#include "signet/roth_erev.hpp"

using signet::ChoiceRecord;
using signet::EpisodeRecord;
using signet::GameConfig;
using signet::GameKind;
using signet::Message;
using signet::Role;
using signet::RothErevAgent;
using signet::Rng;

TEST_CASE("fresh agents start uniform with game-shaped tables") {
  const GameConfig learned = GameConfig::make(GameKind::LearnedNegation, 4);
  RothErevAgent agent(learned);
  CHECK(agent.sender_matrix().rows() == 8);
  CHECK(agent.sender_matrix().cols() == 6);
  CHECK(agent.receiver_matrix().rows() == 5);
  CHECK(agent.receiver_matrix().cols() == 8);
  CHECK(agent.negation_weights().size() == 5);
  CHECK(agent.meaning_weights().empty());
  for (double w : agent.sender_matrix().values()) CHECK(w == 1.0);
  for (double w : agent.receiver_matrix().values()) CHECK(w == 1.0);

  const GameConfig combined = GameConfig::make(GameKind::CombinedNegation, 2);
  RothErevAgent combined_agent(combined);
  CHECK(combined_agent.meaning_weights().size() == 3);

  const GameConfig atomic = GameConfig::make(GameKind::Atomic, 2);
  RothErevAgent atomic_agent(atomic);
  CHECK(atomic_agent.negation_weights().empty());
  CHECK(atomic_agent.meaning_weights().empty());
  Rng rng(1, 0);
  ChoiceRecord out;
  CHECK_THROWS_AS(atomic_agent.choose_negation_identity(Role::Sender, rng, out), std::logic_error);
  CHECK_THROWS_AS(atomic_agent.choose_meaning(Role::Sender, rng, out), std::logic_error);

  CHECK_THROWS_AS(RothErevAgent(learned, 0.0), std::invalid_argument);
}

TEST_CASE("masked sampling draws proportionally to unmasked weights") {
  Rng rng(42, 0);
  const std::vector<double> degenerate{0.0, 5.0, 0.0};
  for (int i = 0; i < 50; ++i) CHECK(signet::sample_masked(degenerate, {}, rng) == 1);

  const std::vector<double> weights{1.0, 3.0, 6.0};
  const std::vector<std::uint8_t> drop_last{1, 1, 0};
  int counts[3] = {0, 0, 0};
  const int draws = 80000;
  for (int i = 0; i < draws; ++i) ++counts[signet::sample_masked(weights, drop_last, rng)];
  CHECK(counts[2] == 0);
  // P(0) = 1/4, P(1) = 3/4 after renormalization.
  CHECK(counts[0] > draws / 4 - 700);
  CHECK(counts[0] < draws / 4 + 700);

  const std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(signet::sample_masked(zeros, {}, rng), std::runtime_error);
  const std::vector<double> negative{1.0, -0.5};
  CHECK_THROWS_AS(signet::sample_masked(negative, {}, rng), std::domain_error);
  const std::vector<std::uint8_t> short_mask{1};
  CHECK_THROWS_AS(signet::sample_masked(weights, short_mask, rng), std::invalid_argument);
}

TEST_CASE("success credits exactly the sampled cells, one learning unit each") {
  const GameConfig game = GameConfig::make(GameKind::CombinedNegation, 2);
  RothErevAgent agent(game);

  EpisodeRecord rec;
  rec.game = game.kind;
  rec.state = 0;
  rec.negated_state = 2;
  rec.sender_negation.emplace();
  rec.sender_negation->index = 2;
  rec.receiver_negation.emplace();
  rec.receiver_negation->index = 1;
  rec.sender_meaning.emplace();
  rec.sender_meaning->index = 2;
  rec.receiver_meaning.emplace();
  rec.receiver_meaning->index = 0;
  rec.first_choice.index = 3;  // abstract slot
  rec.second_choice.emplace();
  rec.second_choice->index = 1;
  rec.message = Message::pair(2, 1);
  rec.consulted_symbol = 1;
  rec.action_choice.index = 2;
  rec.performed_action = 0;
  rec.reward = 1.0;

  SUBCASE("sender role") {
    reinforce(agent, rec, Role::Sender);
    CHECK(agent.sender_matrix().at(0, 3) == 2.0);  // first decision
    CHECK(agent.sender_matrix().at(2, 1) == 2.0);  // payload for the negated state
    CHECK(agent.negation_weights()[2] == 2.0);     // phi
    CHECK(agent.meaning_weights()[2] == 2.0);      // sender meaning
    // Receiver-side cells untouched.
    CHECK(agent.receiver_matrix().at(1, 2) == 1.0);
    CHECK(agent.negation_weights()[1] == 1.0);
    CHECK(agent.meaning_weights()[0] == 1.0);
    // Exactly four cells changed.
    double total = 0.0;
    for (double w : agent.sender_matrix().values()) total += w;
    CHECK(total == 4.0 * 4.0 + 2.0);  // 16 cells at 1.0 plus two +1 bumps
  }

  SUBCASE("receiver role credits the sampled action, not the performed one") {
    reinforce(agent, rec, Role::Receiver);
    CHECK(agent.receiver_matrix().at(1, 2) == 2.0);  // (consulted, sampled)
    CHECK(agent.receiver_matrix().at(1, 0) == 1.0);  // performed action unrewarded
    CHECK(agent.negation_weights()[1] == 2.0);       // psi
    CHECK(agent.meaning_weights()[0] == 2.0);        // receiver meaning
    CHECK(agent.sender_matrix().at(0, 3) == 1.0);
  }

  SUBCASE("failure changes nothing") {
    rec.reward = 0.0;
    reinforce(agent, rec, Role::Sender);
    reinforce(agent, rec, Role::Receiver);
    for (double w : agent.sender_matrix().values()) CHECK(w == 1.0);
    for (double w : agent.receiver_matrix().values()) CHECK(w == 1.0);
    for (double w : agent.negation_weights()) CHECK(w == 1.0);
    for (double w : agent.meaning_weights()) CHECK(w == 1.0);
  }

  SUBCASE("a custom learning rate scales the credit") {
    RothErevAgent fast(game, 2.5);
    reinforce(fast, rec, Role::Sender);
    CHECK(fast.sender_matrix().at(0, 3) == 3.5);
  }
}

TEST_CASE("reward resetting rescales to fixed mass plus smoothing") {
  const GameConfig game = GameConfig::make(GameKind::Atomic, 2);
  RothErevAgent agent(game);
  agent.sender_matrix().at(0, 0) = 3.0;
  agent.sender_matrix().at(0, 1) = 1.0;
  agent.sender_matrix().at(0, 2) = 0.0;
  agent.sender_matrix().at(0, 3) = 0.0;

  signet::ResetPolicy policy;  // initial_reward 100, smoothing 1
  signet::reset_rewards(agent, policy);

  CHECK(agent.sender_matrix().at(0, 0) == doctest::Approx(76.0));
  CHECK(agent.sender_matrix().at(0, 1) == doctest::Approx(26.0));
  CHECK(agent.sender_matrix().at(0, 2) == doctest::Approx(1.0));
  CHECK(agent.sender_matrix().at(0, 3) == doctest::Approx(1.0));

  // Untouched uniform rows map to uniform rows: 25 + 1 each.
  CHECK(agent.sender_matrix().at(1, 0) == doctest::Approx(26.0));

  // Proportions are preserved for the reset row.
  const double ratio = (agent.sender_matrix().at(0, 0) - 1.0) / (agent.sender_matrix().at(0, 1) - 1.0);
  CHECK(ratio == doctest::Approx(3.0));
}

TEST_CASE("resetting a zero-mass row is a hard error") {
  const GameConfig game = GameConfig::make(GameKind::Atomic, 2);
  RothErevAgent agent(game);
  for (int c = 0; c < 4; ++c) agent.sender_matrix().at(2, c) = 0.0;
  CHECK_THROWS_AS(signet::reset_rewards(agent, signet::ResetPolicy{}), std::runtime_error);
}

TEST_CASE("two agents learn a small atomic signalling system") {
  const GameConfig game = GameConfig::make_atomic(2, 2);
  RothErevAgent sender(game);
  RothErevAgent receiver(game);
  Rng rng(42, signet::kTrainStream);
  for (int episode = 0; episode < 3000; ++episode) {
    const int state = static_cast<int>(rng.below(2));
    const EpisodeRecord rec = play_atomic(sender, receiver, state, game, rng);
    sender.learn_from(rec, Role::Sender);
    receiver.learn_from(rec, Role::Receiver);
  }
  const double expected = enumeration::expected_success(sender, receiver, game, nullptr);
  CHECK(expected > 0.9);
}

TEST_CASE("choices respect referee masks") {
  const GameConfig game = GameConfig::make(GameKind::LearnedNegation, 4);
  RothErevAgent agent(game);
  Rng rng(11, 1);
  ChoiceRecord out;
  const auto mask = signet::first_decision_mask(game, 2, true);
  for (int i = 0; i < 2000; ++i) {
    const int pick = agent.choose_symbol(3, mask, rng, out);
    CHECK(pick != 2);
    CHECK(pick >= 0);
    CHECK(pick < game.sender_decision_size());
    CHECK(out.mask.size() == mask.size());
  }
}
