// Population-level tests: pairing/trial bookkeeping (observed through exact
// reinforcement mass under deterministic perfect policies), frozen-policy
// evaluation, repetition trajectories and determinism, reward resets,
// Student-t critical values, and summary statistics.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "signet/population.hpp"
#include "signet/rng.hpp"

using namespace signet;

namespace {

ExperimentConfig base_config(GameKind kind, int n) {
  ExperimentConfig config;
  config.game = GameConfig::make(kind, n);
  config.population = 2;
  config.events = 10;
  config.trials = 2;
  config.eval_games = 10;
  config.eval_interval = 5;
  config.repetitions = 1;
  config.base_seed = 42;
  return config;
}

double matrix_mass(const Matrix& m) {
  double total = 0.0;
  for (double v : m.values()) total += v;
  return total;
}

// Rewrites a tabular agent into the deterministic identity policy for an
// atomic game whose state and symbol spaces coincide: sender says i in state
// i, receiver acts i on symbol i. Every game then succeeds, which turns
// reinforcement mass into an exact game counter.
void make_identity_policy(RothErevAgent& agent) {
  Matrix& sender = agent.sender_matrix();
  Matrix& receiver = agent.receiver_matrix();
  for (int r = 0; r < sender.rows(); ++r)
    for (int c = 0; c < sender.cols(); ++c) sender.at(r, c) = (r == c) ? 1.0 : 0.0;
  for (int r = 0; r < receiver.rows(); ++r)
    for (int c = 0; c < receiver.cols(); ++c) receiver.at(r, c) = (r == c) ? 1.0 : 0.0;
}

RothErevAgent& tabular(Population& population, int index) {
  return dynamic_cast<RothErevAgent&>(population[index]);
}

}  // namespace

TEST_CASE("a learning event gives every agent trials games per role per partner") {
  ExperimentConfig config = base_config(GameKind::Atomic, 2);  // 4 states, 4 symbols
  config.population = 3;
  config.trials = 2;

  Rng init(1, kInitStream);
  Population population(config, init);
  REQUIRE(population.size() == 3);
  for (int i = 0; i < population.size(); ++i) make_identity_policy(tabular(population, i));

  Rng train(1, kTrainStream);
  run_learning_event(population, config, nullptr, train);

  // Identity policies win every game, so each unit of added mass is exactly
  // one game played in that role. Each agent takes each role trials times
  // against every agent (once from its own turn, once from the partner's):
  // 2 * population * trials games per agent per role.
  const double per_role = static_cast<double>(2 * config.population * config.trials);
  const double start_mass = 4.0;  // the identity diagonal
  for (int i = 0; i < population.size(); ++i) {
    const RothErevAgent& agent = tabular(population, i);
    CHECK(matrix_mass(agent.sender_matrix()) == start_mass + per_role);
    CHECK(matrix_mass(agent.receiver_matrix()) == start_mass + per_role);
    // All reinforcement stays on the diagonal: the policy never drifts.
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (r != c) {
          CHECK(agent.sender_matrix().at(r, c) == 0.0);
          CHECK(agent.receiver_matrix().at(r, c) == 0.0);
        }
  }
}

TEST_CASE("evaluation freezes policies and scores perfect play at exactly 1") {
  ExperimentConfig config = base_config(GameKind::Atomic, 2);
  config.eval_games = 25;

  Rng init(3, kInitStream);
  Population population(config, init);
  make_identity_policy(tabular(population, 0));
  make_identity_policy(tabular(population, 1));

  const std::vector<double> before_sender = tabular(population, 0).sender_matrix().values();
  const std::vector<double> before_receiver = tabular(population, 1).receiver_matrix().values();

  Rng eval(3, kEvalStream);
  const FitnessSample sample = evaluate_fitness(population, config, nullptr, eval, 123);

  CHECK(sample.event == 123);
  CHECK(sample.with_self == 1.0);
  CHECK(sample.without_self == 1.0);
  CHECK(sample.negation_rate == 0.0);  // the atomic game has no negation branch
  // Accruals are bitwise untouched by evaluation games.
  CHECK(tabular(population, 0).sender_matrix().values() == before_sender);
  CHECK(tabular(population, 1).receiver_matrix().values() == before_receiver);
}

TEST_CASE("an untrained population scores near chance and sometimes negates") {
  ExperimentConfig config = base_config(GameKind::LearnedNegation, 4);  // 8 states
  config.eval_games = 300;

  Rng init(7, kInitStream);
  Population population(config, init);
  const Derangement f = make_involution(config.game.n);
  Rng eval(7, kEvalStream);
  const FitnessSample sample = evaluate_fitness(population, config, &f, eval, 0);

  CHECK(std::abs(sample.with_self - 0.125) < 0.03);
  CHECK(sample.negation_rate > 0.0);
  CHECK(sample.negation_rate < 1.0);
}

TEST_CASE("reward resets reach every tabular agent; neural populations ignore them") {
  ExperimentConfig config = base_config(GameKind::Atomic, 2);
  Rng init(9, kInitStream);
  Population population(config, init);

  Matrix& row_owner = tabular(population, 1).sender_matrix();
  row_owner.at(0, 0) = 3.0;
  row_owner.at(0, 1) = 1.0;
  row_owner.at(0, 2) = 0.0;
  row_owner.at(0, 3) = 0.0;

  population.reset_all_rewards(config.reset);

  // normalize -> x100 -> +1 smoothing, for every agent.
  CHECK(row_owner.at(0, 0) == doctest::Approx(76.0).epsilon(1e-12));
  CHECK(row_owner.at(0, 1) == doctest::Approx(26.0).epsilon(1e-12));
  CHECK(row_owner.at(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row_owner.at(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tabular(population, 0).sender_matrix().at(0, 0) == doctest::Approx(26.0).epsilon(1e-12));

  ExperimentConfig neural_config = base_config(GameKind::Atomic, 2);
  neural_config.agent_kind = AgentKind::Neural;
  neural_config.neural.embed_dim = 8;
  neural_config.neural.depth = 1;
  Rng neural_init(9, kInitStream);
  Population neural_population(neural_config, neural_init);
  CHECK_NOTHROW(neural_population.reset_all_rewards(neural_config.reset));
}

TEST_CASE("a repetition samples the baseline plus every eval interval") {
  ExperimentConfig config = base_config(GameKind::LearnedNegation, 2);
  config.events = 200;
  config.eval_interval = 50;
  config.eval_games = 10;
  config.reset.interval = 100;

  const RepetitionResult result = run_repetition(config, 42, 0);
  REQUIRE(result.valid);
  REQUIRE(result.trajectory.size() == 5);  // events 0, 50, 100, 150, 200
  for (std::size_t i = 0; i < result.trajectory.size(); ++i)
    CHECK(result.trajectory[i].event == static_cast<int>(i) * 50);

  double best_with = 0.0;
  double best_without = 0.0;
  for (const FitnessSample& sample : result.trajectory) {
    best_with = std::max(best_with, sample.with_self);
    best_without = std::max(best_without, sample.without_self);
  }
  CHECK(result.peak_with_self == best_with);
  CHECK(result.peak_without_self == best_without);
  CHECK(result.repetition == 0);
  CHECK(result.seed == 42);
}

TEST_CASE("repetitions are bitwise deterministic in the seed") {
  ExperimentConfig config = base_config(GameKind::LearnedNegation, 2);
  config.events = 120;
  config.eval_interval = 40;
  config.eval_games = 8;

  const RepetitionResult a = run_repetition(config, 42, 0);
  const RepetitionResult b = run_repetition(config, 42, 0);
  const RepetitionResult c = run_repetition(config, 43, 0);

  REQUIRE(a.valid);
  REQUIRE(b.valid);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  bool any_difference_from_c = false;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].with_self == b.trajectory[i].with_self);
    CHECK(a.trajectory[i].without_self == b.trajectory[i].without_self);
    CHECK(a.trajectory[i].negation_rate == b.trajectory[i].negation_rate);
    if (i < c.trajectory.size() && (a.trajectory[i].with_self != c.trajectory[i].with_self ||
                                    a.trajectory[i].negation_rate != c.trajectory[i].negation_rate))
      any_difference_from_c = true;
  }
  CHECK(any_difference_from_c);
}

TEST_CASE("a neural repetition runs end to end and is deterministic") {
  ExperimentConfig config = base_config(GameKind::LearnedNegation, 2);
  config.agent_kind = AgentKind::Neural;
  config.neural.embed_dim = 8;
  config.neural.depth = 1;
  config.events = 3;
  config.trials = 1;
  config.eval_interval = 1;
  config.eval_games = 4;

  const RepetitionResult a = run_repetition(config, 42, 0);
  const RepetitionResult b = run_repetition(config, 42, 0);
  REQUIRE(a.valid);
  REQUIRE(a.trajectory.size() == 4);
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].with_self == b.trajectory[i].with_self);
    CHECK(a.trajectory[i].without_self == b.trajectory[i].without_self);
  }
}

TEST_CASE("the reset schedule changes the learning trajectory") {
  ExperimentConfig frequent = base_config(GameKind::LearnedNegation, 2);
  frequent.events = 12;
  frequent.eval_interval = 12;
  frequent.eval_games = 40;
  frequent.reset.interval = 2;

  ExperimentConfig rare = frequent;
  rare.reset.interval = 1000;

  const RepetitionResult with_resets = run_repetition(frequent, 5, 0);
  const RepetitionResult without_resets = run_repetition(rare, 5, 0);
  REQUIRE(with_resets.valid);
  REQUIRE(without_resets.valid);
  // Same seed, same draw sequence up to the first reset; the final sample
  // reflects the diverged accruals.
  const FitnessSample& last_a = with_resets.trajectory.back();
  const FitnessSample& last_b = without_resets.trajectory.back();
  CHECK((last_a.with_self != last_b.with_self || last_a.negation_rate != last_b.negation_rate));
}

TEST_CASE("a runtime failure inside a repetition is reported, not thrown") {
  ExperimentConfig config = base_config(GameKind::Atomic, 2);
  config.agent_kind = AgentKind::Neural;
  config.neural.embed_dim = 0;  // passes config validation, fails agent construction

  const RepetitionResult result = run_repetition(config, 42, 0);
  CHECK_FALSE(result.valid);
  CHECK_FALSE(result.error.empty());
  CHECK(result.trajectory.empty());
}

TEST_CASE("run_experiment reports progress per repetition with consecutive seeds") {
  ExperimentConfig config = base_config(GameKind::Atomic, 2);
  config.events = 4;
  config.eval_interval = 2;
  config.eval_games = 2;
  config.repetitions = 3;
  config.base_seed = 100;

  std::vector<std::pair<int, std::uint64_t>> seen;
  const auto results = run_experiment(
      config, [&](const RepetitionResult& r) { seen.emplace_back(r.repetition, r.seed); });
  REQUIRE(results.size() == 3);
  REQUIRE(seen.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(seen[static_cast<std::size_t>(i)].first == i);
    CHECK(seen[static_cast<std::size_t>(i)].second == 100u + static_cast<std::uint64_t>(i));
    CHECK(results[static_cast<std::size_t>(i)].valid);
  }
}

TEST_CASE("Student-t two-sided 95% critical values") {
  CHECK(student_t_975(1) == doctest::Approx(12.7062).epsilon(1e-6));
  CHECK(student_t_975(9) == doctest::Approx(2.2622).epsilon(1e-6));
  CHECK(student_t_975(30) == doctest::Approx(2.0423).epsilon(1e-6));
  CHECK(student_t_975(1000) == doctest::Approx(1.9600).epsilon(1e-6));
  CHECK_THROWS_AS(student_t_975(0), std::invalid_argument);
}

TEST_CASE("summaries average valid repetitions and widen by the t critical value") {
  RepetitionResult a;
  a.valid = true;
  a.peak_with_self = 0.8;
  a.peak_without_self = 0.7;
  RepetitionResult b;
  b.valid = true;
  b.peak_with_self = 1.0;
  b.peak_without_self = 0.9;
  RepetitionResult failed;
  failed.valid = false;
  failed.peak_with_self = 0.0;

  const Summary summary = summarize({a, failed, b});
  CHECK(summary.count == 2);
  CHECK(summary.mean_peak_with_self == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(summary.mean_peak_without_self == doctest::Approx(0.8).epsilon(1e-12));
  REQUIRE(summary.has_ci);
  // sd = sqrt(2 * 0.1^2 / 1), se = sd / sqrt(2) = 0.1, hw = t(1) * se.
  CHECK(summary.half_width_with_self == doctest::Approx(1.27062).epsilon(1e-5));

  const Summary lone = summarize({a});
  CHECK(lone.count == 1);
  CHECK_FALSE(lone.has_ci);
  CHECK(lone.mean_peak_with_self == doctest::Approx(0.8).epsilon(1e-12));

  const Summary empty = summarize({failed});
  CHECK(empty.count == 0);
  CHECK_FALSE(empty.has_ci);
}

TEST_CASE("experiment configuration validation") {
  ExperimentConfig config = base_config(GameKind::LearnedNegation, 4);
  CHECK_NOTHROW(config.validate());

  auto broken = config;
  broken.population = 1;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.events = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.eval_interval = config.events + 1;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.trials = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.eta = 0.0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.reset.initial_reward = 0.0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.reset.smoothing = -0.5;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

  broken = config;
  broken.repetitions = 0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}
