#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "signet/derangement.hpp"
#include "signet/game.hpp"
#include "signet/neural_agent.hpp"
#include "signet/roth_erev.hpp"

namespace signet {

enum class AgentKind { RothErev, Neural };

AgentKind parse_agent_kind(const std::string& name);
std::string to_string(AgentKind kind);

// Everything one experiment needs. Defaults are the reference protocol:
// e=10000 learning events, k=10 training games per role per partner, reward
// reset every 1000 events (tabular agents), g=50 evaluation games per ordered
// pair, evaluation every 100 events, 10 repetitions seeded 42, 43, ...
struct ExperimentConfig {
  GameConfig game;
  AgentKind agent_kind = AgentKind::RothErev;
  int population = 2;       // p
  int events = 10000;       // e
  int trials = 10;          // k: games per role per partner per learning event
  ResetPolicy reset;        // tabular agents only; reset.interval is r
  int eval_games = 50;      // g: games per ordered pair per evaluation
  int eval_interval = 100;  // events between evaluations
  int repetitions = 10;
  std::uint64_t base_seed = 42;  // repetition i uses base_seed + i
  DerangementScheme derangement = DerangementScheme::Involution;
  double eta = 1.0;         // tabular learning rate
  NeuralConfig neural;

  void validate() const;
};

// One frozen-learning measurement.
struct FitnessSample {
  int event = 0;
  double with_self = 0.0;     // mean success over all p^2 * g games
  double without_self = 0.0;  // mean over the p(p-1) * g cross-pair games
  double negation_rate = 0.0; // fraction of games whose message used negation
};

struct RepetitionResult {
  int repetition = -1;
  std::uint64_t seed = 0;
  std::vector<FitnessSample> trajectory;
  double peak_with_self = 0.0;
  double peak_without_self = 0.0;
  bool valid = true;   // false if a numeric failure cut the repetition short
  std::string error;
};

// Cross-repetition aggregate of peak fitness.
struct Summary {
  int count = 0;
  double mean_peak_with_self = 0.0;
  double mean_peak_without_self = 0.0;
  // 95% confidence half-widths (Student-t, df = count-1); meaningful only
  // when has_ci is true (at least two valid repetitions).
  double half_width_with_self = 0.0;
  double half_width_without_self = 0.0;
  bool has_ci = false;
  std::vector<double> peaks_with_self;
  std::vector<double> peaks_without_self;
};

// A complete-graph population of single-owner agents.
class Population {
 public:
  Population(const ExperimentConfig& config, Rng& init_rng);

  int size() const { return static_cast<int>(agents_.size()); }
  Agent& operator[](int i) { return *agents_[static_cast<std::size_t>(i)]; }
  const Agent& operator[](int i) const { return *agents_[static_cast<std::size_t>(i)]; }

  const std::vector<int>& order() const { return order_; }
  void shuffle_order(Rng& rng);

  // Applies the reset map to every tabular agent; neural agents are left
  // alone (resetting is a tabular-plasticity device).
  void reset_all_rewards(const ResetPolicy& policy);
  void set_recording(bool on);
  void end_learning_event();

 private:
  std::vector<std::unique_ptr<Agent>> agents_;
  std::vector<int> order_;
};

// One learning event: shuffle the agent order, then each agent plays `trials`
// games in each role against every agent (itself included) with learning
// enabled, so every ordered (sender, receiver) pair accumulates 2·trials
// games per event; batch learners update at event end.
void run_learning_event(Population& population, const ExperimentConfig& config,
                        const Derangement* f, Rng& rng);

// Frozen evaluation: every ordered pair (canonical index order) plays
// eval_games games with recording off and no learning; agents come out
// bit-identical to how they went in.
FitnessSample evaluate_fitness(Population& population, const ExperimentConfig& config,
                               const Derangement* f, Rng& rng, int event);

// One seeded repetition: derangement and population built from the init
// stream, training from the train stream, evaluations from the eval stream.
// Records a baseline sample at event 0, then one sample every eval_interval
// events; tabular rewards reset every reset.interval events. A numeric
// failure stops the loop and flags the partial result invalid.
RepetitionResult run_repetition(const ExperimentConfig& config, std::uint64_t seed,
                                int repetition_index);

// All repetitions, seeds base_seed + 0 .. base_seed + (repetitions-1).
// `on_progress` (optional) fires after each repetition completes.
std::vector<RepetitionResult> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const RepetitionResult&)>& on_progress = {});

// Two-sided 95% Student-t critical value for the given degrees of freedom.
double student_t_975(int df);

// Mean peak fitness with a Student-t 95% confidence half-width over the
// valid repetitions; fewer than two valid results leave the CI absent.
Summary summarize(const std::vector<RepetitionResult>& results);

}  // namespace signet
