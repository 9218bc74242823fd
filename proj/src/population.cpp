#include "signet/population.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace signet {

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "roth-erev") return AgentKind::RothErev;
  if (name == "neural") return AgentKind::Neural;
  throw std::invalid_argument("unknown agent kind: " + name);
}

std::string to_string(AgentKind kind) {
  return kind == AgentKind::RothErev ? "roth-erev" : "neural";
}

void ExperimentConfig::validate() const {
  game.validate();
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  if (events < 1) throw std::invalid_argument("events must be positive");
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (reset.interval < 1) throw std::invalid_argument("reset-interval must be positive");
  if (eval_games < 1) throw std::invalid_argument("eval-games must be positive");
  if (eval_interval < 1 || eval_interval > events)
    throw std::invalid_argument("eval-interval must be in [1, events]");
  if (repetitions < 1) throw std::invalid_argument("reps must be positive");
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
  if (reset.initial_reward <= 0.0) throw std::invalid_argument("initial-reward must be positive");
  if (reset.smoothing < 0.0) throw std::invalid_argument("smoothing must be non-negative");
}

Population::Population(const ExperimentConfig& config, Rng& init_rng) {
  config.validate();
  agents_.reserve(static_cast<std::size_t>(config.population));
  for (int i = 0; i < config.population; ++i) {
    if (config.agent_kind == AgentKind::RothErev) {
      agents_.push_back(std::make_unique<RothErevAgent>(config.game, config.eta));
    } else {
      agents_.push_back(std::make_unique<NeuralAgent>(config.game, config.neural, init_rng));
    }
  }
  order_.resize(agents_.size());
  std::iota(order_.begin(), order_.end(), 0);
}

void Population::shuffle_order(Rng& rng) { rng.shuffle(std::span<int>(order_)); }

void Population::reset_all_rewards(const ResetPolicy& policy) {
  for (auto& agent : agents_) {
    if (auto* tabular = dynamic_cast<RothErevAgent*>(agent.get())) reset_rewards(*tabular, policy);
  }
}

void Population::set_recording(bool on) {
  for (auto& agent : agents_) agent->set_recording(on);
}

void Population::end_learning_event() {
  for (auto& agent : agents_) agent->end_learning_event();
}

void run_learning_event(Population& population, const ExperimentConfig& config,
                        const Derangement* f, Rng& rng) {
  population.shuffle_order(rng);
  const int num_states = config.game.num_states;
  const auto play = [&](int sender, int receiver) {
    const int state = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_states)));
    const EpisodeRecord episode =
        play_game(population[sender], population[receiver], state, config.game, f, rng);
    population[sender].learn_from(episode, Role::Sender);
    population[receiver].learn_from(episode, Role::Receiver);
  };
  for (const int agent : population.order()) {
    for (const int partner : population.order()) {
      for (int trial = 0; trial < config.trials; ++trial) play(agent, partner);
      for (int trial = 0; trial < config.trials; ++trial) play(partner, agent);
    }
  }
  population.end_learning_event();
}

FitnessSample evaluate_fitness(Population& population, const ExperimentConfig& config,
                               const Derangement* f, Rng& rng, int event) {
  population.set_recording(false);
  const int num_states = config.game.num_states;
  long wins_all = 0;
  long wins_cross = 0;
  long games_all = 0;
  long games_cross = 0;
  long negation_uses = 0;
  for (int sender = 0; sender < population.size(); ++sender) {
    for (int receiver = 0; receiver < population.size(); ++receiver) {
      for (int game = 0; game < config.eval_games; ++game) {
        const int state = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_states)));
        const EpisodeRecord episode =
            play_game(population[sender], population[receiver], state, config.game, f, rng);
        const long success = episode.reward > 0.0 ? 1 : 0;
        wins_all += success;
        ++games_all;
        if (sender != receiver) {
          wins_cross += success;
          ++games_cross;
        }
        if (episode.used_negation()) ++negation_uses;
      }
    }
  }
  population.set_recording(true);

  FitnessSample sample;
  sample.event = event;
  sample.with_self = static_cast<double>(wins_all) / static_cast<double>(games_all);
  sample.without_self = games_cross > 0
                            ? static_cast<double>(wins_cross) / static_cast<double>(games_cross)
                            : sample.with_self;
  sample.negation_rate = static_cast<double>(negation_uses) / static_cast<double>(games_all);
  return sample;
}

RepetitionResult run_repetition(const ExperimentConfig& config, std::uint64_t seed,
                                int repetition_index) {
  config.validate();
  RepetitionResult result;
  result.repetition = repetition_index;
  result.seed = seed;

  Rng init_rng = Rng::stream(seed, kInitStream);
  Rng train_rng = Rng::stream(seed, kTrainStream);
  Rng eval_rng = Rng::stream(seed, kEvalStream);

  try {
    std::optional<Derangement> derangement;
    if (config.game.is_negation_game())
      derangement = make_derangement(config.game.n, config.derangement, init_rng);
    const Derangement* f = derangement ? &*derangement : nullptr;

    Population population(config, init_rng);

    result.trajectory.push_back(evaluate_fitness(population, config, f, eval_rng, 0));
    for (int event = 1; event <= config.events; ++event) {
      run_learning_event(population, config, f, train_rng);
      if (config.agent_kind == AgentKind::RothErev && event % config.reset.interval == 0)
        population.reset_all_rewards(config.reset);
      if (event % config.eval_interval == 0)
        result.trajectory.push_back(evaluate_fitness(population, config, f, eval_rng, event));
    }
  } catch (const std::exception& failure) {
    result.valid = false;
    result.error = failure.what();
  }

  for (const FitnessSample& sample : result.trajectory) {
    result.peak_with_self = std::max(result.peak_with_self, sample.with_self);
    result.peak_without_self = std::max(result.peak_without_self, sample.without_self);
  }
  return result;
}

std::vector<RepetitionResult> run_experiment(
    const ExperimentConfig& config,
    const std::function<void(const RepetitionResult&)>& on_progress) {
  config.validate();
  std::vector<RepetitionResult> results;
  results.reserve(static_cast<std::size_t>(config.repetitions));
  for (int i = 0; i < config.repetitions; ++i) {
    results.push_back(run_repetition(config, config.base_seed + static_cast<std::uint64_t>(i), i));
    if (on_progress) on_progress(results.back());
  }
  return results;
}

double student_t_975(int df) {
  // Two-sided 95% critical values; beyond the table the normal limit applies.
  static constexpr double kTable[] = {
      12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
      2.2010,  2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
      2.0796,  2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};
  if (df < 1) throw std::invalid_argument("student_t_975: df must be >= 1");
  if (df <= 30) return kTable[df - 1];
  if (df <= 40) return 2.0211;
  if (df <= 60) return 2.0003;
  if (df <= 120) return 1.9799;
  return 1.9600;
}

namespace {

void mean_and_half_width(const std::vector<double>& values, double& mean, double& half_width,
                         bool& has_ci) {
  const int count = static_cast<int>(values.size());
  mean = 0.0;
  for (const double v : values) mean += v;
  mean /= count;
  if (count < 2) {
    has_ci = false;
    half_width = 0.0;
    return;
  }
  double sum_sq = 0.0;
  for (const double v : values) sum_sq += (v - mean) * (v - mean);
  const double std_dev = std::sqrt(sum_sq / (count - 1));
  const double std_error = std_dev / std::sqrt(static_cast<double>(count));
  half_width = student_t_975(count - 1) * std_error;
  has_ci = true;
}

}  // namespace

Summary summarize(const std::vector<RepetitionResult>& results) {
  Summary summary;
  for (const RepetitionResult& result : results) {
    if (!result.valid) continue;
    summary.peaks_with_self.push_back(result.peak_with_self);
    summary.peaks_without_self.push_back(result.peak_without_self);
  }
  summary.count = static_cast<int>(summary.peaks_with_self.size());
  if (summary.count == 0) return summary;

  bool ci_with = false;
  bool ci_without = false;
  mean_and_half_width(summary.peaks_with_self, summary.mean_peak_with_self,
                      summary.half_width_with_self, ci_with);
  mean_and_half_width(summary.peaks_without_self, summary.mean_peak_without_self,
                      summary.half_width_without_self, ci_without);
  summary.has_ci = ci_with && ci_without;
  return summary;
}

}  // namespace signet
