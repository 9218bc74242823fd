// Command-line front end: run experiments, summarize saved trajectories,
// and regenerate figure-ready series from a trajectory file.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "signet/io.hpp"

namespace {

int run_command(const std::optional<std::string>& config_path,
                const signet::io::ConfigOverrides& overrides, const std::string& out_dir,
                bool quiet) {
  const signet::ExperimentConfig config = signet::io::parse_config(config_path, overrides);

  std::filesystem::create_directories(out_dir);

  signet::io::RunManifest manifest;
  manifest.config = config;
  for (int i = 0; i < config.repetitions; ++i)
    manifest.seeds.push_back(config.base_seed + static_cast<std::uint64_t>(i));
  manifest.started_at = signet::io::format_timestamp_utc(std::chrono::system_clock::now());

  if (!quiet) {
    std::fprintf(stderr, "game=%s agent=%s n=%d p=%d events=%d reps=%d seed=%llu\n",
                 signet::to_string(config.game.kind).c_str(),
                 signet::to_string(config.agent_kind).c_str(), config.game.n, config.population,
                 config.events, config.repetitions,
                 static_cast<unsigned long long>(config.base_seed));
  }

  const auto results = signet::run_experiment(config, [&](const signet::RepetitionResult& rep) {
    if (quiet) return;
    if (rep.valid) {
      std::fprintf(stderr, "repetition %d (seed %llu): peak fitness %.4f with self, %.4f without\n",
                   rep.repetition, static_cast<unsigned long long>(rep.seed), rep.peak_with_self,
                   rep.peak_without_self);
    } else {
      std::fprintf(stderr, "repetition %d (seed %llu): FAILED: %s\n", rep.repetition,
                   static_cast<unsigned long long>(rep.seed), rep.error.c_str());
    }
  });

  const signet::Summary summary = signet::summarize(results);

  const auto path_in = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  const std::string trajectory_path = path_in("trajectory.csv");
  const std::string summary_path = path_in("summary.json");
  const std::string plot_path = path_in("plot_data.csv");
  const std::string manifest_path = path_in("manifest.json");

  signet::io::write_trajectory_csv(results, trajectory_path);
  signet::io::write_summary_json(summary, manifest, summary_path);
  signet::io::write_plot_data_csv(results, plot_path);

  manifest.finished_at = signet::io::format_timestamp_utc(std::chrono::system_clock::now());
  manifest.outputs = {trajectory_path, summary_path, plot_path};
  signet::io::write_manifest_json(manifest, manifest_path);

  bool all_valid = true;
  for (const auto& rep : results) all_valid = all_valid && rep.valid;

  if (!quiet) {
    std::fprintf(stderr, "mean peak fitness: %.4f with self, %.4f without self (%d/%d repetitions)\n",
                 summary.mean_peak_with_self, summary.mean_peak_without_self, summary.count,
                 config.repetitions);
    std::fprintf(stderr, "wrote %s\n", out_dir.c_str());
  }
  return all_valid ? 0 : 3;
}

int summarize_command(const std::string& trajectory_path) {
  const auto results = signet::io::read_trajectory_csv(trajectory_path);
  const signet::Summary summary = signet::summarize(results);
  std::printf("repetitions: %d\n", summary.count);
  std::printf("mean peak fitness (with self):    %.6f\n", summary.mean_peak_with_self);
  std::printf("mean peak fitness (without self): %.6f\n", summary.mean_peak_without_self);
  if (summary.has_ci) {
    std::printf("95%% CI half-width (with self):    %.6f\n", summary.half_width_with_self);
    std::printf("95%% CI half-width (without self): %.6f\n", summary.half_width_without_self);
  }
  std::printf("peaks (with self):");
  for (double peak : summary.peaks_with_self) std::printf(" %.6f", peak);
  std::printf("\n");
  return 0;
}

int plot_data_command(const std::string& trajectory_path, const std::string& out_path) {
  const auto results = signet::io::read_trajectory_csv(trajectory_path);
  signet::io::write_plot_data_csv(results, out_path);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signalling-game population simulator"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run an experiment and write its result files");
  std::optional<std::string> config_path;
  signet::io::ConfigOverrides overrides;
  std::string out_dir = "results";
  bool quiet = false;
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--game", overrides.game, "atomic, basic, learned, or combined");
  run->add_option("--agent", overrides.agent, "roth-erev or neural");
  run->add_option("--n", overrides.n, "number of affirmative states");
  run->add_option("--p", overrides.population, "population size");
  run->add_option("--events", overrides.events, "learning events per repetition");
  run->add_option("--trials", overrides.trials,
                  "games each agent plays per role per partner per learning event");
  run->add_option("--reset-interval", overrides.reset_interval,
                  "learning events between tabular reward resets");
  run->add_option("--eval-games", overrides.eval_games,
                  "games per ordered pair per evaluation");
  run->add_option("--eval-interval", overrides.eval_interval,
                  "learning events between evaluations");
  run->add_option("--reps", overrides.repetitions, "independent repetitions");
  run->add_option("--seed", overrides.seed, "base seed; repetition i uses seed+i");
  run->add_option("--derangement", overrides.derangement, "involution or random");
  run->add_option("--out-dir", out_dir, "output directory (created if missing)");
  run->add_flag("--quiet", quiet, "suppress progress output");

  // --- summarize -----------------------------------------------------------
  auto* summarize = app.add_subcommand("summarize", "Print peak-fitness statistics for a saved trajectory");
  std::string summarize_input;
  summarize->add_option("trajectory", summarize_input, "trajectory.csv to read")->required();

  // --- plot-data -----------------------------------------------------------
  auto* plot = app.add_subcommand("plot-data", "Write best/worst/mean series from a saved trajectory");
  std::string plot_input;
  std::string plot_output = "plot_data.csv";
  plot->add_option("trajectory", plot_input, "trajectory.csv to read")->required();
  plot->add_option("--out", plot_output, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, overrides, out_dir, quiet);
    if (summarize->parsed()) return summarize_command(summarize_input);
    if (plot->parsed()) return plot_data_command(plot_input, plot_output);
  } catch (const std::invalid_argument& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 2;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
