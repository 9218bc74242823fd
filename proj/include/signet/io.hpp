#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "signet/population.hpp"

namespace signet::io {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Command-line values; anything unset falls back to the config file, then to
// the built-in defaults. Strings are parsed exactly like config-file values.
struct ConfigOverrides {
  std::optional<std::string> game;
  std::optional<std::string> agent;
  std::optional<std::string> derangement;
  std::optional<int> n;
  std::optional<int> population;
  std::optional<int> events;
  std::optional<int> trials;
  std::optional<int> reset_interval;
  std::optional<int> eval_games;
  std::optional<int> eval_interval;
  std::optional<int> repetitions;
  std::optional<std::uint64_t> seed;
};

// Flat key=value config text ('#' starts a comment). Unknown keys and
// malformed values throw with the offending key named.
ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides);

// File variant; pass std::nullopt to use defaults + overrides only.
ExperimentConfig parse_config(const std::optional<std::string>& path,
                              const ConfigOverrides& overrides);

// Reproducibility record written next to every result set.
struct RunManifest {
  ExperimentConfig config;
  std::string tool_version = kToolVersion;
  std::string rng_scheme = kRngScheme;
  std::vector<std::uint64_t> seeds;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;  // ISO-8601 UTC
  std::vector<std::string> outputs;
};

std::string format_timestamp_utc(std::chrono::system_clock::time_point when);

// CSV of every fitness sample: header
// `repetition,seed,event,fitness_with_self,fitness_without_self`, rows
// sorted by (repetition, event), LF endings, full double precision. The
// bytes depend only on (config, seeds), never on wall-clock state.
void write_trajectory_csv(const std::vector<RepetitionResult>& results, const std::string& path);
std::vector<RepetitionResult> read_trajectory_csv(const std::string& path);

// Machine-readable summary: schema version, config echo, seeds, mean peaks
// with 95% CI bounds (clamped to [0,1] for display), per-repetition peaks.
// Deliberately timestamp-free so identical runs emit identical bytes; the
// volatile bookkeeping lives in the manifest file.
void write_summary_json(const Summary& summary, const RunManifest& manifest,
                        const std::string& path);

// Figure-ready series: `event,best,worst,mean`, where best/worst are the
// with-self trajectories of the repetitions with the highest/lowest peak and
// mean averages all repetitions per event.
void write_plot_data_csv(const std::vector<RepetitionResult>& results, const std::string& path);

void write_manifest_json(const RunManifest& manifest, const std::string& path);

// Agent snapshots for checkpoint/restore. Tabular agents use JSON; neural
// agents use a tagged host-endian binary (name, shape, values, and optimizer
// moments per parameter, plus the step counter). Loading validates that the
// receiving agent has the same architecture.
void save_agent(const RothErevAgent& agent, const std::string& path);
void load_agent(RothErevAgent& agent, const std::string& path);
void save_agent(const NeuralAgent& agent, const std::string& path);
void load_agent(NeuralAgent& agent, const std::string& path);

}  // namespace signet::io
