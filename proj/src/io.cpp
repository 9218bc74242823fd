#include "signet/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace signet::io {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("invalid value for '" + key + "': " + value);
}

long long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value);
    return parsed;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return parsed;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

// Accumulates settings from defaults, then a config file, then command-line
// overrides; the game object is assembled last because its shape depends on
// (game, n) jointly.
struct ConfigBuilder {
  std::string game = "learned";
  std::string agent = "roth-erev";
  std::string derangement = "involution";
  int n = 4;
  bool allow_negation = true;
  ExperimentConfig config;  // every non-game field

  void set(const std::string& key, const std::string& value) {
    if (key == "game") {
      parse_game_kind(value);  // validates
      game = value;
    } else if (key == "agent") {
      parse_agent_kind(value);
      agent = value;
    } else if (key == "derangement") {
      parse_derangement_scheme(value);
      derangement = value;
    } else if (key == "n") {
      n = static_cast<int>(parse_integer(key, value));
    } else if (key == "p") {
      config.population = static_cast<int>(parse_integer(key, value));
    } else if (key == "events") {
      config.events = static_cast<int>(parse_integer(key, value));
    } else if (key == "trials") {
      config.trials = static_cast<int>(parse_integer(key, value));
    } else if (key == "reset_interval") {
      config.reset.interval = static_cast<int>(parse_integer(key, value));
    } else if (key == "initial_reward") {
      config.reset.initial_reward = parse_real(key, value);
    } else if (key == "smoothing") {
      config.reset.smoothing = parse_real(key, value);
    } else if (key == "eval_games") {
      config.eval_games = static_cast<int>(parse_integer(key, value));
    } else if (key == "eval_interval") {
      config.eval_interval = static_cast<int>(parse_integer(key, value));
    } else if (key == "reps") {
      config.repetitions = static_cast<int>(parse_integer(key, value));
    } else if (key == "seed") {
      const long long parsed = parse_integer(key, value);
      if (parsed < 0) bad_value(key, value);
      config.base_seed = static_cast<std::uint64_t>(parsed);
    } else if (key == "eta") {
      config.eta = parse_real(key, value);
    } else if (key == "allow_negation") {
      allow_negation = parse_flag(key, value);
    } else if (key == "embed_dim") {
      config.neural.embed_dim = static_cast<int>(parse_integer(key, value));
    } else if (key == "depth") {
      config.neural.depth = static_cast<int>(parse_integer(key, value));
    } else if (key == "lr") {
      config.neural.adam.lr = parse_real(key, value);
    } else if (key == "ppo_clip") {
      config.neural.ppo.clip = parse_real(key, value);
    } else if (key == "ppo_epochs") {
      config.neural.ppo.epochs = static_cast<int>(parse_integer(key, value));
    } else if (key == "value_coef") {
      config.neural.ppo.value_coef = parse_real(key, value);
    } else if (key == "entropy_coef") {
      config.neural.ppo.entropy_coef = parse_real(key, value);
    } else if (key == "max_grad_norm") {
      config.neural.ppo.max_grad_norm = parse_real(key, value);
    } else {
      throw std::invalid_argument("unknown config key: '" + key + "'");
    }
  }

  ExperimentConfig build() {
    ExperimentConfig result = config;
    try {
      result.game = GameConfig::make(parse_game_kind(game), n);
    } catch (const std::exception& failure) {
      throw std::invalid_argument(std::string("invalid game configuration: ") + failure.what());
    }
    result.game.allow_negation = allow_negation;
    result.agent_kind = parse_agent_kind(agent);
    result.derangement = parse_derangement_scheme(derangement);
    result.validate();
    return result;
  }
};

void apply_overrides(ConfigBuilder& builder, const ConfigOverrides& overrides) {
  if (overrides.game) builder.set("game", *overrides.game);
  if (overrides.agent) builder.set("agent", *overrides.agent);
  if (overrides.derangement) builder.set("derangement", *overrides.derangement);
  if (overrides.n) builder.set("n", std::to_string(*overrides.n));
  if (overrides.population) builder.set("p", std::to_string(*overrides.population));
  if (overrides.events) builder.set("events", std::to_string(*overrides.events));
  if (overrides.trials) builder.set("trials", std::to_string(*overrides.trials));
  if (overrides.reset_interval)
    builder.set("reset_interval", std::to_string(*overrides.reset_interval));
  if (overrides.eval_games) builder.set("eval_games", std::to_string(*overrides.eval_games));
  if (overrides.eval_interval)
    builder.set("eval_interval", std::to_string(*overrides.eval_interval));
  if (overrides.repetitions) builder.set("reps", std::to_string(*overrides.repetitions));
  if (overrides.seed) builder.set("seed", std::to_string(*overrides.seed));
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
  ConfigBuilder builder;
  std::istringstream lines(text);
  std::string line;
  int line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto equals = line.find('=');
    if (equals == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  " is not key=value: '" + line + "'");
    builder.set(trim(line.substr(0, equals)), trim(line.substr(equals + 1)));
  }
  apply_overrides(builder, overrides);
  return builder.build();
}

ExperimentConfig parse_config(const std::optional<std::string>& path,
                              const ConfigOverrides& overrides) {
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw std::invalid_argument("cannot open config file: " + *path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  return parse_config_text(text, overrides);
}

std::string format_timestamp_utc(std::chrono::system_clock::time_point when) {
  const std::time_t seconds = std::chrono::system_clock::to_time_t(when);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_trajectory_csv(const std::vector<RepetitionResult>& results, const std::string& path) {
  if (results.empty()) throw std::invalid_argument("write_trajectory_csv: no results");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "repetition,seed,event,fitness_with_self,fitness_without_self\n";
  for (const RepetitionResult& result : results) {
    for (const FitnessSample& sample : result.trajectory) {
      out << result.repetition << ',' << result.seed << ',' << sample.event << ','
          << format_double(sample.with_self) << ',' << format_double(sample.without_self) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

std::vector<RepetitionResult> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "repetition,seed,event,fitness_with_self,fitness_without_self")
    throw std::runtime_error(path + ": unexpected header");

  std::vector<RepetitionResult> results;
  std::map<int, std::size_t> index_of;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> row;
    while (std::getline(fields, field, ',')) row.push_back(field);
    if (row.size() != 5)
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_number));

    const int repetition = static_cast<int>(parse_integer("repetition", row[0]));
    const std::uint64_t seed = static_cast<std::uint64_t>(parse_integer("seed", row[1]));
    FitnessSample sample;
    sample.event = static_cast<int>(parse_integer("event", row[2]));
    sample.with_self = parse_real("fitness_with_self", row[3]);
    sample.without_self = parse_real("fitness_without_self", row[4]);

    auto found = index_of.find(repetition);
    if (found == index_of.end()) {
      found = index_of.emplace(repetition, results.size()).first;
      results.emplace_back();
      results.back().repetition = repetition;
      results.back().seed = seed;
    }
    RepetitionResult& result = results[found->second];
    if (result.seed != seed)
      throw std::runtime_error(path + ": inconsistent seed for repetition " +
                               std::to_string(repetition));
    result.trajectory.push_back(sample);
    result.peak_with_self = std::max(result.peak_with_self, sample.with_self);
    result.peak_without_self = std::max(result.peak_without_self, sample.without_self);
  }
  if (results.empty()) throw std::runtime_error(path + ": no data rows");
  return results;
}

void write_plot_data_csv(const std::vector<RepetitionResult>& results, const std::string& path) {
  std::vector<const RepetitionResult*> usable;
  for (const RepetitionResult& result : results)
    if (result.valid && !result.trajectory.empty()) usable.push_back(&result);
  if (usable.empty()) throw std::invalid_argument("write_plot_data_csv: no usable repetitions");

  const std::size_t samples = usable.front()->trajectory.size();
  for (const RepetitionResult* result : usable) {
    if (result->trajectory.size() != samples)
      throw std::invalid_argument("write_plot_data_csv: repetitions disagree on sample count");
    for (std::size_t i = 0; i < samples; ++i)
      if (result->trajectory[i].event != usable.front()->trajectory[i].event)
        throw std::invalid_argument("write_plot_data_csv: repetitions disagree on event grid");
  }

  const RepetitionResult* best = usable.front();
  const RepetitionResult* worst = usable.front();
  for (const RepetitionResult* result : usable) {
    if (result->peak_with_self > best->peak_with_self) best = result;
    if (result->peak_with_self < worst->peak_with_self) worst = result;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "event,best,worst,mean\n";
  for (std::size_t i = 0; i < samples; ++i) {
    double mean = 0.0;
    for (const RepetitionResult* result : usable) mean += result->trajectory[i].with_self;
    mean /= static_cast<double>(usable.size());
    out << usable.front()->trajectory[i].event << ',' << format_double(best->trajectory[i].with_self)
        << ',' << format_double(worst->trajectory[i].with_self) << ',' << format_double(mean)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["game"] = to_string(config.game.kind);
  j["n"] = config.game.n;
  j["num_states"] = config.game.num_states;
  j["num_symbols"] = config.game.num_symbols;
  j["allow_negation"] = config.game.allow_negation;
  j["agent"] = to_string(config.agent_kind);
  j["p"] = config.population;
  j["events"] = config.events;
  j["trials"] = config.trials;
  j["reset_interval"] = config.reset.interval;
  j["initial_reward"] = config.reset.initial_reward;
  j["smoothing"] = config.reset.smoothing;
  j["eval_games"] = config.eval_games;
  j["eval_interval"] = config.eval_interval;
  j["reps"] = config.repetitions;
  j["seed"] = config.base_seed;
  j["derangement"] = to_string(config.derangement);
  j["eta"] = config.eta;
  if (config.agent_kind == AgentKind::Neural) {
    j["neural"] = {{"embed_dim", config.neural.embed_dim},
                   {"depth", config.neural.depth},
                   {"lr", config.neural.adam.lr},
                   {"beta1", config.neural.adam.beta1},
                   {"beta2", config.neural.adam.beta2},
                   {"adam_epsilon", config.neural.adam.epsilon},
                   {"ppo_clip", config.neural.ppo.clip},
                   {"ppo_epochs", config.neural.ppo.epochs},
                   {"value_coef", config.neural.ppo.value_coef},
                   {"entropy_coef", config.neural.ppo.entropy_coef},
                   {"max_grad_norm", config.neural.ppo.max_grad_norm}};
  }
  return j;
}

double clamp01(double v) { return std::max(0.0, std::min(1.0, v)); }

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed while writing " + path);
}

}  // namespace

void write_summary_json(const Summary& summary, const RunManifest& manifest,
                        const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = manifest.tool_version;
  j["rng_scheme"] = manifest.rng_scheme;
  j["config"] = config_to_json(manifest.config);
  j["seeds"] = manifest.seeds;

  json s;
  s["repetitions_used"] = summary.count;
  s["mean_peak_with_self"] = summary.mean_peak_with_self;
  s["mean_peak_without_self"] = summary.mean_peak_without_self;
  s["peaks_with_self"] = summary.peaks_with_self;
  s["peaks_without_self"] = summary.peaks_without_self;
  if (summary.has_ci) {
    s["ci95_half_width_with_self"] = summary.half_width_with_self;
    s["ci95_half_width_without_self"] = summary.half_width_without_self;
    s["ci95_with_self"] = {clamp01(summary.mean_peak_with_self - summary.half_width_with_self),
                           clamp01(summary.mean_peak_with_self + summary.half_width_with_self)};
    s["ci95_without_self"] = {
        clamp01(summary.mean_peak_without_self - summary.half_width_without_self),
        clamp01(summary.mean_peak_without_self + summary.half_width_without_self)};
  } else {
    s["ci95_half_width_with_self"] = nullptr;
    s["ci95_half_width_without_self"] = nullptr;
  }
  j["summary"] = s;
  write_json_file(j, path);
}

void write_manifest_json(const RunManifest& manifest, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = manifest.tool_version;
  j["rng_scheme"] = manifest.rng_scheme;
  j["config"] = config_to_json(manifest.config);
  j["seeds"] = manifest.seeds;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["outputs"] = manifest.outputs;
  write_json_file(j, path);
}

// ---------------------------------------------------------------------------
// Agent snapshots
// ---------------------------------------------------------------------------

namespace {

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

void matrix_from_json(const json& j, Matrix& m, const std::string& what) {
  if (j.at("rows").get<int>() != m.rows() || j.at("cols").get<int>() != m.cols())
    throw std::runtime_error("agent snapshot: " + what + " shape mismatch");
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != m.values().size())
    throw std::runtime_error("agent snapshot: " + what + " length mismatch");
  m.values() = values;
}

}  // namespace

void save_agent(const RothErevAgent& agent, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "roth-erev";
  j["game"] = to_string(agent.config().kind);
  j["n"] = agent.config().n;
  j["num_states"] = agent.config().num_states;
  j["num_symbols"] = agent.config().num_symbols;
  j["eta"] = agent.learning_rate();
  j["sender"] = matrix_to_json(agent.sender_matrix());
  j["receiver"] = matrix_to_json(agent.receiver_matrix());
  j["negation"] = agent.negation_weights();
  j["meaning"] = agent.meaning_weights();
  write_json_file(j, path);
}

void load_agent(RothErevAgent& agent, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  if (j.at("kind").get<std::string>() != "roth-erev")
    throw std::runtime_error(path + ": not a tabular agent snapshot");
  if (j.at("game").get<std::string>() != to_string(agent.config().kind) ||
      j.at("num_states").get<int>() != agent.config().num_states ||
      j.at("num_symbols").get<int>() != agent.config().num_symbols)
    throw std::runtime_error(path + ": game shape mismatch");
  matrix_from_json(j.at("sender"), agent.sender_matrix(), "sender matrix");
  matrix_from_json(j.at("receiver"), agent.receiver_matrix(), "receiver matrix");
  const auto negation = j.at("negation").get<std::vector<double>>();
  const auto meaning = j.at("meaning").get<std::vector<double>>();
  if (negation.size() != agent.negation_weights().size() ||
      meaning.size() != agent.meaning_weights().size())
    throw std::runtime_error(path + ": weight vector length mismatch");
  agent.negation_weights() = negation;
  agent.meaning_weights() = meaning;
}

namespace {

constexpr char kNeuralMagic[8] = {'S', 'G', 'N', 'B', 'v', '1', '\n', '\0'};

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("agent snapshot: truncated file");
}

void write_tensor(std::ofstream& out, const nn::Tensor& t) {
  write_raw(out, t.v.data(), t.v.size() * sizeof(double));
}

void read_tensor(std::ifstream& in, nn::Tensor& t) {
  read_raw(in, t.v.data(), t.v.size() * sizeof(double));
}

}  // namespace

void save_agent(const NeuralAgent& agent, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_raw(out, kNeuralMagic, sizeof kNeuralMagic);
  const std::uint64_t step = static_cast<std::uint64_t>(agent.adam().step);
  write_raw(out, &step, sizeof step);
  const std::uint32_t count = static_cast<std::uint32_t>(agent.parameters().size());
  write_raw(out, &count, sizeof count);
  for (const nn::Param* param : agent.parameters()) {
    const std::uint32_t name_size = static_cast<std::uint32_t>(param->name.size());
    write_raw(out, &name_size, sizeof name_size);
    write_raw(out, param->name.data(), param->name.size());
    const std::int32_t rows = param->value.rows;
    const std::int32_t cols = param->value.cols;
    write_raw(out, &rows, sizeof rows);
    write_raw(out, &cols, sizeof cols);
    write_tensor(out, param->value);
    write_tensor(out, param->m);
    write_tensor(out, param->s);
  }
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void load_agent(NeuralAgent& agent, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[sizeof kNeuralMagic];
  read_raw(in, magic, sizeof magic);
  if (std::memcmp(magic, kNeuralMagic, sizeof magic) != 0)
    throw std::runtime_error(path + ": not a neural agent snapshot");
  std::uint64_t step = 0;
  read_raw(in, &step, sizeof step);
  std::uint32_t count = 0;
  read_raw(in, &count, sizeof count);
  if (count != agent.parameters().size())
    throw std::runtime_error(path + ": parameter count mismatch");

  std::map<std::string, nn::Param*> by_name;
  for (nn::Param* param : agent.parameters()) by_name[param->name] = param;

  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_size = 0;
    read_raw(in, &name_size, sizeof name_size);
    if (name_size > 4096) throw std::runtime_error(path + ": implausible name length");
    std::string name(name_size, '\0');
    read_raw(in, name.data(), name_size);
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    read_raw(in, &rows, sizeof rows);
    read_raw(in, &cols, sizeof cols);
    const auto found = by_name.find(name);
    if (found == by_name.end()) throw std::runtime_error(path + ": unknown parameter " + name);
    nn::Param* param = found->second;
    if (param->value.rows != rows || param->value.cols != cols)
      throw std::runtime_error(path + ": shape mismatch for " + name);
    read_tensor(in, param->value);
    read_tensor(in, param->m);
    read_tensor(in, param->s);
  }
  agent.adam().step = static_cast<long>(step);
}

}  // namespace signet::io
