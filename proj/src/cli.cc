// Copyright 2026 The NN-CCE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nncce/cli.h"

#include <charconv>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nncce/cce.h"

namespace nncce {

namespace fs = std::filesystem;

// -- Config ---------------------------------------------------------------------

Config Config::Parse(const std::string& text, const std::string& source) {
  Config config;
  config.source_ = source;
  const auto lines = Split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    std::string line = lines[i];
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation(StrCat(source, ":", number, ": expected 'key = value'"));
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) throw ContractViolation(StrCat(source, ":", number, ": empty key"));
    if (config.entries_.count(key)) {
      throw ContractViolation(StrCat(source, ":", number, ": duplicate key '", key, "'"));
    }
    config.entries_[key] = {value, number};
  }
  return config;
}

Config Config::Load(const std::string& path) {
  if (!fs::is_regular_file(path)) {
    throw ContractViolation(StrCat("config file not found: ", path));
  }
  return Parse(ReadFile(path), path);
}

void Config::Set(const std::string& key, const std::string& value) {
  entries_[key] = {value, 0};
}

const Config::Entry* Config::Find(const std::string& key) {
  used_.insert(key);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void Config::BadValue(const std::string& key, const Entry& entry,
                      const std::string& expected) const {
  throw ContractViolation(StrCat(source_, ":", entry.line, ": ", key, " = '", entry.value,
                                 "' is not ", expected));
}

namespace {

template <typename T>
std::optional<T> ParseNumber(const std::string& text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

std::string Config::GetString(const std::string& key, const std::string& fallback) {
  const Entry* e = Find(key);
  return e ? e->value : fallback;
}

int64_t Config::GetInt(const std::string& key, int64_t fallback) {
  const Entry* e = Find(key);
  if (!e) return fallback;
  const auto v = ParseNumber<int64_t>(e->value);
  if (!v) BadValue(key, *e, "an integer");
  return *v;
}

uint64_t Config::GetUint(const std::string& key, uint64_t fallback) {
  const Entry* e = Find(key);
  if (!e) return fallback;
  const auto v = ParseNumber<uint64_t>(e->value);
  if (!v) BadValue(key, *e, "a non-negative integer");
  return *v;
}

double Config::GetDouble(const std::string& key, double fallback) {
  const Entry* e = Find(key);
  if (!e) return fallback;
  const auto v = ParseNumber<double>(e->value);
  if (!v) BadValue(key, *e, "a number");
  return *v;
}

bool Config::GetBool(const std::string& key, bool fallback) {
  const Entry* e = Find(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  BadValue(key, *e, "true or false");
}

std::vector<std::string> Config::GetList(const std::string& key,
                                         const std::vector<std::string>& fallback) {
  const Entry* e = Find(key);
  if (!e) return fallback;
  std::vector<std::string> out;
  if (e->value.empty() || e->value == "none") return out;
  for (const auto& item : Split(e->value, ',')) out.push_back(Trim(item));
  return out;
}

std::vector<int> Config::GetIntList(const std::string& key,
                                    const std::vector<int>& fallback) {
  if (!Has(key)) {
    used_.insert(key);
    return fallback;
  }
  std::vector<int> out;
  for (const auto& item : GetList(key, {})) {
    const auto v = ParseNumber<int>(item);
    if (!v) BadValue(key, entries_.at(key), "a comma-separated integer list");
    out.push_back(*v);
  }
  return out;
}

void Config::CheckAllUsed() const {
  for (const auto& [key, entry] : entries_) {
    if (!used_.count(key)) {
      throw ContractViolation(StrCat(source_, ":", entry.line, ": unknown key '", key, "'"));
    }
  }
}

namespace {

int ThreadsFrom(Config& config) {
  const int64_t threads = config.GetInt("threads", 0);
  if (threads < 0) throw ContractViolation("threads must be >= 0");
  if (threads == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(threads);
}

NetworkOptions NetworkFrom(Config& config, const std::string& prefix,
                           const NetworkOptions& defaults, bool value_net) {
  NetworkOptions net = defaults;
  net.hidden = config.GetIntList(prefix + ".hidden", defaults.hidden);
  if (value_net) {
    net.representation =
        static_cast<int>(config.GetInt(prefix + ".representation", defaults.representation));
    net.head_hidden = config.GetIntList(prefix + ".head_hidden", defaults.head_hidden);
  }
  net.dropout = config.GetDouble(prefix + ".dropout", defaults.dropout);
  net.l2 = config.GetDouble(prefix + ".l2", defaults.l2);
  net.learning_rate = config.GetDouble(prefix + ".learning_rate", defaults.learning_rate);
  net.epochs = static_cast<int>(config.GetInt(prefix + ".epochs", defaults.epochs));
  net.batch_size = static_cast<int>(config.GetInt(prefix + ".batch_size", defaults.batch_size));
  return net;
}

}  // namespace

TrainConfig TrainConfigFrom(Config& config) {
  TrainConfig c;
  c.game = config.GetString("game", c.game);
  c.seed = config.GetUint("seed", c.seed);
  c.threads = ThreadsFrom(config);
  c.outer_iters = static_cast<int>(config.GetInt("train.outer_iters", c.outer_iters));
  c.trajectories = config.GetInt("train.trajectories", c.trajectories);
  c.cv_candidates = static_cast<int>(config.GetInt("train.cv_candidates", c.cv_candidates));
  c.randomize_prob = config.GetDouble("train.randomize", c.randomize_prob);
  const std::string backend = config.GetString("train.value_backend", "mlp");
  if (backend == "mlp") {
    c.value_backend = ValueBackend::kMlp;
  } else if (backend == "tabular") {
    c.value_backend = ValueBackend::kTabular;
  } else {
    throw ContractViolation(StrCat("train.value_backend must be mlp or tabular, got '",
                                   backend, "'"));
  }
  c.tabular_cap = config.GetInt("train.tabular_cap", c.tabular_cap);
  c.share_values = config.GetBool("train.share_values", c.share_values);
  c.dense_joint = config.GetBool("train.dense_joint", c.dense_joint);
  c.policy_warm_start = config.GetBool("train.policy_warm_start", c.policy_warm_start);
  c.greedy_play = config.GetBool("train.greedy_play", c.greedy_play);
  c.cce.rounds = config.GetInt("cce.rounds", c.cce.rounds);
  c.cce.prune = config.GetBool("cce.prune", c.cce.prune);
  c.cce.dense_cap = config.GetInt("cce.dense_cap", c.cce.dense_cap);
  c.verify_nodes = static_cast<int>(config.GetInt("cce.verify_nodes", c.verify_nodes));
  c.codec_bins = static_cast<int>(config.GetInt("q.bins", c.codec_bins));
  c.q = NetworkFrom(config, "q", c.q, true);
  c.policy = NetworkFrom(config, "policy", c.policy, false);
  c.upsample = config.GetBool("upsample.enabled", c.upsample);
  c.upsample_classes = static_cast<int>(config.GetInt("upsample.classes", c.upsample_classes));
  c.upsample_min_count = config.GetInt("upsample.min_count", c.upsample_min_count);
  c.gate_matches = static_cast<int>(config.GetInt("gate.matches", c.gate_matches));
  c.patience = static_cast<int>(config.GetInt("gate.patience", c.patience));
  c.Validate();
  return c;
}

SmctsConfig SmctsConfigFrom(Config& config) {
  SmctsConfig c;
  c.game = config.GetString("game", c.game);
  c.seed = config.GetUint("seed", c.seed);
  c.threads = ThreadsFrom(config);
  c.iterations = static_cast<int>(config.GetInt("smcts.iterations", c.iterations));
  c.simulations = config.GetInt("smcts.simulations", c.simulations);
  c.eval_simulations = config.GetInt("smcts.eval_simulations", c.eval_simulations);
  const std::string update = config.GetString("smcts.weight_update", "ix");
  if (update == "ix") {
    c.weight_update = WeightUpdate::kIx;
  } else if (update == "none") {
    c.weight_update = WeightUpdate::kNone;
  } else {
    throw ContractViolation(StrCat("smcts.weight_update must be ix or none, got '",
                                   update, "'"));
  }
  c.policy_only = config.GetBool("smcts.policy_only", c.policy_only);
  c.replay_capacity = config.GetInt("smcts.replay_capacity", c.replay_capacity);
  c.train_batches = config.GetInt("smcts.train_batches", c.train_batches);
  c.batch_size = static_cast<int>(config.GetInt("smcts.batch_size", c.batch_size));
  c.codec_bins = static_cast<int>(config.GetInt("smcts.bins", c.codec_bins));
  c.policy = NetworkFrom(config, "smcts_policy", c.policy, false);
  c.value = NetworkFrom(config, "smcts_value", c.value, false);
  c.gate_matches = static_cast<int>(config.GetInt("gate.matches", c.gate_matches));
  c.patience = static_cast<int>(config.GetInt("gate.patience", c.patience));
  c.Validate();
  return c;
}

AgentPtr LoadAgent(const std::string& spec, const std::string& game_id,
                   int64_t smcts_simulations) {
  if (spec == "random") return std::make_shared<RandomAgent>();
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon == std::string::npos || colon + 1 == spec.size()) {
    throw ContractViolation(StrCat("agent '", spec,
                                   "' is not random, nncce:<dir> or smcts:<dir>"));
  }
  const std::string dir = spec.substr(colon + 1);
  if (kind == "nncce") {
    return std::make_shared<NnCceAgent>(LoadTrainedAgent(dir, game_id), spec);
  }
  if (kind == "smcts") {
    return std::make_shared<SmctsAgent>(LoadSmctsModel(dir, game_id), smcts_simulations,
                                        WeightUpdate::kIx, false, spec);
  }
  throw ContractViolation(StrCat("unknown agent kind '", kind, "' in '", spec, "'"));
}

// -- Commands -----------------------------------------------------------------------

namespace {

struct GlobalFlags {
  std::optional<uint64_t> seed;
  bool sequential = false;
  std::optional<int> threads;
};

Config LoadWithOverrides(const std::string& path, const GlobalFlags& flags) {
  Config config = Config::Load(path);
  if (flags.seed) config.Set("seed", std::to_string(*flags.seed));
  if (flags.threads) config.Set("threads", std::to_string(*flags.threads));
  if (flags.sequential) config.Set("threads", "1");
  return config;
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int CmdTrain(const std::string& path, const GlobalFlags& flags, std::ostream& out) {
  Config config = LoadWithOverrides(path, flags);
  const TrainConfig train = TrainConfigFrom(config);
  const std::string dir = config.GetString("output.dir", "checkpoints");
  const std::string log_path =
      config.GetString("output.log", (fs::path(dir) / "train_log.ndjson").string());
  config.CheckAllUsed();
  fs::create_directories(dir);
  EnsureParent(log_path);
  std::string log;
  TrainHooks hooks;
  hooks.on_log = [&](const std::string& line) {
    log += line + "\n";
    WriteFileAtomic(log_path, log);
  };
  hooks.on_accept = [&](const TrainedAgent& agent) { SaveTrainedAgent(agent, dir); };
  const TrainResult result = Train(train, hooks);
  out << "trained " << train.game << " for " << result.iterations_run
      << " iterations; accepted iteration " << result.agent->iteration
      << " with gate score " << FormatDouble(result.agent->gate_score) << "\n"
      << "checkpoints: " << dir << "\nlog: " << log_path << "\n";
  return 0;
}

int CmdTrainSmcts(const std::string& path, const GlobalFlags& flags, std::ostream& out) {
  Config config = LoadWithOverrides(path, flags);
  const SmctsConfig smcts = SmctsConfigFrom(config);
  const std::string dir = config.GetString("output.dir", "checkpoints");
  const std::string log_path =
      config.GetString("output.log", (fs::path(dir) / "smcts_log.ndjson").string());
  config.CheckAllUsed();
  fs::create_directories(dir);
  EnsureParent(log_path);
  std::string log;
  SmctsHooks hooks;
  hooks.on_log = [&](const std::string& line) {
    log += line + "\n";
    WriteFileAtomic(log_path, log);
  };
  hooks.on_accept = [&](const SmctsModel& model) { SaveSmctsModel(model, dir); };
  const SmctsTrainResult result = SmctsTrain(smcts, hooks);
  out << "trained SM-MCTS on " << smcts.game << " for " << result.iterations_run
      << " iterations; accepted iteration " << result.model->iteration
      << " with gate score " << FormatDouble(result.model->gate_score) << "\n"
      << "checkpoints: " << dir << "\nlog: " << log_path << "\n";
  return 0;
}

std::string MatchesCsv(const std::vector<MatchRecord>& records) {
  std::string csv = "match,agent_a,agent_b,side_a,seed,score_a,score_b,outcome,forfeit\n";
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    csv += StrCat(i, ',', r.agent_a, ',', r.agent_b, ',', r.side_a, ',', r.seed, ',',
                  FormatDouble(r.score_a), ',', FormatDouble(r.score_b), ',', r.outcome,
                  ',', r.forfeit, '\n');
  }
  return csv;
}

void PrintRow(const PairStats& row, std::ostream& out) {
  out << row.agent_a << " vs " << row.agent_b << ": " << row.wins << " wins, "
      << row.losses << " losses, " << row.draws << " draws of " << row.matches
      << "; win rate " << FormatDouble(row.WinRate()) << " (95% lower bound "
      << FormatDouble(WilsonLowerBound(row.wins, row.wins + row.losses))
      << "); mean score " << FormatDouble(row.mean_score_a) << "\n";
}

int CmdHead2Head(const std::string& path, const GlobalFlags& flags, std::ostream& out) {
  Config config = LoadWithOverrides(path, flags);
  const std::string game_id = config.GetString("game", "goofspiel:4");
  const uint64_t seed = config.GetUint("seed", 0);
  const int threads = ThreadsFrom(config);
  const std::string spec_a = config.GetString("agent_a", "random");
  const std::string spec_b = config.GetString("agent_b", "random");
  const int64_t matches = config.GetInt("match.count", 200);
  const int64_t sims = config.GetInt("smcts.eval_simulations", 100);
  const std::string csv_path = config.GetString("output.csv", "head2head.csv");
  const std::string matches_path = config.GetString("output.matches", "");
  config.CheckAllUsed();
  if (matches < 1) throw ContractViolation("match.count must be >= 1");
  const GamePtr game = MakeGame(game_id);
  const AgentPtr a = LoadAgent(spec_a, game->spec().id, sims);
  const AgentPtr b = LoadAgent(spec_b, game->spec().id, sims);
  const auto records = PlayMatches(*game, *a, *b, matches, seed, threads);
  PairStats row = Summarize(records, seed);
  EnsureParent(csv_path);
  WriteFileAtomic(csv_path, WinTableToCsv({row}));
  if (!matches_path.empty()) {
    EnsureParent(matches_path);
    WriteFileAtomic(matches_path, MatchesCsv(records));
  }
  PrintRow(row, out);
  return 0;
}

int CmdTournament(const std::string& path, const GlobalFlags& flags, std::ostream& out) {
  Config config = LoadWithOverrides(path, flags);
  const std::string game_id = config.GetString("game", "goofspiel:4");
  const uint64_t seed = config.GetUint("seed", 0);
  const int threads = ThreadsFrom(config);
  const auto specs = config.GetList("agents", {});
  const int64_t matches = config.GetInt("match.count", 100);
  const int64_t sims = config.GetInt("smcts.eval_simulations", 100);
  const std::string csv_path = config.GetString("output.csv", "tournament.csv");
  config.CheckAllUsed();
  if (matches < 1) throw ContractViolation("match.count must be >= 1");
  const GamePtr game = MakeGame(game_id);
  std::vector<AgentPtr> agents;
  for (const auto& spec : specs) agents.push_back(LoadAgent(spec, game->spec().id, sims));
  const WinTable table = Tournament(*game, agents, matches, seed, threads);
  EnsureParent(csv_path);
  WriteFileAtomic(csv_path, WinTableToCsv(table));
  for (const auto& row : table) PrintRow(row, out);
  return 0;
}

int CmdGenData(const std::string& path, const GlobalFlags& flags, std::ostream& out) {
  Config config = LoadWithOverrides(path, flags);
  const std::string game_id = config.GetString("game", "goofspiel:4");
  const uint64_t seed = config.GetUint("seed", 0);
  ThreadsFrom(config);
  const int64_t simulations = config.GetInt("data.simulations", 1000);
  const double randomize = config.GetDouble("data.randomize", 0.5);
  const std::string policy = config.GetString("data.policy", "uniform");
  const std::string expansion = config.GetString("data.expansion", "full");
  const std::string replay_path = config.GetString("output.replay", "replay.tsv");
  config.CheckAllUsed();
  const GamePtr game = MakeGame(game_id);
  TreeOptions options;
  options.randomize_prob.assign(game->num_players(), randomize);
  if (expansion == "full") {
    options.expansion = Expansion::kFullTrajectory;
  } else if (expansion == "leaf") {
    options.expansion = Expansion::kStopAtNewLeaf;
  } else {
    throw ContractViolation(StrCat("data.expansion must be full or leaf, got '",
                                   expansion, "'"));
  }
  std::shared_ptr<TrainedAgent> trained;
  std::unique_ptr<PolicySource> source;
  if (policy == "uniform") {
    source = std::make_unique<UniformPolicySource>();
  } else if (policy.rfind("nncce:", 0) == 0) {
    trained = LoadTrainedAgent(policy.substr(6), game->spec().id);
    source = std::make_unique<AgentPolicySource>(trained.get());
  } else {
    throw ContractViolation(StrCat("data.policy must be uniform or nncce:<dir>, got '",
                                   policy, "'"));
  }
  const GameTree tree = GenerateTree(*game, *source, simulations, options, seed);
  const auto replay = ReplayFromTree(tree, *game);
  EnsureParent(replay_path);
  WriteFileAtomic(replay_path, ExportReplayTsv(replay));
  out << "tree with " << tree.nodes.size() << " nodes;";
  for (int h = 0; h <= tree.horizon(); ++h) out << " layer " << h << ": " << LayerOf(tree, h).size();
  out << "\nreplay entries: " << replay.size() << " -> " << replay_path << "\n";
  return 0;
}

int CmdVerifyCce(const std::string& matrix_path, const std::string& dist_path,
                 std::ostream& out) {
  for (const auto& p : {matrix_path, dist_path}) {
    if (!fs::is_regular_file(p)) throw ContractViolation(StrCat("file not found: ", p));
  }
  const auto game = LoadMatrixGame(matrix_path);
  const auto dist = ParseDistribution(ReadFile(dist_path), game->num_players());
  const auto losses = NormalizeLosses(game->payoffs());
  std::vector<double> flat;
  for (const auto& row : losses) flat.insert(flat.end(), row.begin(), row.end());
  const StageGame stage = StageGame::Dense(game->spec().action_counts, flat);
  out << std::fixed << std::setprecision(6) << VerifyCce(dist, stage) << "\n";
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("NN-CCE: coarse correlated equilibria for simultaneous-move games",
               "nncce");
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags flags;
  uint64_t seed = 0;
  int threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)")
                          ->check(CLI::NonNegativeNumber);
  app.add_flag("--sequential", flags.sequential, "Single-threaded deterministic mode");

  std::string config_path;
  std::string matrix_path;
  std::string dist_path;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const std::string&, const GlobalFlags&, std::ostream&);
  };
  const Command commands[] = {
      {"train", "Train NN-CCE agents", CmdTrain},
      {"train-smcts", "Train the SM-MCTS baseline", CmdTrainSmcts},
      {"head2head", "Play paired matches between two agents", CmdHead2Head},
      {"tournament", "Round-robin tournament", CmdTournament},
      {"gen-data", "Generate a game tree and export its replay entries", CmdGenData},
  };
  for (const auto& c : commands) {
    app.add_subcommand(c.name, c.help)
        ->add_option("config", config_path, "Config file")
        ->required();
  }
  auto* verify = app.add_subcommand("verify-cce", "Exact CCE gap of a joint distribution");
  verify->add_option("matrix", matrix_path, "Matrix game file")->required();
  verify->add_option("distribution", dist_path, "Distribution file")->required();

  std::vector<std::string> argv_storage{"nncce"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }
  if (*seed_opt) flags.seed = seed;
  if (*threads_opt) flags.threads = threads;

  try {
    if (verify->parsed()) return CmdVerifyCce(matrix_path, dist_path, out);
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) return c.run(config_path, flags, out);
    }
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace nncce
