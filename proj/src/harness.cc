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

#include "nncce/harness.h"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

namespace nncce {

std::vector<int> RandomAgent::Act(const Game& game, const GameState& state,
                                  const std::vector<int>& players, Rng& rng) const {
  std::vector<int> actions;
  actions.reserve(players.size());
  for (int p : players) {
    const auto legal = game.LegalActions(state, p);
    actions.push_back(legal[UniformInt(rng, legal.size())]);
  }
  return actions;
}

std::vector<std::vector<int>> GameSides(const GameSpec& spec) {
  if (!spec.sides.empty()) {
    if (spec.sides.size() != 2) {
      throw ContractViolation(StrCat(spec.id, ": matches need exactly 2 sides"));
    }
    return spec.sides;
  }
  if (spec.num_players != 2) {
    throw ContractViolation(StrCat(spec.id, ": ", spec.num_players,
                                   " players but no sides declared"));
  }
  return {{0}, {1}};
}

MatchRecord RunMatch(const Game& game, const Agent& agent_a, const Agent& agent_b,
                     int side_a, uint64_t seed) {
  if (side_a != 0 && side_a != 1) {
    throw ContractViolation(StrCat("RunMatch: side ", side_a, " is not 0 or 1"));
  }
  const auto sides = GameSides(game.spec());
  MatchRecord record;
  record.game_id = game.spec().id;
  record.agent_a = agent_a.name();
  record.agent_b = agent_b.name();
  record.side_a = side_a;
  record.seed = seed;
  record.player_scores.assign(game.num_players(), 0.0);

  Rng chance(DeriveSeed(seed, 0));
  std::vector<Rng> side_rng{Rng(DeriveSeed(seed, 1)), Rng(DeriveSeed(seed, 2))};
  GameState state = game.SampleStart(chance);
  while (!state.terminal && record.forfeit.empty()) {
    JointAction joint(game.num_players(), -1);
    for (int s = 0; s < 2 && record.forfeit.empty(); ++s) {
      const bool is_a = s == side_a;
      const Agent& agent = is_a ? agent_a : agent_b;
      std::vector<int> actions;
      bool ok = true;
      try {
        actions = agent.Act(game, state, sides[s], side_rng[s]);
      } catch (const std::exception& e) {
        LogDebug(StrCat("agent ", agent.name(), " failed: ", e.what()));
        ok = false;
      }
      ok = ok && actions.size() == sides[s].size();
      for (size_t i = 0; ok && i < actions.size(); ++i) {
        ok = game.IsLegal(state, sides[s][i], actions[i]);
        joint[sides[s][i]] = actions[i];
      }
      if (!ok) record.forfeit = is_a ? "a" : "b";
    }
    if (!record.forfeit.empty()) break;
    const StepResult step = game.Step(state, joint);
    for (int p = 0; p < game.num_players(); ++p) {
      record.player_scores[p] += step.rewards[p];
    }
    state = step.next_state;
  }

  std::vector<double> side_score(2, 0.0);
  for (int s = 0; s < 2; ++s) {
    for (int p : sides[s]) side_score[s] += record.player_scores[p];
    side_score[s] /= sides[s].size();
  }
  record.score_a = side_score[side_a];
  record.score_b = side_score[1 - side_a];
  if (record.forfeit == "a") {
    record.outcome = -1;
  } else if (record.forfeit == "b") {
    record.outcome = 1;
  } else {
    record.outcome = record.score_a > record.score_b   ? 1
                     : record.score_a < record.score_b ? -1
                                                       : 0;
  }
  return record;
}

std::vector<MatchRecord> RunPairedMatch(const Game& game, const Agent& agent_a,
                                        const Agent& agent_b, uint64_t seed) {
  return {RunMatch(game, agent_a, agent_b, 0, seed),
          RunMatch(game, agent_a, agent_b, 1, seed)};
}

double PairStats::WinRate() const {
  return wins + losses == 0 ? 0.5 : static_cast<double>(wins) / (wins + losses);
}

PairStats Summarize(const std::vector<MatchRecord>& records, uint64_t seed) {
  PairStats stats;
  stats.seed = seed;
  if (records.empty()) return stats;
  stats.agent_a = records[0].agent_a;
  stats.agent_b = records[0].agent_b;
  double sum = 0.0;
  for (const auto& r : records) {
    stats.wins += r.outcome > 0;
    stats.losses += r.outcome < 0;
    stats.draws += r.outcome == 0;
    sum += r.score_a;
  }
  stats.matches = records.size();
  stats.mean_score_a = sum / records.size();
  double var = 0.0;
  for (const auto& r : records) {
    var += (r.score_a - stats.mean_score_a) * (r.score_a - stats.mean_score_a);
  }
  stats.std_score_a = std::sqrt(var / records.size());
  return stats;
}

std::vector<MatchRecord> PlayMatches(const Game& game, const Agent& agent_a,
                                     const Agent& agent_b, int64_t matches,
                                     uint64_t seed, int threads) {
  std::vector<MatchRecord> records(matches);
  auto play = [&](int64_t i) {
    records[i] = RunMatch(game, agent_a, agent_b, static_cast<int>(i % 2),
                          DeriveSeed(seed, i / 2));
  };
  if (threads <= 1 || matches < 2) {
    for (int64_t i = 0; i < matches; ++i) play(i);
    return records;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int64_t i = next++; i < matches; i = next++) play(i);
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

WinTable Tournament(const Game& game, const std::vector<AgentPtr>& agents,
                    int64_t matches_per_pair, uint64_t seed, int threads) {
  if (agents.size() < 2) throw ContractViolation("Tournament: need >= 2 agents");
  WinTable table;
  uint64_t pair = 0;
  for (size_t i = 0; i < agents.size(); ++i) {
    for (size_t j = i + 1; j < agents.size(); ++j, ++pair) {
      const uint64_t pair_seed = DeriveSeed(seed, pair);
      const auto records = PlayMatches(game, *agents[i], *agents[j],
                                       matches_per_pair, pair_seed, threads);
      PairStats stats = Summarize(records, pair_seed);
      stats.agent_a = agents[i]->name();
      stats.agent_b = agents[j]->name();
      table.push_back(stats);
    }
  }
  return table;
}

namespace {

constexpr char kHeader[] =
    "agent_a,agent_b,wins,losses,draws,matches,mean_score_a,std_score_a,seed";

template <typename T>
T ParseNumber(const std::string& field, int line) {
  T value{};
  const auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ContractViolation(StrCat("WinTable CSV line ", line, ": bad number '",
                                   field, "'"));
  }
  return value;
}

}  // namespace

std::string WinTableToCsv(const WinTable& table) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& row : table) {
    for (const std::string* name : {&row.agent_a, &row.agent_b}) {
      if (name->find_first_of(",\n") != std::string::npos) {
        throw ContractViolation(StrCat("agent name '", *name,
                                       "' cannot be written to CSV"));
      }
    }
    out += StrCat(row.agent_a, ',', row.agent_b, ',', row.wins, ',', row.losses,
                  ',', row.draws, ',', row.matches, ',',
                  FormatDouble(row.mean_score_a), ',',
                  FormatDouble(row.std_score_a), ',', row.seed, '\n');
  }
  return out;
}

WinTable ParseWinTableCsv(const std::string& text) {
  const auto lines = Split(text, '\n');
  if (lines.empty() || Trim(lines[0]) != kHeader) {
    throw ContractViolation("WinTable CSV: missing or unexpected header");
  }
  WinTable table;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string line = Trim(lines[i]);
    if (line.empty()) continue;
    const auto f = Split(line, ',');
    const int n = static_cast<int>(i) + 1;
    if (f.size() != 9) {
      throw ContractViolation(StrCat("WinTable CSV line ", n, ": expected 9 fields"));
    }
    PairStats row;
    row.agent_a = f[0];
    row.agent_b = f[1];
    row.wins = ParseNumber<int64_t>(f[2], n);
    row.losses = ParseNumber<int64_t>(f[3], n);
    row.draws = ParseNumber<int64_t>(f[4], n);
    row.matches = ParseNumber<int64_t>(f[5], n);
    row.mean_score_a = ParseNumber<double>(f[6], n);
    row.std_score_a = ParseNumber<double>(f[7], n);
    row.seed = ParseNumber<uint64_t>(f[8], n);
    table.push_back(row);
  }
  return table;
}

double WilsonLowerBound(int64_t successes, int64_t trials) {
  if (trials == 0) return 0.0;
  constexpr double z = 1.6448536269514722;
  const double n = trials;
  const double p = successes / n;
  const double center = p + z * z / (2 * n);
  const double margin = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  return (center - margin) / (1 + z * z / n);
}

}  // namespace nncce
