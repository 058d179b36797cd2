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

#ifndef NNCCE_HARNESS_H_
#define NNCCE_HARNESS_H_

// Head-to-head matches between agents, round-robin tournaments and their CSV
// tables.
//
// Games are played between two sides. A side is a set of players (one player
// per side unless the game declares teams), and one agent controls every
// player on its side. A side's score is the mean accumulated reward of its
// players; the side with more points wins and equal points are a draw.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nncce/games.h"
#include "nncce/util.h"

namespace nncce {

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // One action per entry of `players`. Must be safe to call concurrently.
  virtual std::vector<int> Act(const Game& game, const GameState& state,
                               const std::vector<int>& players, Rng& rng) const = 0;
};

using AgentPtr = std::shared_ptr<const Agent>;

// Uniform over legal actions.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::string name = "random") : name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<int> Act(const Game& game, const GameState& state,
                       const std::vector<int>& players, Rng& rng) const override;

 private:
  std::string name_;
};

// Player sets of the two sides.
std::vector<std::vector<int>> GameSides(const GameSpec& spec);

struct MatchRecord {
  std::string game_id;
  std::string agent_a;
  std::string agent_b;
  // Side controlled by agent A (0 or 1).
  int side_a = 0;
  std::vector<double> player_scores;
  double score_a = 0.0;
  double score_b = 0.0;
  // +1 agent A won, -1 agent B won, 0 draw.
  int outcome = 0;
  // Agent that forfeited ("a" or "b"), empty when none.
  std::string forfeit;
  uint64_t seed = 0;
};

// Plays one episode. An illegal action or an exception from an agent forfeits
// the match for that agent.
MatchRecord RunMatch(const Game& game, const Agent& agent_a, const Agent& agent_b,
                     int side_a, uint64_t seed);

// Two matches with the same seed and the roles swapped.
std::vector<MatchRecord> RunPairedMatch(const Game& game, const Agent& agent_a,
                                        const Agent& agent_b, uint64_t seed);

struct PairStats {
  std::string agent_a;
  std::string agent_b;
  int64_t wins = 0;
  int64_t losses = 0;
  int64_t draws = 0;
  int64_t matches = 0;
  double mean_score_a = 0.0;
  double std_score_a = 0.0;
  uint64_t seed = 0;

  // wins / (wins + losses); 0.5 when every match was drawn.
  double WinRate() const;
};

PairStats Summarize(const std::vector<MatchRecord>& records, uint64_t seed);

// `matches` records between a and b, in role-swapped pairs with per-pair
// seeds derived from `seed`. Runs on `threads` worker threads (1 means
// sequential); results do not depend on the thread count.
std::vector<MatchRecord> PlayMatches(const Game& game, const Agent& agent_a,
                                     const Agent& agent_b, int64_t matches,
                                     uint64_t seed, int threads = 1);

using WinTable = std::vector<PairStats>;

// Round robin over all unordered pairs, in input order.
WinTable Tournament(const Game& game, const std::vector<AgentPtr>& agents,
                    int64_t matches_per_pair, uint64_t seed, int threads = 1);

std::string WinTableToCsv(const WinTable& table);
WinTable ParseWinTableCsv(const std::string& text);

// One-sided lower bound of the Wilson score interval at 95% confidence.
double WilsonLowerBound(int64_t successes, int64_t trials);

}  // namespace nncce

#endif  // NNCCE_HARNESS_H_
