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

#ifndef NNCCE_GAMES_H_
#define NNCCE_GAMES_H_

// Finite-horizon simultaneous-move stochastic games.
//
// A game is a pure function of (state, joint action): every built-in game is
// deterministic once the start state has been drawn, so trees built over it
// can deduplicate states by payload.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nncce/util.h"

namespace nncce {

struct GameState {
  std::vector<int32_t> payload;
  int timestep = 0;
  bool terminal = false;

  // Equality ignores `terminal`, which is a function of payload and timestep.
  bool operator==(const GameState& other) const {
    return timestep == other.timestep && payload == other.payload;
  }
};

struct GameStateHash {
  size_t operator()(const GameState& state) const;
};

// Entry i is player i's action index in [0, A_i).
using JointAction = std::vector<int>;

struct StepResult {
  GameState next_state;
  std::vector<double> rewards;
};

enum class GameKind { kGeneralSum, kZeroSum, kIdenticalInterest };

struct GameSpec {
  std::string id;
  int num_players = 2;
  int horizon = 1;
  std::vector<int> action_counts;
  // Part of the stochastic-game tuple; the finite-horizon algorithms never
  // discount, and every built-in game fixes it to 1.
  double discount = 1.0;
  std::vector<std::pair<GameState, double>> start_distribution;
  GameKind kind = GameKind::kGeneralSum;
  // Bounds on each player's undiscounted episode return.
  std::vector<double> return_lo;
  std::vector<double> return_hi;
  // Partition of players into sides for head-to-head play.
  std::vector<std::vector<int>> sides;

  // Throws ContractViolation when an invariant does not hold.
  void Validate() const;
};

// -- Joint action indexing (row-major, last player fastest) -----------------

int64_t NumJointActions(std::span<const int> action_counts);
int64_t JointActionIndex(std::span<const int> action_counts,
                         const JointAction& joint);
JointAction JointActionFromIndex(std::span<const int> action_counts,
                                 int64_t index);

// -- Game interface ---------------------------------------------------------

class Game {
 public:
  explicit Game(GameSpec spec);
  virtual ~Game() = default;

  const GameSpec& spec() const { return spec_; }
  int num_players() const { return spec_.num_players; }
  int horizon() const { return spec_.horizon; }

  GameState SampleStart(Rng& rng) const;

  // Throws ContractViolation naming the player and action when `joint` is not
  // legal in `state`, or when `state` is terminal.
  StepResult Step(const GameState& state, const JointAction& joint) const;

  std::vector<int> LegalActions(const GameState& state, int player) const;
  bool IsLegal(const GameState& state, int player, int action) const;

  virtual std::vector<double> Observe(const GameState& state,
                                      int player) const = 0;
  virtual int ObservationSize() const = 0;
  virtual std::string StateToString(const GameState& state) const;

 protected:
  virtual StepResult DoStep(const GameState& state,
                            const JointAction& joint) const = 0;
  // Defaults to every action.
  virtual std::vector<int> DoLegalActions(const GameState& state,
                                          int player) const;

  GameSpec spec_;
};

using GamePtr = std::shared_ptr<const Game>;

// -- Normal-form games ------------------------------------------------------

// One-shot N-player game given by a dense payoff tensor.
class MatrixGame : public Game {
 public:
  // payoffs[joint_index][player], joint index row-major.
  MatrixGame(std::string id, std::vector<int> action_counts,
             std::vector<std::vector<double>> payoffs);

  const std::vector<double>& Payoff(const JointAction& joint) const;
  const std::vector<std::vector<double>>& payoffs() const { return payoffs_; }

  std::vector<double> Observe(const GameState& state,
                              int player) const override;
  int ObservationSize() const override { return 1; }

 protected:
  StepResult DoStep(const GameState& state,
                    const JointAction& joint) const override;

 private:
  std::vector<std::vector<double>> payoffs_;
};

// Parses the matrix text format: first line `N A_1 ... A_N`, then one line per
// joint action in row-major order holding N payoffs.
std::shared_ptr<MatrixGame> ParseMatrixGame(const std::string& text,
                                            const std::string& id);
std::shared_ptr<MatrixGame> LoadMatrixGame(const std::string& path);

std::shared_ptr<MatrixGame> MatchingPennies();
std::shared_ptr<MatrixGame> RockPaperScissors();
// Action 0 = cooperate, 1 = defect; payoffs CC 3, CD 0/5, DD 1.
std::shared_ptr<MatrixGame> PrisonersDilemma();

// A matrix game played for a fixed number of rounds; the state remembers the
// previous joint action so that the tree has distinct states per history.
class RepeatedMatrixGame : public Game {
 public:
  RepeatedMatrixGame(std::shared_ptr<const MatrixGame> stage, int rounds);

  std::vector<double> Observe(const GameState& state,
                              int player) const override;
  int ObservationSize() const override;

 protected:
  StepResult DoStep(const GameState& state,
                    const JointAction& joint) const override;

 private:
  std::shared_ptr<const MatrixGame> stage_;
};

// Two-player general-sum chain: the stage payoff at every step depends on the
// previous joint action (the "context"), with pseudo-random entries fixed by
// a seed. Per-step rewards lie in [0, 1/H], so returns lie in [0, 1].
class ChainGame : public Game {
 public:
  ChainGame(int horizon, int num_actions, uint64_t seed);

  double StageReward(int timestep, int context, const JointAction& joint,
                     int player) const;
  int num_contexts() const { return num_actions_ * num_actions_; }

  std::vector<double> Observe(const GameState& state,
                              int player) const override;
  int ObservationSize() const override { return num_contexts() + 1; }

 protected:
  StepResult DoStep(const GameState& state,
                    const JointAction& joint) const override;

 private:
  int num_actions_;
  uint64_t seed_;
};

// -- Goofspiel --------------------------------------------------------------

// Each player holds bid cards 1..N; prizes 1..N are revealed in an order drawn
// uniformly at start and stored in the state. The higher bid wins the prize's
// points, ties discard it. Per-step rewards are (+p, -p) for the winner and
// loser, so accumulated rewards equal the score difference.
//
// Payload: [hand bitmask p0, hand bitmask p1, score p0 - p1, order...].
class Goofspiel : public Game {
 public:
  // When `fixed_order` is set the start distribution is a point mass.
  explicit Goofspiel(int num_cards,
                     std::optional<std::vector<int>> fixed_order = {});

  int num_cards() const { return num_cards_; }
  int CurrentPrize(const GameState& state) const;

  // own hand (N), opponent hand (N), remaining prizes (N), current prize
  // one-hot (N), score difference / total prizes, timestep / N.
  std::vector<double> Observe(const GameState& state,
                              int player) const override;
  int ObservationSize() const override { return 4 * num_cards_ + 2; }
  std::string StateToString(const GameState& state) const override;

 protected:
  StepResult DoStep(const GameState& state,
                    const JointAction& joint) const override;
  std::vector<int> DoLegalActions(const GameState& state,
                                  int player) const override;

 private:
  int num_cards_;
};

// -- Grid pursuit -----------------------------------------------------------

// Two pursuers (players 0, 1) chase one evader (player 2) on a W x H grid.
// Actions: up, down, left, right, stay; off-grid moves clamp to staying.
// Every step on which a pursuer shares the evader's cell pays +1 to each
// pursuer and -1 to the evader.
//
// Payload: [x0, y0, x1, y1, x2, y2].
class GridPursuit : public Game {
 public:
  enum Move { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
  static constexpr int kNumMoves = 5;

  // Default spawn layouts: pursuers along one edge, evader mid opposite edge,
  // and the mirrored layout, each with probability 0.5.
  GridPursuit(int width, int height, int horizon);
  GridPursuit(int width, int height, int horizon,
              std::vector<std::pair<GameState, double>> spawns);

  int width() const { return width_; }
  int height() const { return height_; }

  // Normalized (x, y) per agent, then timestep / horizon.
  std::vector<double> Observe(const GameState& state,
                              int player) const override;
  int ObservationSize() const override { return 7; }
  std::string StateToString(const GameState& state) const override;

  static GameState MakeState(int x0, int y0, int x1, int y1, int x2, int y2,
                             int timestep = 0);

 protected:
  StepResult DoStep(const GameState& state,
                    const JointAction& joint) const override;

 private:
  int width_;
  int height_;
};

// Builds a game from its identifier:
//   matrix:<file>                   normal-form game from a text file
//   repeated:<rounds>:<file>        matrix game repeated for several rounds
//   chain:<H>x<A>[:<seed>]          two-player chain game
//   goofspiel:<N>[:fixed]           Goofspiel; `fixed` uses order N..1
//   pursuit:<W>x<H>[:<horizon>]     grid pursuit, horizon defaults to 10
GamePtr MakeGame(const std::string& id);

}  // namespace nncce

#endif  // NNCCE_GAMES_H_
