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

#ifndef NNCCE_CCE_H_
#define NNCCE_CCE_H_

// Stage-game solving with simultaneous EXP-IX learners.
//
// When every player runs a no-regret learner on the same one-shot game, the
// empirical distribution of joint play approaches the set of coarse
// correlated equilibria. This module runs those dynamics on a single state,
// prunes strictly dominated actions beforehand, and measures the distance of
// any joint distribution from a CCE by exhaustive enumeration.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nncce/bandit.h"
#include "nncce/games.h"
#include "nncce/util.h"

namespace nncce {

// mask[player][action] == true means the action may be played.
using ActionMask = std::vector<std::vector<bool>>;

ActionMask FullMask(const std::vector<int>& action_counts);
void ValidateMask(const ActionMask& mask, const std::vector<int>& counts);

// One-shot game with per-player losses in [0, 1].
class StageGame {
 public:
  using LossOracle = std::function<std::vector<double>(const JointAction&)>;

  // `losses[joint_index * N + player]`, joint index row-major.
  static StageGame Dense(std::vector<int> action_counts,
                         std::vector<double> losses);
  static StageGame FromOracle(std::vector<int> action_counts,
                              LossOracle oracle);

  int num_players() const { return static_cast<int>(action_counts_.size()); }
  const std::vector<int>& action_counts() const { return action_counts_; }
  int64_t num_joint_actions() const { return num_joint_; }
  bool has_dense() const { return !dense_.empty(); }
  const std::vector<double>& dense() const { return dense_; }

  double DenseLoss(int64_t joint_index, int player) const {
    return dense_[joint_index * num_players() + player];
  }
  std::vector<double> Losses(const JointAction& joint) const;

  // Materializes the dense tensor from the oracle when the joint space has at
  // most `cap` entries. Returns has_dense().
  bool Densify(int64_t cap);

 private:
  std::vector<int> action_counts_;
  int64_t num_joint_ = 0;
  std::vector<double> dense_;
  LossOracle oracle_;
};

struct CceOutcome {
  std::vector<int> action_counts;
  std::vector<WeightRow> weights;
  // Time-averaged per-round policies; pruned arms are exactly 0.
  std::vector<std::vector<double>> policies;
  // policy_from_weights of the final weights, pruned arms zeroed.
  std::vector<std::vector<double>> final_policies;
  // 1 - average incurred loss, per player.
  std::vector<double> values;
  // joint index -> number of rounds it was sampled.
  std::map<int64_t, int64_t> empirical_joint;
  int64_t rounds = 0;
};

using JointDistribution = std::vector<std::pair<JointAction, double>>;

// Per player: loss = 1 - (r - min) / (max - min) over the given rows, so the
// best reward maps to 0 and the worst to 1. A degenerate range maps to 0.5.
// rewards[row][player].
std::vector<std::vector<double>> NormalizeLosses(
    const std::vector<std::vector<double>>& rewards);

// Runs `rounds` of simultaneous EXP-IX. `params` holds one entry per player.
// Throws RuntimeFailure naming the joint action if a loss leaves [0, 1].
CceOutcome MaExpIx(const StageGame& stage, int64_t rounds,
                   const std::vector<IxParams>& params,
                   const ActionMask& mask, Rng& rng);

// Per-player DefaultSchedule over the number of playable actions.
std::vector<IxParams> DefaultStageParams(const ActionMask& mask,
                                         int64_t rounds);

struct PruneResult {
  ActionMask mask;
  int removed = 0;
  // Non-empty when pruning was skipped.
  std::string diagnostic;
};

// Iterated elimination of strictly dominated pure strategies, starting from
// `initial` (typically the legal actions).
PruneResult PruneDominated(const StageGame& stage, const ActionMask& initial);

// max over players and unilateral deviations of the expected loss reduction,
// clipped at 0. Deviations range over `deviations` (all actions if empty).
double VerifyCce(const JointDistribution& dist, const StageGame& stage,
                 const ActionMask& deviations = {});

JointDistribution EmpiricalToDistribution(const CceOutcome& outcome);

// Realized per-player regret of the sampled play against the best fixed
// deviation, given the dense stage and the outcome's empirical joint counts.
std::vector<double> RealizedRegret(const CceOutcome& outcome,
                                   const StageGame& stage,
                                   const ActionMask& deviations = {});

// Distribution file: one line per joint action, comma-separated action
// indices followed by the probability.
JointDistribution ParseDistribution(const std::string& text, int num_players);

// -- Stage solving on raw rewards -------------------------------------------

struct StageSolveOptions {
  int64_t rounds = 10000;
  bool prune = true;
  int64_t dense_cap = 4096;
  bool verify = false;
};

struct StageSolution {
  CceOutcome outcome;
  ActionMask mask;
  // Stage value per player on the raw reward scale.
  std::vector<double> values;
  // Per-player CCE policy over all A_i actions.
  std::vector<std::vector<double>> policies;
  // Filled when options.verify is set; -1 otherwise.
  double epsilon = -1.0;
};

// Solves the stage whose raw payoffs are `payoffs[joint_index][player]` for
// joint actions allowed by `legal`. Payoffs are min-max normalized into
// losses over the legal entries, values mapped back to the raw scale.
StageSolution SolveStage(const std::vector<int>& action_counts,
                         const ActionMask& legal,
                         const std::vector<std::vector<double>>& payoffs,
                         const StageSolveOptions& options, Rng& rng);

}  // namespace nncce

#endif  // NNCCE_CCE_H_
