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

#ifndef NNCCE_DATA_H_
#define NNCCE_DATA_H_

// Game-tree collection, tree selection, value up-sampling, replay sampling and
// value-network datasets.
//
// A GameTree is a layered DAG: nodes at depth h are deduplicated by state, so
// two trajectories reaching the same state share one node. Node ids index
// GameTree::nodes.

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "nncce/approx.h"
#include "nncce/bandit.h"
#include "nncce/games.h"
#include "nncce/util.h"

namespace nncce {

struct TreeEdge {
  int child = -1;
  std::vector<double> rewards;
};

struct TreeNode {
  GameState state;
  int depth = 0;
  // Prediction of the policy source when the node was created.
  std::vector<double> value;
  std::vector<WeightRow> policy_weights;
  int64_t visit_count = 0;
  // joint index -> edge.
  std::map<int64_t, TreeEdge> children;
  // First edge that reached this node; -1 for roots.
  int parent = -1;
  int64_t parent_joint = -1;
  // Per-player sums of backed-up returns and the number of backups.
  std::vector<double> return_sum;
  int64_t backups = 0;
  // action_visits[player][action]: times the action was played here.
  std::vector<std::vector<int64_t>> action_visits;

  // Mean backed-up return, or the prior value before any backup.
  std::vector<double> MeanReturn() const;
};

class GameTree {
 public:
  explicit GameTree(int horizon = 0) : layers_(horizon + 1), index_(horizon + 1) {}

  std::vector<TreeNode> nodes;

  const std::vector<int>& roots() const { return layers_[0]; }
  int horizon() const { return static_cast<int>(layers_.size()) - 1; }
  const std::vector<std::vector<int>>& layers() const { return layers_; }

  // Node id of `state` at `depth`, or -1.
  int Find(const GameState& state, int depth) const;
  // Returns (id, created).
  std::pair<int, bool> FindOrAdd(TreeNode node);

 private:
  std::vector<std::vector<int>> layers_;
  std::vector<std::unordered_map<GameState, int, GameStateHash>> index_;
};

// Distinct node ids at depth h.
const std::vector<int>& LayerOf(const GameTree& tree, int h);

class PolicySource {
 public:
  struct Prediction {
    std::vector<double> value;
    // Per-player distribution over all A_i actions.
    std::vector<std::vector<double>> policies;
  };
  virtual ~PolicySource() = default;
  virtual Prediction Predict(const Game& game, const GameState& state) const = 0;
};

// Uniform policies over legal actions, zero values.
class UniformPolicySource : public PolicySource {
 public:
  Prediction Predict(const Game& game, const GameState& state) const override;
};

enum class Expansion {
  // Every simulation plays to a terminal state.
  kFullTrajectory,
  // A simulation stops at the first node it creates.
  kStopAtNewLeaf,
};

struct TreeOptions {
  Expansion expansion = Expansion::kFullTrajectory;
  // Per player: probability that the player acts uniformly at random for a
  // whole simulation. Empty means on-policy for everyone.
  std::vector<double> randomize_prob;
};

struct SimulationStep {
  int node = -1;
  JointAction joint;
  // Probability of each player's sampled action under its sampling policy.
  std::vector<double> action_prob;
  std::vector<double> rewards;
};

struct Simulation {
  std::vector<SimulationStep> steps;
  int leaf = -1;
  // Per-player return from each step's node to the end of the simulation,
  // bootstrapped with the leaf's predicted value when it is not terminal.
  std::vector<std::vector<double>> returns;
  std::vector<bool> randomized;
};

// Runs one simulation from `root` (a node id), adding nodes as needed and
// backing up returns and visit counts.
Simulation Simulate(GameTree& tree, const Game& game, const PolicySource& source,
                    int root, const TreeOptions& options, Rng& rng);

// Creates a node for `state` (or finds it) using the source's prediction.
int AddNode(GameTree& tree, const Game& game, const PolicySource& source,
            const GameState& state);

// K simulations, each from a start state sampled from the game.
GameTree GenerateTree(const Game& game, const PolicySource& source,
                      int64_t simulations, const TreeOptions& options,
                      uint64_t seed);

// Per tree, mean over layers of std/|mean| of the per-node scalar value
// (player 0's mean backed-up return); layers with |mean| < 1e-9 are skipped.
double TreeCvScore(const GameTree& tree);
// Index of the best tree by TreeCvScore; ties go to the first.
int SelectTreeByCv(const std::vector<GameTree>& trees);

struct UpsampleResult {
  std::vector<RegressionExample> data;
  // Class sizes after merging, largest first, before resampling.
  std::vector<int64_t> merged_sizes;
};

UpsampleResult UpsampleValues(const std::vector<RegressionExample>& data,
                              int num_classes, int64_t min_count, uint64_t seed);

struct ReplayEntry {
  std::vector<std::vector<double>> observations;
  double value = 0.0;
  std::vector<double> policy;
  int timestep = 0;
  int player = 0;
  int64_t visit_count = 0;
};

// Two-stage draw with replacement: a timestep uniformly among the occupied
// ones, then an entry uniformly within it. Returns indices into `buffer`.
std::vector<size_t> ReplaySample(const std::vector<ReplayEntry>& buffer,
                                 int64_t batch_size, Rng& rng);

// One entry per (node, player) for non-terminal nodes: the mean backed-up
// return and the normalized per-action visit counts.
std::vector<ReplayEntry> ReplayFromTree(const GameTree& tree, const Game& game);

// Tab-separated export, one line per entry.
std::string ExportReplayTsv(const std::vector<ReplayEntry>& entries);

struct QRecord {
  int node = -1;
  GameState state;
  int64_t joint_index = 0;
  JointAction joint;
  GameState next_state;
  std::vector<double> rewards;
  std::vector<double> child_value;
  // rewards + discount * child_value, per player.
  std::vector<double> target;
};

// One record per edge leaving layer h. `child_values` maps every node id in
// layer h + 1 to its per-player value.
std::vector<QRecord> BuildQDataset(const GameTree& tree, const Game& game, int h,
                                   const std::unordered_map<int, std::vector<double>>&
                                       child_values);

}  // namespace nncce

#endif  // NNCCE_DATA_H_
