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

#ifndef NNCCE_TRAINER_H_
#define NNCCE_TRAINER_H_

// The NN-CCE training loop.
//
// Each outer iteration collects a game tree with the current policies, then
// walks its layers from the last timestep to the first. At layer h a value
// model for (state, joint action) is fitted on the layer's edges and the
// values of layer h + 1, every node's stage game is solved with simultaneous
// EXP-IX, and the stage values become the targets for layer h - 1. The CCE
// policies of all nodes are distilled into one policy network per player, and
// the new networks are kept only if they score at least as well against a
// random opponent as the previously accepted ones.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "nncce/approx.h"
#include "nncce/cce.h"
#include "nncce/data.h"
#include "nncce/games.h"
#include "nncce/harness.h"

namespace nncce {

struct NetworkOptions {
  // Value networks: trunk hidden widths, representation width, head hidden
  // widths. Policy networks use `hidden` only.
  std::vector<int> hidden;
  int representation = 32;
  std::vector<int> head_hidden;
  double dropout = 0.0;
  double l2 = 0.0;
  double learning_rate = 1e-3;
  int epochs = 10;
  int batch_size = 64;
};

enum class ValueBackend { kMlp, kTabular };

struct TrainConfig {
  std::string game = "goofspiel:4";
  uint64_t seed = 0;
  int outer_iters = 3;
  int64_t trajectories = 1000;
  int cv_candidates = 1;
  // Per player and simulation, probability of acting uniformly at random.
  double randomize_prob = 0.5;
  StageSolveOptions cce;
  // Stage games per layer checked with the exact CCE verifier.
  int verify_nodes = 4;
  ValueBackend value_backend = ValueBackend::kMlp;
  int64_t tabular_cap = 200000;
  // Share value models across players in zero-sum and identical-interest
  // games.
  bool share_values = true;
  // Encode the joint action as one Prod(A_i) one-hot instead of per-player
  // one-hots.
  bool dense_joint = false;
  int codec_bins = 21;
  NetworkOptions q{{256, 256}, 32, {256, 256}, 0.5, 1e-4, 5e-5, 20, 64};
  NetworkOptions policy{{1028, 1028}, 0, {}, 0.6, 2e-4, 5e-5, 20, 64};
  bool policy_warm_start = true;
  bool upsample = true;
  int upsample_classes = 10;
  // 0 picks max(50, n / 20).
  int64_t upsample_min_count = 0;
  int gate_matches = 100;
  int patience = 5;
  bool greedy_play = false;
  int threads = 1;

  void Validate() const;
};

// Answers stage payoffs for every legal joint action of a state.
class StagePayoffs {
 public:
  virtual ~StagePayoffs() = default;
  // payoffs[joint_index][player]; illegal entries are left at 0.
  virtual std::vector<std::vector<double>> Payoffs(const Game& game,
                                                   const GameState& state,
                                                   const ActionMask& legal) const = 0;
};

// Immediate rewards plus 0 for the (terminal) successor; used at the last
// layer.
class SimulatorPayoffs : public StagePayoffs {
 public:
  std::vector<std::vector<double>> Payoffs(const Game& game, const GameState& state,
                                           const ActionMask& legal) const override;
};

class TabularPayoffs : public StagePayoffs {
 public:
  explicit TabularPayoffs(const TabularQ* table) : table_(table) {}
  std::vector<std::vector<double>> Payoffs(const Game& game, const GameState& state,
                                           const ActionMask& legal) const override;

 private:
  const TabularQ* table_;
};

// Joint-action side input of the value networks.
std::vector<double> EncodeJoint(const std::vector<int>& action_counts,
                                const JointAction& joint, bool dense);
int JointEncodingSize(const std::vector<int>& action_counts, bool dense);

// Value models of one layer: one per player, or a single model for player 0
// when shared.
struct LayerValueModels {
  std::vector<MlpModel> models;
  bool shared = false;
  bool dense_joint = false;
};

class MlpPayoffs : public StagePayoffs {
 public:
  MlpPayoffs(const LayerValueModels* layer, SupportCodec codec)
      : layer_(layer), codec_(codec) {}
  std::vector<std::vector<double>> Payoffs(const Game& game, const GameState& state,
                                           const ActionMask& legal) const override;

 private:
  const LayerValueModels* layer_;
  SupportCodec codec_;
};

struct LayerOptions {
  StageSolveOptions stage;
  int verify_nodes = 0;
  uint64_t seed = 0;
  int threads = 1;
};

struct LayerResult {
  // Node id -> per-player stage value (raw reward scale).
  std::unordered_map<int, std::vector<double>> values;
  // Node id -> per-player CCE policy.
  std::unordered_map<int, std::vector<std::vector<double>>> policies;
  double mean_value = 0.0;
  // Mean verified epsilon, -1 when nothing was verified.
  double mean_epsilon = -1.0;
  int pruned_actions = 0;
};

// Solves the stage game of every node in layer h. Terminal nodes get value 0.
LayerResult ProcessLayer(const GameTree& tree, const Game& game, int h,
                         const StagePayoffs& payoffs, const LayerOptions& options);

struct TrainedAgent {
  std::string game_id;
  GamePtr game;
  std::vector<MlpModel> policies;
  // values[h]; empty layers when the tabular backend was used.
  std::vector<LayerValueModels> values;
  std::vector<TabularQ> tabular;
  SupportCodec codec;
  double gate_score = 0.0;
  int iteration = 0;

  int ValueModelCount() const;
  // Policy of `player` at `state` restricted to legal actions.
  std::vector<double> Policy(const GameState& state, int player) const;
};

class NnCceAgent : public Agent {
 public:
  NnCceAgent(std::shared_ptr<const TrainedAgent> trained, std::string name = "nncce",
             bool greedy = false)
      : trained_(std::move(trained)), name_(std::move(name)), greedy_(greedy) {}
  std::string name() const override { return name_; }
  std::vector<int> Act(const Game& game, const GameState& state,
                       const std::vector<int>& players, Rng& rng) const override;

 private:
  std::shared_ptr<const TrainedAgent> trained_;
  std::string name_;
  bool greedy_;
};

// Tree-generation policies taken from trained policy networks.
class AgentPolicySource : public PolicySource {
 public:
  explicit AgentPolicySource(const TrainedAgent* agent) : agent_(agent) {}
  Prediction Predict(const Game& game, const GameState& state) const override;

 private:
  const TrainedAgent* agent_;
};

struct GateDecision {
  bool accept = true;
  bool improved = true;
  double score = 0.0;
};

// Mean score of `candidate` against a uniform-random agent over a fixed set of
// paired matches. Accepts when there is no previous score or the candidate is
// not worse.
GateDecision ValidationGate(const Agent& candidate, const double* previous_score,
                            const Game& game, int n_matches, uint64_t seed,
                            int threads = 1);

struct TrainHooks {
  std::function<void(const std::string&)> on_log;
  std::function<void(const TrainedAgent&)> on_accept;
};

struct TrainResult {
  std::shared_ptr<TrainedAgent> agent;
  std::vector<std::string> log;
  int iterations_run = 0;
  bool stopped_early = false;
};

TrainResult Train(const TrainConfig& config, const TrainHooks& hooks = {});

// Number of distinct reachable (state, joint action) pairs, or cap + 1 when
// the enumeration exceeds `cap`.
int64_t CountStateActions(const Game& game, int64_t cap);

// Checkpoint files: {game}_{player}_{h}.ccef and {game}_{player}_policy.ccef
// with ':' in the game id replaced by '-'.
std::string CheckpointStem(const std::string& game_id);
void SaveTrainedAgent(const TrainedAgent& agent, const std::string& dir);
std::shared_ptr<TrainedAgent> LoadTrainedAgent(const std::string& dir,
                                               const std::string& game_id);

}  // namespace nncce

#endif  // NNCCE_TRAINER_H_
