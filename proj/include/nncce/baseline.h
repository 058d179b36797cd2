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

#ifndef NNCCE_BASELINE_H_
#define NNCCE_BASELINE_H_

// Simultaneous-move Monte Carlo tree search.
//
// A search runs K simulations from a root. Each simulation samples a joint
// action at every node from the node's per-player weights, which start at
// the model's policy prediction, and stops at the first node it creates,
// whose predicted value is backed up. Node values are the mean backed-up
// returns and root policies are the normalized per-player action counts.
// Training alternates search trees over start states, a replay buffer of
// tree nodes, and network updates on replay batches, gated like NN-CCE.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nncce/approx.h"
#include "nncce/data.h"
#include "nncce/games.h"
#include "nncce/harness.h"
#include "nncce/trainer.h"

namespace nncce {

enum class WeightUpdate {
  // Node weights stay at the model prediction.
  kNone,
  // EXP-IX update of each visited node's weights with the backed-up return.
  kIx,
};

struct SmctsConfig {
  std::string game = "pursuit:4x4:6";
  uint64_t seed = 0;
  int iterations = 5;
  // Simulations per training tree.
  int64_t simulations = 2000;
  // Simulations per move when playing.
  int64_t eval_simulations = 100;
  WeightUpdate weight_update = WeightUpdate::kIx;
  // Play by sampling the distilled policy instead of searching.
  bool policy_only = false;
  int64_t replay_capacity = 50000;
  int64_t train_batches = 200;
  int batch_size = 64;
  NetworkOptions policy{{256, 256}, 0, {}, 0.0, 1e-4, 1e-3, 1, 64};
  NetworkOptions value{{256, 256}, 0, {}, 0.0, 1e-4, 1e-3, 1, 64};
  int codec_bins = 21;
  int gate_matches = 100;
  int patience = 5;
  int threads = 1;

  void Validate() const;
};

// Per-player policy and value networks.
struct SmctsModel {
  std::string game_id;
  GamePtr game;
  std::vector<MlpModel> policies;
  std::vector<MlpModel> values;
  SupportCodec codec;
  double gate_score = 0.0;
  int iteration = 0;
};

class SmctsPolicySource : public PolicySource {
 public:
  explicit SmctsPolicySource(const SmctsModel* model) : model_(model) {}
  Prediction Predict(const Game& game, const GameState& state) const override;

 private:
  const SmctsModel* model_;
};

struct SearchOptions {
  int64_t simulations = 100;
  WeightUpdate weight_update = WeightUpdate::kIx;
};

struct SearchResult {
  std::vector<double> value;
  std::vector<std::vector<double>> policies;
  std::vector<std::vector<int64_t>> visits;
};

// Runs `simulations` descents from `root` (in `tree`, which may already hold
// nodes) and updates node weights as configured.
void SearchFrom(GameTree& tree, const Game& game, const PolicySource& source, int root,
                const SearchOptions& options, Rng& rng);

SearchResult SmctsSearch(const Game& game, const GameState& root,
                         const PolicySource& source, const SearchOptions& options,
                         uint64_t seed);

// One search tree per training iteration: each simulation starts at a
// sampled start state.
GameTree SmctsTree(const Game& game, const PolicySource& source,
                   const SearchOptions& options, uint64_t seed);

class SmctsAgent : public Agent {
 public:
  SmctsAgent(std::shared_ptr<const SmctsModel> model, int64_t simulations,
             WeightUpdate update = WeightUpdate::kIx, bool policy_only = false,
             std::string name = "smcts")
      : model_(std::move(model)),
        simulations_(simulations),
        update_(update),
        policy_only_(policy_only),
        name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<int> Act(const Game& game, const GameState& state,
                       const std::vector<int>& players, Rng& rng) const override;

 private:
  std::shared_ptr<const SmctsModel> model_;
  int64_t simulations_;
  WeightUpdate update_;
  bool policy_only_;
  std::string name_;
};

struct SmctsTrainResult {
  std::shared_ptr<SmctsModel> model;
  std::vector<std::string> log;
  int iterations_run = 0;
  bool stopped_early = false;
};

struct SmctsHooks {
  std::function<void(const std::string&)> on_log;
  std::function<void(const SmctsModel&)> on_accept;
};

SmctsTrainResult SmctsTrain(const SmctsConfig& config, const SmctsHooks& hooks = {});

// {game}_{player}_smcts_policy.ccef and {game}_{player}_smcts_value.ccef.
void SaveSmctsModel(const SmctsModel& model, const std::string& dir);
std::shared_ptr<SmctsModel> LoadSmctsModel(const std::string& dir,
                                           const std::string& game_id);

}  // namespace nncce

#endif  // NNCCE_BASELINE_H_
