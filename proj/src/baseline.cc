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

#include "nncce/baseline.h"

#include <algorithm>
#include <deque>
#include <filesystem>

#include "json.hpp"

namespace nncce {

void SmctsConfig::Validate() const {
  auto positive = [](int64_t v, const char* key) {
    if (v < 1) throw ContractViolation(StrCat(key, " must be >= 1, got ", v));
  };
  positive(iterations, "smcts.iterations");
  positive(simulations, "smcts.simulations");
  positive(eval_simulations, "smcts.eval_simulations");
  positive(replay_capacity, "smcts.replay_capacity");
  positive(train_batches, "smcts.train_batches");
  positive(batch_size, "smcts.batch_size");
  positive(codec_bins - 1, "smcts.bins - 1");
  positive(gate_matches, "gate.matches");
  positive(patience, "gate.patience");
  positive(threads, "threads");
}

PolicySource::Prediction SmctsPolicySource::Predict(const Game& game,
                                                    const GameState& state) const {
  const GameSpec& spec = game.spec();
  Prediction out;
  out.value.assign(spec.num_players, 0.0);
  out.policies.resize(spec.num_players);
  for (int p = 0; p < spec.num_players; ++p) {
    out.policies[p].assign(spec.action_counts[p], 0.0);
    if (state.terminal) continue;
    const auto obs = game.Observe(state, p);
    const double v01 = PredictScalar(model_->values[p], model_->codec, obs, {});
    out.value[p] = spec.return_lo[p] + (spec.return_hi[p] - spec.return_lo[p]) * v01;
    const auto probs = model_->policies[p].Forward(obs);
    const auto legal = game.LegalActions(state, p);
    double total = 0.0;
    for (int a : legal) total += probs[a];
    for (int a : legal) {
      out.policies[p][a] = total > 0.0 ? probs[a] / total : 1.0 / legal.size();
    }
  }
  return out;
}

namespace {

std::vector<IxParams> NodeParams(const GameSpec& spec, int64_t simulations) {
  std::vector<IxParams> params(spec.num_players);
  for (int p = 0; p < spec.num_players; ++p) {
    if (spec.action_counts[p] >= 2) {
      params[p] = DefaultSchedule(spec.action_counts[p], simulations);
    }
  }
  return params;
}

void UpdateWeights(GameTree& tree, const GameSpec& spec, const Simulation& sim,
                   const std::vector<IxParams>& params) {
  for (size_t i = 0; i < sim.steps.size(); ++i) {
    const SimulationStep& step = sim.steps[i];
    for (int p = 0; p < spec.num_players; ++p) {
      if (spec.action_counts[p] < 2) continue;
      const double span = spec.return_hi[p] - spec.return_lo[p];
      const double gain =
          std::clamp((sim.returns[i][p] - spec.return_lo[p]) / span, 0.0, 1.0);
      ApplyIxUpdate(tree.nodes[step.node].policy_weights[p], step.joint[p], 1.0 - gain,
                    step.action_prob[p], params[p]);
    }
  }
}

TreeOptions SearchTreeOptions() {
  TreeOptions options;
  options.expansion = Expansion::kStopAtNewLeaf;
  return options;
}

}  // namespace

void SearchFrom(GameTree& tree, const Game& game, const PolicySource& source, int root,
                const SearchOptions& options, Rng& rng) {
  const auto params = NodeParams(game.spec(), options.simulations);
  for (int64_t k = 0; k < options.simulations; ++k) {
    const Simulation sim = Simulate(tree, game, source, root, SearchTreeOptions(), rng);
    if (options.weight_update == WeightUpdate::kIx) {
      UpdateWeights(tree, game.spec(), sim, params);
    }
  }
}

SearchResult SmctsSearch(const Game& game, const GameState& root,
                         const PolicySource& source, const SearchOptions& options,
                         uint64_t seed) {
  if (root.terminal) throw ContractViolation("SmctsSearch: root is terminal");
  if (options.simulations < 1) {
    throw ContractViolation(StrCat("SmctsSearch: need K >= 1, got ", options.simulations));
  }
  GameTree tree(game.horizon());
  Rng rng(seed);
  const int id = AddNode(tree, game, source, root);
  SearchFrom(tree, game, source, id, options, rng);
  const TreeNode& node = tree.nodes[id];
  SearchResult result;
  result.value = node.MeanReturn();
  result.visits = node.action_visits;
  for (const auto& counts : node.action_visits) {
    std::vector<double> policy(counts.size());
    for (size_t a = 0; a < counts.size(); ++a) {
      policy[a] = static_cast<double>(counts[a]) / options.simulations;
    }
    result.policies.push_back(std::move(policy));
  }
  return result;
}

GameTree SmctsTree(const Game& game, const PolicySource& source,
                   const SearchOptions& options, uint64_t seed) {
  GameTree tree(game.horizon());
  Rng rng(seed);
  const auto params = NodeParams(game.spec(), options.simulations);
  for (int64_t k = 0; k < options.simulations; ++k) {
    const int root = AddNode(tree, game, source, game.SampleStart(rng));
    const Simulation sim = Simulate(tree, game, source, root, SearchTreeOptions(), rng);
    if (options.weight_update == WeightUpdate::kIx) {
      UpdateWeights(tree, game.spec(), sim, params);
    }
  }
  return tree;
}

std::vector<int> SmctsAgent::Act(const Game& game, const GameState& state,
                                 const std::vector<int>& players, Rng& rng) const {
  if (game.spec().id != model_->game_id) {
    throw ContractViolation(StrCat("agent trained on ", model_->game_id, " cannot play ",
                                   game.spec().id));
  }
  const SmctsPolicySource source(model_.get());
  std::vector<std::vector<double>> policies;
  if (policy_only_) {
    policies = source.Predict(game, state).policies;
  } else {
    policies = SmctsSearch(game, state, source, {simulations_, update_}, rng()).policies;
  }
  std::vector<int> actions;
  for (int p : players) actions.push_back(SampleCategorical(policies[p], rng));
  return actions;
}

// -- Training -------------------------------------------------------------------

namespace {

using json = nlohmann::json;

MlpConfig NetConfig(const NetworkOptions& net, int input, int output, HeadKind head) {
  MlpConfig c;
  c.layer_dims.push_back(input);
  for (int w : net.hidden) c.layer_dims.push_back(w);
  c.layer_dims.push_back(output);
  c.head_kind = head;
  c.dropout_rate = net.dropout;
  c.l2_coeff = net.l2;
  c.learning_rate = net.learning_rate;
  return c;
}

std::shared_ptr<SmctsModel> FreshModel(const SmctsConfig& config, const GamePtr& game) {
  auto model = std::make_shared<SmctsModel>();
  model->game_id = game->spec().id;
  model->game = game;
  model->codec = SupportCodec(config.codec_bins, 0.0, 1.0);
  const int obs = game->ObservationSize();
  for (int p = 0; p < game->num_players(); ++p) {
    model->policies.emplace_back(
        NetConfig(config.policy, obs, game->spec().action_counts[p],
                  HeadKind::kPolicySoftmax),
        DeriveSeed(config.seed, 100 + p));
    model->values.emplace_back(
        NetConfig(config.value, obs, config.codec_bins, HeadKind::kRegressionSupport),
        DeriveSeed(config.seed, 200 + p));
  }
  return model;
}

}  // namespace

SmctsTrainResult SmctsTrain(const SmctsConfig& config, const SmctsHooks& hooks) {
  config.Validate();
  const GamePtr game = MakeGame(config.game);
  const GameSpec& spec = game->spec();
  const int n = spec.num_players;

  SmctsTrainResult result;
  std::shared_ptr<SmctsModel> accepted;
  double best_score = 0.0;
  int stale = 0;
  std::deque<ReplayEntry> replay;
  const UniformPolicySource uniform;

  for (int t = 1; t <= config.iterations; ++t) {
    const SmctsPolicySource learned(accepted.get());
    const PolicySource& source =
        accepted ? static_cast<const PolicySource&>(learned) : uniform;
    const GameTree tree =
        SmctsTree(*game, source, {config.simulations, config.weight_update},
                  DeriveSeed(DeriveSeed(config.seed, 1), t));
    for (auto& entry : ReplayFromTree(tree, *game)) {
      replay.push_back(std::move(entry));
      if (static_cast<int64_t>(replay.size()) > config.replay_capacity) replay.pop_front();
    }
    const std::vector<ReplayEntry> buffer(replay.begin(), replay.end());

    auto candidate = std::make_shared<SmctsModel>(*(accepted ? accepted : FreshModel(config, game)));
    Rng rng(DeriveSeed(DeriveSeed(config.seed, 2), t));
    const auto picks = ReplaySample(buffer, config.train_batches * config.batch_size, rng);
    std::vector<std::vector<PolicyExample>> policy_data(n);
    std::vector<std::vector<RegressionExample>> value_data(n);
    for (size_t i : picks) {
      const ReplayEntry& e = buffer[i];
      const int p = e.player;
      policy_data[p].push_back({e.observations[p], {}, e.policy});
      const double v01 = (e.value - spec.return_lo[p]) / (spec.return_hi[p] - spec.return_lo[p]);
      value_data[p].push_back({e.observations[p], {}, v01});
    }
    double policy_loss = 0.0;
    double value_loss = 0.0;
    for (int p = 0; p < n; ++p) {
      if (policy_data[p].empty()) continue;
      candidate->policies[p].ResetOptimizer();
      candidate->values[p].ResetOptimizer();
      const uint64_t seed = DeriveSeed(DeriveSeed(config.seed, 3), t * 64 + p);
      policy_loss += TrainPolicy(candidate->policies[p], policy_data[p],
                                 {config.policy.epochs, config.batch_size, seed})
                         .back() / n;
      value_loss += TrainRegression(candidate->values[p], value_data[p], candidate->codec,
                                    {config.value.epochs, config.batch_size, seed + 1})
                        .back() / n;
    }

    const SmctsAgent player(candidate, config.eval_simulations, config.weight_update,
                            config.policy_only, "candidate");
    const GateDecision gate =
        ValidationGate(player, accepted ? &best_score : nullptr, *game,
                       config.gate_matches, DeriveSeed(config.seed, 4), config.threads);
    if (gate.accept) {
      candidate->gate_score = gate.score;
      candidate->iteration = t;
      accepted = candidate;
      if (hooks.on_accept) hooks.on_accept(*accepted);
    }
    if (gate.improved) {
      best_score = gate.score;
      stale = 0;
    } else {
      ++stale;
    }
    result.iterations_run = t;
    std::string line = json{{"iteration", t},
                            {"tree_nodes", tree.nodes.size()},
                            {"replay_size", buffer.size()},
                            {"policy_loss", policy_loss},
                            {"value_loss", value_loss},
                            {"gate_score", gate.score},
                            {"gate_decision", gate.accept ? "accept" : "rollback"}}
                           .dump();
    if (hooks.on_log) hooks.on_log(line);
    result.log.push_back(std::move(line));
    LogInfo(StrCat("smcts iteration ", t, ": gate score ", gate.score));
    if (stale >= config.patience) {
      result.stopped_early = t < config.iterations;
      break;
    }
  }
  result.model = accepted;
  return result;
}

void SaveSmctsModel(const SmctsModel& model, const std::string& dir) {
  const std::string stem =
      (std::filesystem::path(dir) / CheckpointStem(model.game_id)).string();
  for (size_t p = 0; p < model.policies.size(); ++p) {
    const CheckpointMeta meta{model.game_id, static_cast<int>(p), -1, model.codec};
    SaveCheckpoint(StrCat(stem, "_", p, "_smcts_policy.ccef"), model.policies[p], meta);
    SaveCheckpoint(StrCat(stem, "_", p, "_smcts_value.ccef"), model.values[p], meta);
  }
}

std::shared_ptr<SmctsModel> LoadSmctsModel(const std::string& dir,
                                           const std::string& game_id) {
  auto model = std::make_shared<SmctsModel>();
  model->game_id = game_id;
  model->game = MakeGame(game_id);
  const std::string stem = (std::filesystem::path(dir) / CheckpointStem(game_id)).string();
  for (int p = 0; p < model->game->num_players(); ++p) {
    CheckpointMeta meta;
    model->policies.push_back(LoadCheckpoint(StrCat(stem, "_", p, "_smcts_policy.ccef"), &meta));
    if (meta.game_id != game_id) {
      throw RuntimeFailure(StrCat("checkpoint for ", meta.game_id, " does not match ",
                                  game_id));
    }
    model->values.push_back(LoadCheckpoint(StrCat(stem, "_", p, "_smcts_value.ccef"), &meta));
    model->codec = meta.codec;
  }
  return model;
}

}  // namespace nncce
