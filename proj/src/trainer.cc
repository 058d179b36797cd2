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

#include "nncce/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>
#include <unordered_set>

#include "json.hpp"

namespace nncce {

using json = nlohmann::json;

void TrainConfig::Validate() const {
  auto positive = [](int64_t v, const char* key) {
    if (v < 1) throw ContractViolation(StrCat(key, " must be >= 1, got ", v));
  };
  positive(outer_iters, "train.outer_iters");
  positive(trajectories, "train.trajectories");
  positive(cv_candidates, "train.cv_candidates");
  positive(cce.rounds, "cce.rounds");
  positive(codec_bins - 1, "q.bins - 1");
  positive(gate_matches, "gate.matches");
  positive(patience, "gate.patience");
  positive(threads, "threads");
  positive(upsample_classes, "upsample.classes");
  for (const NetworkOptions* net : {&q, &policy}) {
    positive(net->epochs, "epochs");
    positive(net->batch_size, "batch_size");
  }
  if (!(randomize_prob >= 0.0 && randomize_prob <= 1.0)) {
    throw ContractViolation(StrCat("train.randomize must be in [0,1], got ",
                                   randomize_prob));
  }
}

namespace {

std::vector<int64_t> LegalJoints(const std::vector<int>& counts,
                                 const ActionMask& legal) {
  std::vector<int64_t> out;
  const int64_t total = NumJointActions(counts);
  for (int64_t j = 0; j < total; ++j) {
    const JointAction joint = JointActionFromIndex(counts, j);
    bool ok = true;
    for (size_t p = 0; p < joint.size() && ok; ++p) ok = legal[p][joint[p]];
    if (ok) out.push_back(j);
  }
  return out;
}

ActionMask LegalMask(const Game& game, const GameState& state) {
  ActionMask mask = FullMask(game.spec().action_counts);
  for (int p = 0; p < game.num_players(); ++p) {
    std::fill(mask[p].begin(), mask[p].end(), false);
    for (int a : game.LegalActions(state, p)) mask[p][a] = true;
  }
  return mask;
}

template <typename Fn>
void ParallelFor(int64_t n, int threads, Fn fn) {
  if (threads <= 1 || n < 2) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int64_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double Normalize(double v, double lo, double hi) { return (v - lo) / (hi - lo); }

}  // namespace

std::vector<std::vector<double>> SimulatorPayoffs::Payoffs(
    const Game& game, const GameState& state, const ActionMask& legal) const {
  const auto& counts = game.spec().action_counts;
  std::vector<std::vector<double>> out(NumJointActions(counts),
                                       std::vector<double>(game.num_players(), 0.0));
  for (int64_t j : LegalJoints(counts, legal)) {
    out[j] = game.Step(state, JointActionFromIndex(counts, j)).rewards;
  }
  return out;
}

std::vector<std::vector<double>> TabularPayoffs::Payoffs(
    const Game& game, const GameState& state, const ActionMask& legal) const {
  const auto& counts = game.spec().action_counts;
  std::vector<std::vector<double>> out(NumJointActions(counts),
                                       std::vector<double>(game.num_players(), 0.0));
  for (int64_t j : LegalJoints(counts, legal)) out[j] = table_->Lookup(state, j);
  return out;
}

int JointEncodingSize(const std::vector<int>& action_counts, bool dense) {
  if (dense) return static_cast<int>(NumJointActions(action_counts));
  int total = 0;
  for (int k : action_counts) total += k;
  return total;
}

std::vector<double> EncodeJoint(const std::vector<int>& action_counts,
                                const JointAction& joint, bool dense) {
  std::vector<double> out(JointEncodingSize(action_counts, dense), 0.0);
  if (dense) {
    out[JointActionIndex(action_counts, joint)] = 1.0;
    return out;
  }
  int offset = 0;
  for (size_t p = 0; p < action_counts.size(); ++p) {
    out[offset + joint[p]] = 1.0;
    offset += action_counts[p];
  }
  return out;
}

std::vector<std::vector<double>> MlpPayoffs::Payoffs(const Game& game,
                                                     const GameState& state,
                                                     const ActionMask& legal) const {
  const GameSpec& spec = game.spec();
  const auto& counts = spec.action_counts;
  const int n = game.num_players();
  const auto joints = LegalJoints(counts, legal);
  std::vector<std::vector<double>> out(NumJointActions(counts),
                                       std::vector<double>(n, 0.0));
  const int side_size = JointEncodingSize(counts, layer_->dense_joint);
  MlpModel::Matrix sides(side_size, joints.size());
  for (size_t c = 0; c < joints.size(); ++c) {
    const auto code = EncodeJoint(counts, JointActionFromIndex(counts, joints[c]),
                                  layer_->dense_joint);
    for (int r = 0; r < side_size; ++r) sides(r, c) = static_cast<float>(code[r]);
  }
  std::vector<double> support(codec_.num_bins());
  for (size_t k = 0; k < layer_->models.size(); ++k) {
    const int p = static_cast<int>(k);
    const auto probs = layer_->models[k].ForwardSides(game.Observe(state, p), sides);
    for (size_t c = 0; c < joints.size(); ++c) {
      for (int b = 0; b < codec_.num_bins(); ++b) support[b] = probs(b, c);
      const double v01 = codec_.SupportToScalar(support);
      out[joints[c]][p] = spec.return_lo[p] + (spec.return_hi[p] - spec.return_lo[p]) * v01;
    }
  }
  if (layer_->shared) {
    for (int64_t j : joints) {
      for (int p = 1; p < n; ++p) {
        out[j][p] = spec.kind == GameKind::kZeroSum ? -out[j][0] : out[j][0];
      }
    }
  }
  return out;
}

LayerResult ProcessLayer(const GameTree& tree, const Game& game, int h,
                         const StagePayoffs& payoffs, const LayerOptions& options) {
  const auto& ids = LayerOf(tree, h);
  const int n = game.num_players();
  const auto& counts = game.spec().action_counts;
  struct NodeResult {
    std::vector<double> values;
    std::vector<std::vector<double>> policies;
    double epsilon = -1.0;
    int pruned = 0;
    bool terminal = false;
  };
  std::vector<NodeResult> results(ids.size());
  ParallelFor(ids.size(), options.threads, [&](int64_t i) {
    const TreeNode& node = tree.nodes[ids[i]];
    NodeResult& r = results[i];
    if (node.state.terminal) {
      r.terminal = true;
      r.values.assign(n, 0.0);
      return;
    }
    const ActionMask legal = LegalMask(game, node.state);
    StageSolveOptions stage = options.stage;
    stage.verify = i < options.verify_nodes;
    Rng rng(DeriveSeed(options.seed, ids[i]));
    const StageSolution solution =
        SolveStage(counts, legal, payoffs.Payoffs(game, node.state, legal), stage, rng);
    r.values = solution.values;
    r.policies = solution.policies;
    r.epsilon = solution.epsilon;
    for (int p = 0; p < n; ++p) {
      for (int a = 0; a < counts[p]; ++a) r.pruned += legal[p][a] && !solution.mask[p][a];
    }
  });

  LayerResult out;
  int solved = 0;
  int verified = 0;
  double eps_sum = 0.0;
  for (size_t i = 0; i < ids.size(); ++i) {
    NodeResult& r = results[i];
    if (!r.terminal) {
      out.mean_value += r.values[0];
      ++solved;
      out.pruned_actions += r.pruned;
      out.policies[ids[i]] = std::move(r.policies);
      if (r.epsilon >= 0.0) {
        eps_sum += r.epsilon;
        ++verified;
      }
    }
    out.values[ids[i]] = std::move(r.values);
  }
  if (solved > 0) out.mean_value /= solved;
  if (verified > 0) out.mean_epsilon = eps_sum / verified;
  return out;
}

// -- TrainedAgent ---------------------------------------------------------------

int TrainedAgent::ValueModelCount() const {
  int total = 0;
  for (const auto& layer : values) total += layer.models.size();
  return total;
}

std::vector<double> TrainedAgent::Policy(const GameState& state, int player) const {
  auto probs = policies[player].Forward(game->Observe(state, player));
  const auto legal = game->LegalActions(state, player);
  std::vector<double> masked(probs.size(), 0.0);
  double total = 0.0;
  for (int a : legal) {
    masked[a] = probs[a];
    total += probs[a];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    for (int a : legal) masked[a] = 1.0 / legal.size();
    return masked;
  }
  for (double& v : masked) v /= total;
  return masked;
}

std::vector<int> NnCceAgent::Act(const Game& game, const GameState& state,
                                 const std::vector<int>& players, Rng& rng) const {
  if (game.spec().id != trained_->game_id) {
    throw ContractViolation(StrCat("agent trained on ", trained_->game_id,
                                   " cannot play ", game.spec().id));
  }
  std::vector<int> actions;
  for (int p : players) {
    const auto policy = trained_->Policy(state, p);
    if (greedy_) {
      actions.push_back(static_cast<int>(
          std::max_element(policy.begin(), policy.end()) - policy.begin()));
    } else {
      actions.push_back(SampleCategorical(policy, rng));
    }
  }
  return actions;
}

PolicySource::Prediction AgentPolicySource::Predict(const Game& game,
                                                    const GameState& state) const {
  Prediction out;
  out.value.assign(game.num_players(), 0.0);
  for (int p = 0; p < game.num_players(); ++p) {
    if (state.terminal) {
      out.policies.push_back(std::vector<double>(game.spec().action_counts[p], 0.0));
    } else {
      out.policies.push_back(agent_->Policy(state, p));
    }
  }
  return out;
}

GateDecision ValidationGate(const Agent& candidate, const double* previous_score,
                            const Game& game, int n_matches, uint64_t seed,
                            int threads) {
  if (n_matches < 1) throw ContractViolation("ValidationGate: need n_matches >= 1");
  const RandomAgent random;
  const auto records = PlayMatches(game, candidate, random, n_matches, seed, threads);
  GateDecision decision;
  decision.score = Summarize(records, seed).mean_score_a;
  if (previous_score != nullptr) {
    decision.accept = decision.score >= *previous_score;
    decision.improved = decision.score > *previous_score;
  }
  return decision;
}

int64_t CountStateActions(const Game& game, int64_t cap) {
  std::vector<std::unordered_set<GameState, GameStateHash>> layers(game.horizon() + 1);
  for (const auto& [s, p] : game.spec().start_distribution) layers[s.timestep].insert(s);
  const auto& counts = game.spec().action_counts;
  int64_t total = 0;
  for (int h = 0; h < game.horizon(); ++h) {
    for (const GameState& s : layers[h]) {
      if (s.terminal) continue;
      const auto joints = LegalJoints(counts, LegalMask(game, s));
      total += joints.size();
      if (total > cap) return cap + 1;
      for (int64_t j : joints) {
        const GameState next = game.Step(s, JointActionFromIndex(counts, j)).next_state;
        layers[next.timestep].insert(next);
      }
    }
  }
  return total;
}

// -- Training loop ----------------------------------------------------------------

namespace {

MlpConfig ValueNetConfig(const NetworkOptions& net, int input, int side, int bins) {
  MlpConfig c;
  c.layer_dims.push_back(input);
  for (int w : net.hidden) c.layer_dims.push_back(w);
  c.layer_dims.push_back(net.representation);
  c.side_layer = static_cast<int>(c.layer_dims.size()) - 1;
  c.side_size = side;
  for (int w : net.head_hidden) c.layer_dims.push_back(w);
  c.layer_dims.push_back(bins);
  c.head_kind = HeadKind::kRegressionSupport;
  c.dropout_rate = net.dropout;
  c.l2_coeff = net.l2;
  c.learning_rate = net.learning_rate;
  return c;
}

MlpConfig PolicyNetConfig(const NetworkOptions& net, int input, int actions) {
  MlpConfig c;
  c.layer_dims.push_back(input);
  for (int w : net.hidden) c.layer_dims.push_back(w);
  c.layer_dims.push_back(actions);
  c.head_kind = HeadKind::kPolicySoftmax;
  c.dropout_rate = net.dropout;
  c.l2_coeff = net.l2;
  c.learning_rate = net.learning_rate;
  return c;
}

uint64_t Seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  return DeriveSeed(DeriveSeed(DeriveSeed(base, a), b), c);
}

enum SeedStream : uint64_t {
  kTreeStream = 1,
  kValueStream,
  kLayerStream,
  kPolicyStream,
  kGateStream,
  kUpsampleStream,
};

json NullableEpsilon(double eps) { return eps < 0.0 ? json(nullptr) : json(eps); }

}  // namespace

TrainResult Train(const TrainConfig& config, const TrainHooks& hooks) {
  config.Validate();
  const GamePtr game = MakeGame(config.game);
  const GameSpec& spec = game->spec();
  const int horizon = spec.horizon;
  const int n = spec.num_players;
  const auto& counts = spec.action_counts;
  const bool tabular = config.value_backend == ValueBackend::kTabular;
  if (tabular) {
    const int64_t size = CountStateActions(*game, config.tabular_cap);
    if (size > config.tabular_cap) {
      throw ContractViolation(StrCat("tabular backend: ", spec.id,
                                     " has more than ", config.tabular_cap,
                                     " reachable (state, joint action) pairs"));
    }
  }
  const bool shared = config.share_values &&
                      ((spec.kind == GameKind::kZeroSum && n == 2) ||
                       spec.kind == GameKind::kIdenticalInterest);
  const SupportCodec codec(config.codec_bins, 0.0, 1.0);
  const int side_size = JointEncodingSize(counts, config.dense_joint);
  const int obs_size = game->ObservationSize();

  TrainResult result;
  auto emit = [&](const json& record) {
    std::string line = record.dump();
    if (hooks.on_log) hooks.on_log(line);
    result.log.push_back(std::move(line));
  };

  std::shared_ptr<TrainedAgent> accepted;
  double best_score = 0.0;
  int stale = 0;
  const UniformPolicySource uniform;
  TreeOptions tree_options;
  tree_options.randomize_prob.assign(n, config.randomize_prob);

  for (int t = 1; t <= config.outer_iters; ++t) {
    const AgentPolicySource learned(accepted.get());
    const PolicySource& source =
        accepted ? static_cast<const PolicySource&>(learned) : uniform;
    std::vector<GameTree> candidates;
    for (int f = 0; f < config.cv_candidates; ++f) {
      candidates.push_back(GenerateTree(*game, source, config.trajectories,
                                        tree_options, Seed(config.seed, kTreeStream, t, f)));
    }
    const int chosen = SelectTreeByCv(candidates);
    const GameTree tree = std::move(candidates[chosen]);
    candidates.clear();

    auto candidate = std::make_shared<TrainedAgent>();
    candidate->game_id = spec.id;
    candidate->game = game;
    candidate->codec = codec;
    candidate->values.resize(horizon);
    if (tabular) candidate->tabular.resize(horizon);

    std::unordered_map<int, std::vector<double>> next_values;
    for (int id : LayerOf(tree, horizon)) next_values[id].assign(n, 0.0);
    std::vector<std::vector<PolicyExample>> policy_data(n);

    for (int h = horizon - 1; h >= 0; --h) {
      const auto records = BuildQDataset(tree, *game, h, next_values);
      double regression_loss = 0.0;
      if (tabular) {
        std::vector<TabularRecord> rows;
        for (const auto& r : records) rows.push_back({r.state, r.joint_index, r.target});
        std::vector<double> midpoint(n);
        for (int p = 0; p < n; ++p) midpoint[p] = 0.5 * (spec.return_lo[p] + spec.return_hi[p]);
        candidate->tabular[h] = FitTabular(rows, midpoint);
      } else {
        LayerValueModels& layer = candidate->values[h];
        layer.shared = shared;
        layer.dense_joint = config.dense_joint;
        const int models = shared ? 1 : n;
        for (int k = 0; k < models; ++k) {
          MlpModel model(ValueNetConfig(config.q, obs_size, side_size, codec.num_bins()),
                         Seed(config.seed, kValueStream, t, h * 64 + k));
          std::vector<RegressionExample> data;
          data.reserve(records.size());
          for (const auto& r : records) {
            data.push_back({game->Observe(r.state, k),
                            EncodeJoint(counts, r.joint, config.dense_joint),
                            Normalize(r.target[k], spec.return_lo[k], spec.return_hi[k])});
          }
          if (config.upsample && !data.empty()) {
            const int64_t min_count =
                config.upsample_min_count > 0
                    ? config.upsample_min_count
                    : std::max<int64_t>(50, static_cast<int64_t>(data.size()) / 20);
            data = UpsampleValues(data, config.upsample_classes, min_count,
                                  Seed(config.seed, kUpsampleStream, t, h * 64 + k))
                       .data;
          }
          if (!data.empty()) {
            TrainOptions options{config.q.epochs, config.q.batch_size,
                                 Seed(config.seed, kValueStream, t, h * 64 + k + 1)};
            regression_loss += TrainRegression(model, data, codec, options).back() / models;
          }
          layer.models.push_back(std::move(model));
        }
      }

      const SimulatorPayoffs simulator;
      const TabularPayoffs table(tabular ? &candidate->tabular[h] : nullptr);
      const MlpPayoffs network(&candidate->values[h], codec);
      const StagePayoffs& payoffs =
          h == horizon - 1 ? static_cast<const StagePayoffs&>(simulator)
          : tabular        ? static_cast<const StagePayoffs&>(table)
                           : static_cast<const StagePayoffs&>(network);
      LayerOptions layer_options{config.cce, config.verify_nodes,
                                 Seed(config.seed, kLayerStream, t, h), config.threads};
      LayerResult layer = ProcessLayer(tree, *game, h, payoffs, layer_options);

      for (int id : LayerOf(tree, h)) {
        const auto it = layer.policies.find(id);
        if (it == layer.policies.end()) continue;
        for (int p = 0; p < n; ++p) {
          policy_data[p].push_back({game->Observe(tree.nodes[id].state, p), {}, it->second[p]});
        }
      }
      emit(json{{"iteration", t},
                {"layer", h},
                {"nodes", LayerOf(tree, h).size()},
                {"q_records", records.size()},
                {"mean_stage_value", layer.mean_value},
                {"mean_epsilon", NullableEpsilon(layer.mean_epsilon)},
                {"pruned_actions", layer.pruned_actions},
                {"regression_loss", tabular ? json(nullptr) : json(regression_loss)}});
      next_values = std::move(layer.values);
    }

    double policy_loss = 0.0;
    for (int p = 0; p < n; ++p) {
      MlpModel model = config.policy_warm_start && accepted
                           ? accepted->policies[p]
                           : MlpModel(PolicyNetConfig(config.policy, obs_size, counts[p]),
                                      Seed(config.seed, kPolicyStream, t, p));
      model.ResetOptimizer();
      for (auto& ex : policy_data[p]) {
        double total = 0.0;
        for (double v : ex.target) total += v;
        for (double& v : ex.target) v /= total;
      }
      if (!policy_data[p].empty()) {
        TrainOptions options{config.policy.epochs, config.policy.batch_size,
                             Seed(config.seed, kPolicyStream, t, p + 100)};
        policy_loss += TrainPolicy(model, policy_data[p], options).back() / n;
      }
      candidate->policies.push_back(std::move(model));
    }

    const NnCceAgent player(candidate, "candidate", config.greedy_play);
    const GateDecision gate =
        ValidationGate(player, accepted ? &best_score : nullptr, *game,
                       config.gate_matches, Seed(config.seed, kGateStream),
                       config.threads);
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
    emit(json{{"iteration", t},
              {"tree_candidates", config.cv_candidates},
              {"tree_chosen", chosen},
              {"tree_nodes", tree.nodes.size()},
              {"policy_loss", policy_loss},
              {"gate_score", gate.score},
              {"gate_decision", gate.accept ? "accept" : "rollback"}});
    LogInfo(StrCat("iteration ", t, ": gate score ", gate.score, " (",
                   gate.accept ? "accept" : "rollback", ")"));
    if (stale >= config.patience) {
      result.stopped_early = t < config.outer_iters;
      break;
    }
  }
  result.agent = accepted;
  return result;
}

// -- Checkpoints --------------------------------------------------------------------

std::string CheckpointStem(const std::string& game_id) {
  std::string stem = game_id;
  for (char& c : stem) {
    if (c == ':' || c == '/' || c == '\\') c = '-';
  }
  return stem;
}

void SaveTrainedAgent(const TrainedAgent& agent, const std::string& dir) {
  const std::string stem = (std::filesystem::path(dir) / CheckpointStem(agent.game_id)).string();
  for (size_t p = 0; p < agent.policies.size(); ++p) {
    SaveCheckpoint(StrCat(stem, "_", p, "_policy.ccef"), agent.policies[p],
                   {agent.game_id, static_cast<int>(p), -1, agent.codec});
  }
  for (size_t h = 0; h < agent.values.size(); ++h) {
    for (size_t k = 0; k < agent.values[h].models.size(); ++k) {
      SaveCheckpoint(StrCat(stem, "_", k, "_", h, ".ccef"), agent.values[h].models[k],
                     {agent.game_id, static_cast<int>(k), static_cast<int>(h),
                      agent.codec});
    }
  }
}

std::shared_ptr<TrainedAgent> LoadTrainedAgent(const std::string& dir,
                                               const std::string& game_id) {
  auto agent = std::make_shared<TrainedAgent>();
  agent->game_id = game_id;
  agent->game = MakeGame(game_id);
  const int n = agent->game->num_players();
  const int horizon = agent->game->horizon();
  const std::string stem = (std::filesystem::path(dir) / CheckpointStem(game_id)).string();
  for (int p = 0; p < n; ++p) {
    CheckpointMeta meta;
    agent->policies.push_back(LoadCheckpoint(StrCat(stem, "_", p, "_policy.ccef"), &meta));
    if (meta.game_id != game_id) {
      throw RuntimeFailure(StrCat("checkpoint for ", meta.game_id, " does not match ",
                                  game_id));
    }
    agent->codec = meta.codec;
  }
  agent->values.resize(horizon);
  for (int h = 0; h < horizon; ++h) {
    for (int k = 0; k < n; ++k) {
      const std::string path = StrCat(stem, "_", k, "_", h, ".ccef");
      if (!std::filesystem::exists(path)) break;
      agent->values[h].models.push_back(LoadCheckpoint(path, nullptr));
    }
    const auto& models = agent->values[h].models;
    agent->values[h].shared = models.size() == 1 && n > 1;
    agent->values[h].dense_joint =
        !models.empty() &&
        models[0].config().side_size != JointEncodingSize(agent->game->spec().action_counts, false);
  }
  return agent;
}

}  // namespace nncce
