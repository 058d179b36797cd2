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

#include "nncce/data.h"

#include <algorithm>
#include <cmath>

namespace nncce {

std::vector<double> TreeNode::MeanReturn() const {
  if (backups == 0) return value;
  std::vector<double> mean = return_sum;
  for (double& v : mean) v /= static_cast<double>(backups);
  return mean;
}

int GameTree::Find(const GameState& state, int depth) const {
  if (depth < 0 || depth >= static_cast<int>(index_.size())) return -1;
  const auto it = index_[depth].find(state);
  return it == index_[depth].end() ? -1 : it->second;
}

std::pair<int, bool> GameTree::FindOrAdd(TreeNode node) {
  const int depth = node.depth;
  if (depth < 0 || depth >= static_cast<int>(index_.size())) {
    throw ContractViolation(StrCat("GameTree: depth ", depth, " outside [0, ",
                                   horizon(), "]"));
  }
  const auto [it, inserted] =
      index_[depth].try_emplace(node.state, static_cast<int>(nodes.size()));
  if (!inserted) return {it->second, false};
  layers_[depth].push_back(it->second);
  nodes.push_back(std::move(node));
  return {it->second, true};
}

const std::vector<int>& LayerOf(const GameTree& tree, int h) {
  if (h < 0 || h > tree.horizon()) {
    throw ContractViolation(StrCat("LayerOf: h=", h, " outside [0, ",
                                   tree.horizon(), "]"));
  }
  return tree.layers()[h];
}

PolicySource::Prediction UniformPolicySource::Predict(const Game& game,
                                                      const GameState& state) const {
  Prediction out;
  const int n = game.num_players();
  out.value.assign(n, 0.0);
  out.policies.resize(n);
  for (int p = 0; p < n; ++p) {
    out.policies[p].assign(game.spec().action_counts[p], 0.0);
    if (state.terminal) continue;
    const auto legal = game.LegalActions(state, p);
    for (int a : legal) out.policies[p][a] = 1.0 / legal.size();
  }
  return out;
}

int AddNode(GameTree& tree, const Game& game, const PolicySource& source,
            const GameState& state) {
  const int existing = tree.Find(state, state.timestep);
  if (existing >= 0) return existing;
  const auto prediction = source.Predict(game, state);
  const int n = game.num_players();
  TreeNode node;
  node.state = state;
  node.depth = state.timestep;
  node.value = prediction.value;
  node.return_sum.assign(n, 0.0);
  node.policy_weights.resize(n);
  node.action_visits.resize(n);
  for (int p = 0; p < n; ++p) {
    const int k = game.spec().action_counts[p];
    node.action_visits[p].assign(k, 0);
    node.policy_weights[p] = WeightRow::Uniform(k);
    for (int a = 0; a < k; ++a) {
      node.policy_weights[p].log_weights[a] =
          std::log(std::max(prediction.policies[p][a], 1e-300));
    }
  }
  return tree.FindOrAdd(std::move(node)).first;
}

Simulation Simulate(GameTree& tree, const Game& game, const PolicySource& source,
                    int root, const TreeOptions& options, Rng& rng) {
  const int n = game.num_players();
  Simulation sim;
  sim.randomized.assign(n, false);
  for (int p = 0; p < n && p < static_cast<int>(options.randomize_prob.size()); ++p) {
    sim.randomized[p] = Uniform01(rng) < options.randomize_prob[p];
  }
  const auto& counts = game.spec().action_counts;
  std::vector<bool> playable;
  std::vector<double> policy;
  int node = root;
  while (true) {
    ++tree.nodes[node].visit_count;
    if (tree.nodes[node].state.terminal) break;
    SimulationStep step;
    step.node = node;
    step.joint.resize(n);
    step.action_prob.resize(n);
    for (int p = 0; p < n; ++p) {
      const auto legal = game.LegalActions(tree.nodes[node].state, p);
      if (sim.randomized[p]) {
        step.joint[p] = legal[UniformInt(rng, legal.size())];
        step.action_prob[p] = 1.0 / legal.size();
      } else {
        playable.assign(counts[p], false);
        for (int a : legal) playable[a] = true;
        PolicyFromWeightsInto(tree.nodes[node].policy_weights[p], playable, policy);
        step.joint[p] = SampleCategorical(policy, rng);
        step.action_prob[p] = policy[step.joint[p]];
      }
      ++tree.nodes[node].action_visits[p][step.joint[p]];
    }
    const int64_t joint_index = JointActionIndex(counts, step.joint);
    int child;
    bool created = false;
    const auto edge = tree.nodes[node].children.find(joint_index);
    if (edge != tree.nodes[node].children.end()) {
      child = edge->second.child;
      step.rewards = edge->second.rewards;
    } else {
      StepResult result = game.Step(tree.nodes[node].state, step.joint);
      const size_t before = tree.nodes.size();
      child = AddNode(tree, game, source, result.next_state);
      created = tree.nodes.size() > before;
      if (tree.nodes[child].parent < 0) {
        tree.nodes[child].parent = node;
        tree.nodes[child].parent_joint = joint_index;
      }
      step.rewards = result.rewards;
      tree.nodes[node].children.emplace(joint_index,
                                        TreeEdge{child, std::move(result.rewards)});
    }
    sim.steps.push_back(std::move(step));
    node = child;
    if (created && options.expansion == Expansion::kStopAtNewLeaf) {
      ++tree.nodes[node].visit_count;
      break;
    }
  }
  sim.leaf = node;

  TreeNode& leaf = tree.nodes[node];
  std::vector<double> g = leaf.state.terminal ? std::vector<double>(n, 0.0) : leaf.value;
  for (int p = 0; p < n; ++p) leaf.return_sum[p] += g[p];
  ++leaf.backups;
  const double discount = game.spec().discount;
  sim.returns.resize(sim.steps.size());
  for (int i = static_cast<int>(sim.steps.size()) - 1; i >= 0; --i) {
    for (int p = 0; p < n; ++p) g[p] = sim.steps[i].rewards[p] + discount * g[p];
    sim.returns[i] = g;
    TreeNode& visited = tree.nodes[sim.steps[i].node];
    for (int p = 0; p < n; ++p) visited.return_sum[p] += g[p];
    ++visited.backups;
  }
  return sim;
}

GameTree GenerateTree(const Game& game, const PolicySource& source,
                      int64_t simulations, const TreeOptions& options,
                      uint64_t seed) {
  if (simulations < 1) {
    throw ContractViolation(StrCat("GenerateTree: need K >= 1, got ", simulations));
  }
  GameTree tree(game.horizon());
  Rng rng(seed);
  for (int64_t k = 0; k < simulations; ++k) {
    const int root = AddNode(tree, game, source, game.SampleStart(rng));
    Simulate(tree, game, source, root, options, rng);
  }
  return tree;
}

double TreeCvScore(const GameTree& tree) {
  double total = 0.0;
  int counted = 0;
  for (const auto& layer : tree.layers()) {
    if (layer.empty()) continue;
    double mean = 0.0;
    for (int id : layer) mean += tree.nodes[id].MeanReturn()[0];
    mean /= layer.size();
    if (std::abs(mean) < 1e-9) continue;
    double var = 0.0;
    for (int id : layer) {
      const double d = tree.nodes[id].MeanReturn()[0] - mean;
      var += d * d;
    }
    total += std::sqrt(var / layer.size()) / std::abs(mean);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

int SelectTreeByCv(const std::vector<GameTree>& trees) {
  if (trees.empty()) throw ContractViolation("SelectTreeByCv: no trees");
  int best = 0;
  double best_score = TreeCvScore(trees[0]);
  for (int i = 1; i < static_cast<int>(trees.size()); ++i) {
    const double score = TreeCvScore(trees[i]);
    if (score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

UpsampleResult UpsampleValues(const std::vector<RegressionExample>& data,
                              int num_classes, int64_t min_count, uint64_t seed) {
  if (data.empty()) throw ContractViolation("UpsampleValues: empty dataset");
  if (num_classes < 1) {
    throw ContractViolation(StrCat("UpsampleValues: need >= 1 class, got ", num_classes));
  }
  double lo = data[0].target, hi = data[0].target;
  for (const auto& ex : data) {
    lo = std::min(lo, ex.target);
    hi = std::max(hi, ex.target);
  }
  std::vector<std::vector<size_t>> classes(num_classes);
  for (size_t i = 0; i < data.size(); ++i) {
    int c = 0;
    if (hi > lo) {
      c = std::min(num_classes - 1,
                   static_cast<int>((data[i].target - lo) / (hi - lo) * num_classes));
    }
    classes[c].push_back(i);
  }
  std::erase_if(classes, [](const auto& c) { return c.empty(); });

  auto by_size = [](const auto& a, const auto& b) { return a.size() < b.size(); };
  while (classes.size() > 1) {
    std::stable_sort(classes.begin(), classes.end(), by_size);
    bool ok = true;
    for (size_t c = 1; c < classes.size(); ++c) {
      ok = ok && static_cast<int64_t>(classes[c].size()) >= min_count;
    }
    if (ok) break;
    classes[1].insert(classes[1].end(), classes[0].begin(), classes[0].end());
    classes.erase(classes.begin());
  }
  std::stable_sort(classes.begin(), classes.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  UpsampleResult result;
  Rng rng(seed);
  const size_t target = classes.front().size();
  for (const auto& members : classes) {
    result.merged_sizes.push_back(members.size());
    for (size_t i : members) result.data.push_back(data[i]);
    for (size_t k = members.size(); k < target; ++k) {
      result.data.push_back(data[members[UniformInt(rng, members.size())]]);
    }
  }
  for (size_t i = result.data.size() - 1; i > 0; --i) {
    std::swap(result.data[i], result.data[UniformInt(rng, i + 1)]);
  }
  return result;
}

std::vector<size_t> ReplaySample(const std::vector<ReplayEntry>& buffer,
                                 int64_t batch_size, Rng& rng) {
  if (buffer.empty()) throw ContractViolation("ReplaySample: empty buffer");
  std::map<int, std::vector<size_t>> by_time;
  for (size_t i = 0; i < buffer.size(); ++i) by_time[buffer[i].timestep].push_back(i);
  std::vector<const std::vector<size_t>*> groups;
  for (const auto& [t, members] : by_time) groups.push_back(&members);
  std::vector<size_t> out(batch_size);
  for (auto& idx : out) {
    const auto& group = *groups[UniformInt(rng, groups.size())];
    idx = group[UniformInt(rng, group.size())];
  }
  return out;
}

std::vector<ReplayEntry> ReplayFromTree(const GameTree& tree, const Game& game) {
  std::vector<ReplayEntry> out;
  const int n = game.num_players();
  for (const auto& layer : tree.layers()) {
    for (int id : layer) {
      const TreeNode& node = tree.nodes[id];
      if (node.state.terminal) continue;
      int64_t plays = 0;
      for (int64_t c : node.action_visits[0]) plays += c;
      if (plays == 0) continue;
      std::vector<std::vector<double>> observations(n);
      for (int q = 0; q < n; ++q) observations[q] = game.Observe(node.state, q);
      const auto value = node.MeanReturn();
      for (int p = 0; p < n; ++p) {
        ReplayEntry entry;
        entry.observations = observations;
        entry.value = value[p];
        entry.policy.resize(node.action_visits[p].size());
        for (size_t a = 0; a < entry.policy.size(); ++a) {
          entry.policy[a] = static_cast<double>(node.action_visits[p][a]) / plays;
        }
        entry.timestep = node.state.timestep;
        entry.player = p;
        entry.visit_count = node.visit_count;
        out.push_back(std::move(entry));
      }
    }
  }
  return out;
}

namespace {

std::string JoinDoubles(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += FormatDouble(values[i]);
  }
  return out;
}

}  // namespace

std::string ExportReplayTsv(const std::vector<ReplayEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += StrCat(e.timestep, '\t', e.player, '\t', e.visit_count, '\t',
                  FormatDouble(e.value), '\t', JoinDoubles(e.policy), '\t',
                  JoinDoubles(e.observations[e.player]), '\n');
  }
  return out;
}

std::vector<QRecord> BuildQDataset(
    const GameTree& tree, const Game& game, int h,
    const std::unordered_map<int, std::vector<double>>& child_values) {
  const double discount = game.spec().discount;
  std::vector<QRecord> out;
  for (int id : LayerOf(tree, h)) {
    const TreeNode& node = tree.nodes[id];
    for (const auto& [joint_index, edge] : node.children) {
      const auto it = child_values.find(edge.child);
      if (it == child_values.end()) {
        throw ContractViolation(StrCat(
            "BuildQDataset: no value for child node ", edge.child, " (",
            game.StateToString(tree.nodes[edge.child].state), ")"));
      }
      QRecord r;
      r.node = id;
      r.state = node.state;
      r.joint_index = joint_index;
      r.joint = JointActionFromIndex(game.spec().action_counts, joint_index);
      r.next_state = tree.nodes[edge.child].state;
      r.rewards = edge.rewards;
      r.child_value = it->second;
      r.target.resize(r.rewards.size());
      for (size_t p = 0; p < r.target.size(); ++p) {
        r.target[p] = r.rewards[p] + discount * r.child_value[p];
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace nncce
