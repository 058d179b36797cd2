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

#include <cmath>
#include <set>

#include "doctest.h"

namespace nncce {
namespace {

// Upper 1% points of the chi-square distribution, from standard tables.
double ChiSquareCritical01(int dof) {
  switch (dof) {
    case 1: return 6.635;
    case 3: return 11.345;
    case 4: return 13.277;
    case 7: return 18.475;
    case 8: return 20.090;
    default: FAIL("no table entry"); return 0.0;
  }
}

double ChiSquare(const std::vector<double>& observed,
                 const std::vector<double>& expected) {
  double stat = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// Always plays action 0.
class FirstActionSource : public PolicySource {
 public:
  Prediction Predict(const Game& game, const GameState&) const override {
    Prediction out;
    out.value.assign(game.num_players(), 0.0);
    for (int k : game.spec().action_counts) {
      std::vector<double> p(k, 0.0);
      p[0] = 1.0;
      out.policies.push_back(p);
    }
    return out;
  }
};

TEST_CASE("single rollout on a one-step game") {
  const auto game = MatchingPennies();
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 1, {}, 1);
  CHECK(tree.nodes.size() == 2u);
  CHECK(LayerOf(tree, 0).size() == 1u);
  CHECK(LayerOf(tree, 1).size() == 1u);
  CHECK(tree.nodes[LayerOf(tree, 1)[0]].state.terminal);
  CHECK(tree.nodes[0].visit_count == 1);
}

TEST_CASE("uniform rollouts visit matrix outcomes evenly") {
  const auto game = MatchingPennies();
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 10000, {}, 2);
  REQUIRE(LayerOf(tree, 1).size() == 4u);
  const TreeNode& root = tree.nodes[tree.roots()[0]];
  CHECK(root.visit_count == 10000);
  for (const auto& [j, edge] : root.children) {
    CHECK(std::abs(tree.nodes[edge.child].visit_count - 2500) <= 150);
  }
  CHECK(LayerOf(tree, 0) == tree.roots());
  CHECK_THROWS_AS(LayerOf(tree, 2), ContractViolation);
}

TEST_CASE("full randomization overrides a deterministic source") {
  const auto game = RockPaperScissors();
  TreeOptions options;
  options.randomize_prob = {1.0, 1.0};
  const int k = 9000;
  const GameTree tree = GenerateTree(*game, FirstActionSource(), k, options, 3);
  std::vector<double> observed(9, 0.0);
  for (const auto& [j, edge] : tree.nodes[0].children) {
    observed[j] = tree.nodes[edge.child].visit_count;
  }
  CHECK(ChiSquare(observed, std::vector<double>(9, k / 9.0)) < ChiSquareCritical01(8));

  const GameTree on_policy = GenerateTree(*game, FirstActionSource(), 100, {}, 3);
  CHECK(LayerOf(on_policy, 1).size() == 1u);
}

TEST_CASE("half randomization flags each player half the time") {
  const auto game = MatchingPennies();
  GameTree tree(1);
  TreeOptions options;
  options.randomize_prob = {0.5, 0.5};
  Rng rng(4);
  const int root = AddNode(tree, *game, FirstActionSource(), game->SampleStart(rng));
  std::vector<int> flagged(2, 0);
  for (int i = 0; i < 4000; ++i) {
    const auto sim = Simulate(tree, *game, FirstActionSource(), root, options, rng);
    for (int p = 0; p < 2; ++p) flagged[p] += sim.randomized[p];
  }
  for (int p = 0; p < 2; ++p) CHECK(std::abs(flagged[p] - 2000) < 150);
}

TEST_CASE("layers partition the tree and hold distinct states") {
  const auto game = MakeGame("goofspiel:4");
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 10000, {}, 5);
  size_t total = 0;
  std::set<int> seen;
  for (int h = 0; h <= tree.horizon(); ++h) {
    std::set<std::vector<int32_t>> payloads;
    for (int id : LayerOf(tree, h)) {
      CHECK(tree.nodes[id].state.timestep == h);
      CHECK(payloads.insert(tree.nodes[id].state.payload).second);
      CHECK(seen.insert(id).second);
      CHECK(tree.nodes[id].visit_count >= 1);
      for (const auto& [j, edge] : tree.nodes[id].children) {
        CHECK(tree.nodes[edge.child].state.timestep == h + 1);
      }
    }
    total += LayerOf(tree, h).size();
  }
  CHECK(total == tree.nodes.size());
  CHECK(tree.roots().size() == 24u);
}

TEST_CASE("stop-at-new-leaf expansion grows one node per simulation") {
  const auto game = MakeGame("goofspiel:3:fixed");
  GameTree tree(game->horizon());
  Rng rng(6);
  TreeOptions options;
  options.expansion = Expansion::kStopAtNewLeaf;
  const int root = AddNode(tree, *game, UniformPolicySource(), game->SampleStart(rng));
  for (int i = 0; i < 5; ++i) {
    const size_t before = tree.nodes.size();
    const auto sim = Simulate(tree, *game, UniformPolicySource(), root, options, rng);
    CHECK(tree.nodes.size() <= before + 1);
    CHECK(sim.steps.size() >= 1u);
  }
  CHECK(tree.nodes[root].visit_count == 5);
}

TEST_CASE("backed-up returns equal the simulated reward sums") {
  const auto game = MakeGame("goofspiel:4:fixed");
  GameTree tree(game->horizon());
  Rng rng(7);
  const int root = AddNode(tree, *game, UniformPolicySource(), game->SampleStart(rng));
  const auto sim = Simulate(tree, *game, UniformPolicySource(), root, {}, rng);
  REQUIRE(sim.steps.size() == 4u);
  std::vector<double> total(2, 0.0);
  for (const auto& s : sim.steps) {
    for (int p = 0; p < 2; ++p) total[p] += s.rewards[p];
  }
  CHECK(sim.returns[0] == total);
  CHECK(tree.nodes[root].MeanReturn() == total);
  CHECK(tree.nodes[sim.leaf].state.terminal);
}

TEST_CASE("tree generation is deterministic") {
  const auto game = MakeGame("pursuit:3x3:4");
  TreeOptions options;
  options.randomize_prob = {0.5, 0.5, 0.5};
  const GameTree a = GenerateTree(*game, UniformPolicySource(), 500, options, 8);
  const GameTree b = GenerateTree(*game, UniformPolicySource(), 500, options, 8);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].state == b.nodes[i].state);
    CHECK(a.nodes[i].visit_count == b.nodes[i].visit_count);
    CHECK(a.nodes[i].return_sum == b.nodes[i].return_sum);
    REQUIRE(a.nodes[i].children.size() == b.nodes[i].children.size());
    auto ia = a.nodes[i].children.begin();
    auto ib = b.nodes[i].children.begin();
    for (; ia != a.nodes[i].children.end(); ++ia, ++ib) {
      CHECK(ia->first == ib->first);
      CHECK(ia->second.child == ib->second.child);
    }
  }
}

GameTree FlatTree(const std::vector<double>& values) {
  GameTree tree(1);
  for (size_t i = 0; i < values.size(); ++i) {
    TreeNode node;
    node.state.payload = {static_cast<int32_t>(i)};
    node.value = {values[i]};
    tree.FindOrAdd(node);
  }
  return tree;
}

TEST_CASE("select tree by coefficient of variation") {
  CHECK(SelectTreeByCv({FlatTree({1, 1, 1})}) == 0);
  const GameTree a = FlatTree({1, 1, 1});
  const GameTree b = FlatTree({0.5, 1, 1.5});
  CHECK(TreeCvScore(a) == 0.0);
  CHECK(TreeCvScore(b) == doctest::Approx(0.40824829).epsilon(1e-7));
  CHECK(SelectTreeByCv({a, b}) == 1);
  CHECK(SelectTreeByCv({b, b, b}) == 0);
  CHECK(TreeCvScore(FlatTree({-1, 1})) == 0.0);
  CHECK_THROWS_AS(SelectTreeByCv({}), ContractViolation);
}

std::vector<RegressionExample> ClassFixture(const std::vector<int>& sizes,
                                            const std::vector<double>& values) {
  std::vector<RegressionExample> data;
  for (size_t c = 0; c < sizes.size(); ++c) {
    for (int i = 0; i < sizes[c]; ++i) {
      data.push_back({{static_cast<double>(c), static_cast<double>(i)}, {}, values[c]});
    }
  }
  return data;
}

TEST_CASE("upsample merges the two smallest classes") {
  const auto data = ClassFixture({5000, 400, 300}, {0.0, 0.5, 1.0});
  const auto result = UpsampleValues(data, 3, 1000, 1);
  CHECK(result.merged_sizes == std::vector<int64_t>{5000, 700});
  CHECK(result.data.size() == 10000u);
  int low = 0;
  for (const auto& ex : result.data) low += ex.target == 0.0;
  CHECK(low == 5000);
  std::set<std::pair<double, double>> originals;
  for (const auto& ex : result.data) originals.insert({ex.input[0], ex.input[1]});
  CHECK(originals.size() >= 5700u);
}

TEST_CASE("upsample keeps every original record") {
  const auto data = ClassFixture({50, 20, 9, 3}, {0.1, 0.4, 0.6, 0.9});
  const auto result = UpsampleValues(data, 4, 10, 2);
  std::set<std::pair<double, double>> present;
  for (const auto& ex : result.data) present.insert({ex.input[0], ex.input[1]});
  for (const auto& ex : data) CHECK(present.count({ex.input[0], ex.input[1]}) == 1);
  // 3 + 9 merge to 12, leaving (50, 20, 12).
  CHECK(result.merged_sizes == std::vector<int64_t>{50, 20, 12});
  CHECK(result.data.size() == 150u);
}

TEST_CASE("upsample with one or balanced classes") {
  const auto single = ClassFixture({30}, {0.5});
  const auto r1 = UpsampleValues(single, 10, 5, 3);
  CHECK(r1.data.size() == 30u);
  CHECK(r1.merged_sizes == std::vector<int64_t>{30});

  const auto balanced = ClassFixture({40, 40}, {0.0, 1.0});
  const auto r2 = UpsampleValues(balanced, 2, 10, 3);
  CHECK(r2.merged_sizes == std::vector<int64_t>{40, 40});
  CHECK(r2.data.size() == 80u);
  CHECK_THROWS_AS(UpsampleValues({}, 2, 10, 3), ContractViolation);
}

std::vector<ReplayEntry> EntriesAt(const std::vector<int>& timesteps) {
  std::vector<ReplayEntry> out;
  for (int t : timesteps) {
    ReplayEntry e;
    e.timestep = t;
    e.policy = {1.0};
    out.push_back(e);
  }
  return out;
}

TEST_CASE("replay sampling is uniform over timesteps") {
  const auto buffer = EntriesAt({0, 1, 1, 2, 2, 2, 3, 4, 4, 4, 4, 4});
  Rng rng(9);
  const int draws = 100000;
  std::vector<double> per_time(5, 0.0);
  for (size_t i : ReplaySample(buffer, draws, rng)) per_time[buffer[i].timestep] += 1;
  for (double c : per_time) CHECK(std::abs(c / draws - 0.2) < 0.015);
  CHECK(ChiSquare(per_time, std::vector<double>(5, draws / 5.0)) <
        ChiSquareCritical01(4));
}

TEST_CASE("replay two-stage product probabilities") {
  const auto buffer = EntriesAt({0, 1, 1, 1});
  Rng rng(10);
  const int draws = 100000;
  std::vector<double> counts(4, 0.0);
  for (size_t i : ReplaySample(buffer, draws, rng)) counts[i] += 1;
  CHECK(std::abs(counts[0] / draws - 0.5) < 0.01);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(counts[i] / draws - 1.0 / 6) < 0.01);
  const std::vector<double> expected{draws / 2.0, draws / 6.0, draws / 6.0, draws / 6.0};
  CHECK(ChiSquare(counts, expected) < ChiSquareCritical01(3));

  const auto single = EntriesAt({3});
  for (size_t i : ReplaySample(single, 100, rng)) CHECK(i == 0u);
  CHECK_THROWS_AS(ReplaySample({}, 1, rng), ContractViolation);
}

TEST_CASE("replay entries from a tree") {
  const auto game = MakeGame("goofspiel:3:fixed");
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 200, {}, 11);
  const auto entries = ReplayFromTree(tree, *game);
  CHECK_FALSE(entries.empty());
  for (const auto& e : entries) {
    double total = 0.0;
    for (double p : e.policy) total += p;
    CHECK(total == doctest::Approx(1.0));
    CHECK(e.observations.size() == 2u);
    CHECK(e.timestep < 3);
  }
  const std::string tsv = ExportReplayTsv({entries[0]});
  const auto fields = Split(Trim(tsv), '\t');
  REQUIRE(fields.size() == 6u);
  CHECK(fields[0] == "0");
  CHECK(fields[1] == "0");
  CHECK(fields[2] == "200");
  CHECK(Split(fields[4], ',').size() == 3u);
  CHECK(Split(fields[5], ',').size() == 14u);
}

TEST_CASE("q dataset on an exhaustive matrix tree") {
  const auto game = RockPaperScissors();
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 2000, {}, 12);
  std::unordered_map<int, std::vector<double>> values;
  for (int id : LayerOf(tree, 1)) values[id] = {0.0, 0.0};
  const auto records = BuildQDataset(tree, *game, 0, values);
  REQUIRE(records.size() == 9u);
  for (const auto& r : records) CHECK(r.target == game->Payoff(r.joint));

  values.erase(LayerOf(tree, 1)[0]);
  CHECK_THROWS_AS(BuildQDataset(tree, *game, 0, values), ContractViolation);
}

TEST_CASE("q dataset record counts") {
  const auto chain = std::make_shared<ChainGame>(3, 1, 5);
  const GameTree line = GenerateTree(*chain, UniformPolicySource(), 10, {}, 13);
  size_t total = 0;
  for (int h = 0; h < 3; ++h) {
    std::unordered_map<int, std::vector<double>> values;
    for (int id : LayerOf(line, h + 1)) values[id] = {0.0, 0.0};
    total += BuildQDataset(line, *chain, h, values).size();
  }
  CHECK(total == 3u);

  const auto game = MakeGame("goofspiel:4");
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 300, {}, 14);
  for (int h = 0; h < 4; ++h) {
    std::unordered_map<int, std::vector<double>> values;
    for (int id : LayerOf(tree, h + 1)) values[id] = {0.5, -0.5};
    size_t edges = 0;
    for (int id : LayerOf(tree, h)) edges += tree.nodes[id].children.size();
    const auto records = BuildQDataset(tree, *game, h, values);
    CHECK(records.size() == edges);
    std::set<std::pair<int, int64_t>> keys;
    for (const auto& r : records) CHECK(keys.insert({r.node, r.joint_index}).second);
  }
}

}  // namespace
}  // namespace nncce
