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

#include <cmath>
#include <filesystem>

#include "backward_oracle.h"
#include "doctest.h"
#include "json.hpp"

namespace nncce {
namespace {

namespace fs = std::filesystem;

TrainConfig TinyConfig(const std::string& game) {
  TrainConfig c;
  c.game = game;
  c.seed = 5;
  c.outer_iters = 1;
  c.trajectories = 200;
  c.cce.rounds = 2000;
  c.verify_nodes = 1;
  c.q = {{16}, 8, {16}, 0.0, 0.0, 1e-3, 3, 32};
  c.policy = {{16}, 0, {}, 0.0, 0.0, 1e-3, 3, 32};
  c.gate_matches = 20;
  return c;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nncce_trainer_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadBytes(const fs::path& path) { return ReadFile(path.string()); }

double L1(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

TEST_CASE("H=1 terminal layer equals a direct stage solve") {
  const auto game = MatchingPennies();
  const UniformPolicySource uniform;
  const GameTree tree = GenerateTree(*game, uniform, 50, {}, 3);
  LayerOptions options;
  options.stage.rounds = 3000;
  options.seed = 17;
  const LayerResult layer = ProcessLayer(tree, *game, 0, SimulatorPayoffs(), options);
  REQUIRE(LayerOf(tree, 0).size() == 1);
  const int root = LayerOf(tree, 0)[0];
  Rng rng(DeriveSeed(17, root));
  const StageSolution direct =
      SolveStage(game->spec().action_counts, FullMask(game->spec().action_counts),
                 game->payoffs(), options.stage, rng);
  CHECK(layer.values.at(root) == direct.values);
  CHECK(layer.policies.at(root) == direct.policies);
  CHECK(layer.values.size() == 1);
  CHECK(layer.mean_value == direct.values[0]);
}

TEST_CASE("H=1 trained policy distils the stage policy") {
  const fs::path dir = TempDir("h1");
  const std::string path = (dir / "skew.game").string();
  WriteFileAtomic(path, "2 2 2\n2 -2\n-1 1\n-1 1\n1 -1\n");
  TrainConfig config = TinyConfig("matrix:" + path);
  config.cce.rounds = 20000;
  config.policy = {{16}, 0, {}, 0.0, 0.0, 1e-2, 400, 1};
  const TrainResult result = Train(config);
  REQUIRE(result.agent);
  const auto game = MakeGame(config.game);
  const auto& matrix = static_cast<const MatrixGame&>(*game);
  Rng rng(99);
  const StageSolution direct =
      SolveStage(game->spec().action_counts, FullMask(game->spec().action_counts),
                 matrix.payoffs(), config.cce, rng);
  const GameState start = game->spec().start_distribution[0].first;
  for (int p = 0; p < 2; ++p) {
    CHECK(L1(result.agent->Policy(start, p), direct.policies[p]) <= 0.1);
  }
}

TEST_CASE("repeated prisoner's dilemma defects at every layer") {
  const auto game = MakeGame("repeated:2:prisoners_dilemma");
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 400, {}, 4);
  for (bool prune : {true, false}) {
    LayerOptions options;
    options.stage.rounds = prune ? 10000 : 100000;
    options.stage.prune = prune;
    options.seed = 8;
    const auto layers = testing::TabularBackward(tree, *game, options);
    for (int h = 0; h < 2; ++h) {
      REQUIRE_FALSE(layers[h].policies.empty());
      for (const auto& [id, policies] : layers[h].policies) {
        for (const auto& pi : policies) CHECK(pi[1] >= 0.95);
      }
    }
  }
}

TEST_CASE("tabular layer values match the backward oracle on a chain game") {
  const auto game = MakeGame("chain:2x3:7");
  const GameTree tree = GenerateTree(*game, UniformPolicySource(), 3000, {}, 6);
  CHECK(tree.nodes.size() <= 100);
  LayerOptions options;
  options.stage.rounds = 100000;
  options.seed = 12;
  const auto layers = testing::TabularBackward(tree, *game, options);
  StageSolveOptions oracle_stage = options.stage;
  oracle_stage.rounds *= 10;
  const auto oracle = testing::BackwardCceOracle(*game, oracle_stage, 1);
  REQUIRE(LayerOf(tree, 0).size() == oracle[0].size());
  for (int id : LayerOf(tree, 0)) {
    const auto& expected = oracle[0].at(tree.nodes[id].state);
    const auto& actual = layers[0].values.at(id);
    for (int p = 0; p < 2; ++p) CHECK(std::abs(actual[p] - expected[p]) <= 0.03);
  }
}

TEST_CASE("tabular training reproduces the oracle end to end") {
  TrainConfig config = TinyConfig("chain:2x3:7");
  config.value_backend = ValueBackend::kTabular;
  config.trajectories = 3000;
  config.randomize_prob = 1.0;
  config.cce.rounds = 100000;
  const TrainResult result = Train(config);
  StageSolveOptions oracle_stage = config.cce;
  oracle_stage.rounds *= 10;
  const auto oracle = testing::BackwardCceOracle(*MakeGame(config.game), oracle_stage, 1);
  double expected = 0.0;
  for (const auto& [s, v] : oracle[0]) expected += v[0];
  expected /= oracle[0].size();
  bool found = false;
  for (const auto& line : result.log) {
    const auto record = nlohmann::json::parse(line);
    if (record.contains("layer") && record["layer"] == 0) {
      found = true;
      CHECK(std::abs(record["mean_stage_value"].get<double>() - expected) <= 0.03);
    }
  }
  CHECK(found);
  CHECK(result.agent->ValueModelCount() == 0);
  CHECK(result.agent->tabular.size() == 2);
}

TEST_CASE("validation gate decisions") {
  const auto game = MakeGame("goofspiel:3");
  const RandomAgent candidate;
  const GateDecision first = ValidationGate(candidate, nullptr, *game, 30, 4);
  CHECK(first.accept);
  const double tie = first.score;
  const GateDecision same = ValidationGate(candidate, &tie, *game, 30, 4);
  CHECK(same.accept);
  CHECK_FALSE(same.improved);
  CHECK(same.score == first.score);
  const double higher = std::nextafter(first.score, 1e9);
  const GateDecision worse = ValidationGate(candidate, &higher, *game, 30, 4);
  CHECK_FALSE(worse.accept);
  const double lower = first.score - 1.0;
  CHECK(ValidationGate(candidate, &lower, *game, 30, 4).improved);
  CHECK_THROWS_AS(ValidationGate(candidate, nullptr, *game, 0, 4), ContractViolation);
}

TEST_CASE("value model counts") {
  SUBCASE("zero-sum shares one model per timestep") {
    const auto result = Train(TinyConfig("goofspiel:3"));
    CHECK(result.agent->ValueModelCount() == 3);
  }
  SUBCASE("sharing disabled") {
    TrainConfig config = TinyConfig("goofspiel:3");
    config.share_values = false;
    CHECK(Train(config).agent->ValueModelCount() == 6);
  }
  SUBCASE("general-sum keeps one model per player and timestep") {
    CHECK(Train(TinyConfig("chain:3x2:1")).agent->ValueModelCount() == 6);
  }
  SUBCASE("three players in a team game") {
    TrainConfig config = TinyConfig("pursuit:3x3:2");
    config.trajectories = 50;
    CHECK(Train(config).agent->ValueModelCount() == 6);
  }
}

TEST_CASE("training is deterministic and independent of threads") {
  TrainConfig config = TinyConfig("goofspiel:3");
  config.outer_iters = 2;
  auto run = [&](int threads, const std::string& name) {
    config.threads = threads;
    const fs::path dir = TempDir(name);
    const auto result = Train(config);
    SaveTrainedAgent(*result.agent, dir.string());
    return std::make_pair(result.log, dir);
  };
  const auto [log_a, dir_a] = run(1, "det_a");
  const auto [log_b, dir_b] = run(1, "det_b");
  const auto [log_c, dir_c] = run(3, "det_c");
  CHECK(log_a == log_b);
  CHECK(log_a == log_c);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    CHECK(ReadBytes(entry.path()) == ReadBytes(dir_b / name));
    CHECK(ReadBytes(entry.path()) == ReadBytes(dir_c / name));
    ++files;
  }
  CHECK(files == 5);
}

TEST_CASE("training log records") {
  TrainConfig config = TinyConfig("goofspiel:3");
  config.outer_iters = 2;
  std::vector<std::string> streamed;
  int accepted = 0;
  const auto result =
      Train(config, {[&](const std::string& line) { streamed.push_back(line); },
                     [&](const TrainedAgent&) { ++accepted; }});
  CHECK(streamed == result.log);
  CHECK(accepted >= 1);
  CHECK(result.iterations_run == 2);
  REQUIRE(result.log.size() == 2 * 4);
  int expected_layer = 2;
  for (size_t i = 0; i < result.log.size(); ++i) {
    const auto record = nlohmann::json::parse(result.log[i]);
    if (i % 4 == 3) {
      CHECK(record.contains("gate_decision"));
      CHECK(record.contains("policy_loss"));
      expected_layer = 2;
    } else {
      CHECK(record["layer"] == expected_layer--);
      CHECK(record.contains("mean_stage_value"));
      CHECK(record.contains("regression_loss"));
      CHECK(record.contains("mean_epsilon"));
    }
  }
}

TEST_CASE("early stop after patience stale iterations") {
  TrainConfig config = TinyConfig("matrix:matching_pennies");
  config.outer_iters = 10;
  config.patience = 2;
  const auto result = Train(config);
  CHECK(result.iterations_run < 10);
  CHECK(result.stopped_early);
}

TEST_CASE("checkpoints roundtrip") {
  const fs::path dir = TempDir("ckpt");
  const auto result = Train(TinyConfig("goofspiel:3"));
  SaveTrainedAgent(*result.agent, dir.string());
  CHECK(fs::exists(dir / "goofspiel-3_0_policy.ccef"));
  CHECK(fs::exists(dir / "goofspiel-3_1_policy.ccef"));
  for (int h = 0; h < 3; ++h) {
    CHECK(fs::exists(dir / ("goofspiel-3_0_" + std::to_string(h) + ".ccef")));
  }
  const auto loaded = LoadTrainedAgent(dir.string(), "goofspiel:3");
  CHECK(loaded->ValueModelCount() == 3);
  CHECK(loaded->values[0].shared);
  const auto game = MakeGame("goofspiel:3");
  Rng rng(1);
  const GameState s = game->SampleStart(rng);
  for (int p = 0; p < 2; ++p) CHECK(loaded->Policy(s, p) == result.agent->Policy(s, p));
  CHECK_THROWS_AS(LoadTrainedAgent(dir.string(), "goofspiel:4"), RuntimeFailure);
}

TEST_CASE("trained agents only play their own game") {
  const auto result = Train(TinyConfig("goofspiel:3"));
  const NnCceAgent agent(result.agent);
  const auto other = MakeGame("goofspiel:4");
  const RandomAgent random;
  CHECK(RunMatch(*other, agent, random, 0, 1).forfeit == "a");
  Rng rng(2);
  const auto game = MakeGame("goofspiel:3");
  const GameState s = game->SampleStart(rng);
  for (int p = 0; p < 2; ++p) {
    const auto pi = result.agent->Policy(s, p);
    double total = 0.0;
    for (double v : pi) total += v;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("state-action counts and the tabular cap") {
  CHECK(CountStateActions(*MakeGame("matrix:rps"), 1000) == 9);
  CHECK(CountStateActions(*MakeGame("goofspiel:2"), 1000) == 16);
  CHECK(CountStateActions(*MakeGame("goofspiel:4"), 10) == 11);
  TrainConfig config = TinyConfig("goofspiel:4");
  config.value_backend = ValueBackend::kTabular;
  config.tabular_cap = 100;
  CHECK_THROWS_AS(Train(config), ContractViolation);
}

TEST_CASE("config validation") {
  TrainConfig config = TinyConfig("goofspiel:3");
  config.trajectories = 0;
  CHECK_THROWS_AS(config.Validate(), ContractViolation);
  config = TinyConfig("goofspiel:3");
  config.randomize_prob = 1.5;
  CHECK_THROWS_AS(config.Validate(), ContractViolation);
  config = TinyConfig("goofspiel:3");
  config.outer_iters = 0;
  CHECK_THROWS_AS(Train(config), ContractViolation);
}

TEST_CASE("joint encodings") {
  const std::vector<int> counts{2, 3};
  CHECK(JointEncodingSize(counts, false) == 5);
  CHECK(JointEncodingSize(counts, true) == 6);
  CHECK(EncodeJoint(counts, {1, 2}, false) == std::vector<double>{0, 1, 0, 0, 1});
  CHECK(EncodeJoint(counts, {1, 2}, true) == std::vector<double>{0, 0, 0, 0, 0, 1});
}

}  // namespace
}  // namespace nncce
