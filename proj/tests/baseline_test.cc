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

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "test_util.h"

namespace nncce {
namespace {

namespace fs = std::filesystem;

GameState Start(const Game& game) { return game.spec().start_distribution[0].first; }

SmctsConfig TinySmcts(const std::string& game) {
  SmctsConfig c;
  c.game = game;
  c.seed = 3;
  c.iterations = 2;
  c.simulations = 300;
  c.eval_simulations = 20;
  c.train_batches = 20;
  c.batch_size = 16;
  c.policy = {{16}, 0, {}, 0.0, 0.0, 1e-2, 1, 16};
  c.value = {{16}, 0, {}, 0.0, 0.0, 1e-2, 1, 16};
  c.gate_matches = 10;
  return c;
}

TEST_CASE("one simulation gives a point mass") {
  const auto game = MakeGame("goofspiel:3");
  const auto result = SmctsSearch(*game, Start(*game), UniformPolicySource(), {1}, 4);
  for (const auto& policy : result.policies) {
    int support = 0;
    for (double v : policy) {
      CHECK((v == 0.0 || v == 1.0));
      support += v == 1.0;
    }
    CHECK(support == 1);
  }
}

TEST_CASE("uniform prior without updates samples uniformly") {
  const auto game = PrisonersDilemma();
  const auto result = SmctsSearch(*game, Start(*game), UniformPolicySource(),
                                  {10000, WeightUpdate::kNone}, 5);
  for (const auto& policy : result.policies) {
    CHECK(testing::L1FromUniform(policy) <= 0.05);
  }
  // Mean row-player payoff under the uniform joint distribution.
  CHECK(std::abs(result.value[0] - 2.25) <= 0.02);
}

TEST_CASE("IX-updated search stays near uniform on matching pennies") {
  const auto game = MatchingPennies();
  const auto result = SmctsSearch(*game, Start(*game), UniformPolicySource(), {10000}, 6);
  for (const auto& policy : result.policies) {
    CHECK(testing::L1FromUniform(policy) <= 0.05);
  }
  CHECK(std::abs(result.value[0]) <= 0.05);
}

TEST_CASE("IX-updated search learns to defect") {
  const auto game = PrisonersDilemma();
  const auto result = SmctsSearch(*game, Start(*game), UniformPolicySource(), {10000}, 6);
  for (const auto& policy : result.policies) CHECK(policy[1] > 0.6);
}

TEST_CASE("visits sum to K and stay on legal actions") {
  const auto game = MakeGame("goofspiel:4");
  GameState state = Start(*game);
  state = game->Step(state, {2, 0}).next_state;
  const auto result = SmctsSearch(*game, state, UniformPolicySource(), {777}, 1);
  for (int p = 0; p < 2; ++p) {
    int64_t total = 0;
    double mass = 0.0;
    for (int a = 0; a < 4; ++a) {
      total += result.visits[p][a];
      mass += result.policies[p][a];
      if (!game->IsLegal(state, p, a)) CHECK(result.visits[p][a] == 0);
    }
    CHECK(total == 777);
    CHECK(mass == doctest::Approx(1.0));
  }
}

TEST_CASE("search contracts") {
  const auto game = MakeGame("goofspiel:3");
  GameState state = Start(*game);
  for (int t = 0; t < 3; ++t) state = game->Step(state, {t, t}).next_state;
  CHECK_THROWS_AS(SmctsSearch(*game, state, UniformPolicySource(), {10}, 1),
                  ContractViolation);
  CHECK_THROWS_AS(SmctsSearch(*game, Start(*game), UniformPolicySource(), {0}, 1),
                  ContractViolation);
}

TEST_CASE("search is reproducible") {
  const auto game = MakeGame("pursuit:3x3:4");
  const auto a = SmctsSearch(*game, Start(*game), UniformPolicySource(), {500}, 9);
  const auto b = SmctsSearch(*game, Start(*game), UniformPolicySource(), {500}, 9);
  CHECK(a.visits == b.visits);
  CHECK(a.value == b.value);
}

TEST_CASE("trained RPS policy is near uniform") {
  SmctsConfig config = TinySmcts("matrix:rps");
  config.simulations = 5000;
  config.train_batches = 100;
  config.policy.learning_rate = 3e-2;
  const auto result = SmctsTrain(config);
  REQUIRE(result.model);
  const auto game = MakeGame("matrix:rps");
  const auto pred = SmctsPolicySource(result.model.get()).Predict(*game, Start(*game));
  for (const auto& policy : pred.policies) {
    CHECK(testing::L1FromUniform(policy) <= 0.1);
  }
}

TEST_CASE("training is deterministic and checkpoints roundtrip") {
  const SmctsConfig config = TinySmcts("goofspiel:3");
  const auto a = SmctsTrain(config);
  const auto b = SmctsTrain(config);
  CHECK(a.log == b.log);
  CHECK(a.iterations_run == 2);
  const fs::path dir_a = fs::temp_directory_path() / "nncce_smcts_a";
  const fs::path dir_b = fs::temp_directory_path() / "nncce_smcts_b";
  for (const auto& dir : {dir_a, dir_b}) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  SaveSmctsModel(*a.model, dir_a.string());
  SaveSmctsModel(*b.model, dir_b.string());
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    CHECK(ReadFile(entry.path().string()) ==
          ReadFile((dir_b / entry.path().filename()).string()));
    ++files;
  }
  CHECK(files == 4);
  const auto loaded = LoadSmctsModel(dir_a.string(), "goofspiel:3");
  const auto game = MakeGame("goofspiel:3");
  Rng rng(2);
  const GameState s = game->SampleStart(rng);
  const auto p1 = SmctsPolicySource(loaded.get()).Predict(*game, s);
  const auto p2 = SmctsPolicySource(a.model.get()).Predict(*game, s);
  CHECK(p1.policies == p2.policies);
  CHECK(p1.value == p2.value);
}

TEST_CASE("agent plays legal moves in both modes") {
  const auto result = SmctsTrain(TinySmcts("goofspiel:3"));
  const auto game = MakeGame("goofspiel:3");
  const RandomAgent random;
  for (bool policy_only : {false, true}) {
    const SmctsAgent agent(result.model, 20, WeightUpdate::kIx, policy_only);
    for (const auto& r : PlayMatches(*game, agent, random, 20, 7)) CHECK(r.forfeit.empty());
  }
  CHECK(RunMatch(*MakeGame("goofspiel:4"), SmctsAgent(result.model, 5), random, 0, 1)
            .forfeit == "a");
}

TEST_CASE("config validation") {
  SmctsConfig config = TinySmcts("goofspiel:3");
  config.simulations = 0;
  CHECK_THROWS_AS(config.Validate(), ContractViolation);
  config = TinySmcts("goofspiel:3");
  config.replay_capacity = 0;
  CHECK_THROWS_AS(SmctsTrain(config), ContractViolation);
}

}  // namespace
}  // namespace nncce
